//! Parabolic cylinder function `D_{-λ}` from its integral representation
//!
//! ```text
//! D_{-λ}(x) = e^{-x²/4} / Γ(λ) · ∫₀^∞ t^{λ-1} e^{-x t - t²/2} dt
//! ```
//!
//! The integral is evaluated in the variable `s = ln t`, where the integrand
//! `exp(λ s - x e^s - e^{2s}/2)` is smooth and unimodal. Everything is kept in
//! log scale and normalised by the integrand's peak. The far left tail, where
//! the integrand is `e^{λ s}` times a convergent power series in `e^s`, is
//! summed in closed form; this keeps small orders (`λ → 0`, long `e^{λ s}`
//! tails) cheap.

use super::gamma::ln_gamma;
use super::quadrature;
use crate::error::{Error, Result};

/// Largest supported order `λ`.
pub const MAX_ORDER: f64 = 1e4;

const PEAK_DROP: f64 = 60.0;
const QUAD_REL_TOL: f64 = 1e-13;
const REFINE_TOL: f64 = 1e-10;
const MAX_PANELS: usize = 4000;

fn check_order(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || lambda.is_nan() {
        return Err(Error::Domain(format!(
            "pcf order must be > 0, got {lambda}"
        )));
    }
    if lambda > MAX_ORDER {
        return Err(Error::Accuracy(format!(
            "pcf order {lambda} exceeds supported maximum {MAX_ORDER}"
        )));
    }
    Ok(())
}

/// `ln ∫₀^∞ t^{λ-1} e^{-z t - t²/2} dt`.
pub fn ln_pcf_integral(lambda: f64, z: f64) -> Result<f64> {
    check_order(lambda)?;
    if !z.is_finite() {
        return Err(Error::Domain(format!(
            "pcf argument must be finite, got {z}"
        )));
    }
    // mode of λ s - z e^s - e^{2s}/2: u² + z u - λ = 0 with u = e^s
    let root = (z * z + 4.0 * lambda).sqrt();
    let u0 = if z >= 0.0 {
        2.0 * lambda / (z + root)
    } else {
        0.5 * (root - z)
    };
    let s0 = u0.ln();
    let phi0 = lambda * s0 - z * u0 - 0.5 * u0 * u0;
    // log-integrand relative to the peak, in the offset d = s - s0
    let rel = |d: f64| lambda * d - z * u0 * d.exp_m1() - 0.5 * u0 * u0 * (2.0 * d).exp_m1();
    let width = (lambda + u0 * u0).sqrt().recip().min(1.0);

    // below d_tail the integrand is summed as a series in e^s
    let d_tail = (0.05 / (1.0 + z.abs())).ln() - s0;

    let mut breaks = Vec::new();
    let mut tail = false;
    if d_tail >= 0.0 {
        tail = true;
        breaks.push(d_tail);
    } else {
        let mut step = width;
        loop {
            let d = -step;
            if d <= d_tail {
                tail = true;
                breaks.push(d_tail);
                break;
            }
            breaks.push(d);
            if rel(d) < -PEAK_DROP {
                break;
            }
            step *= 2.0;
        }
        breaks.reverse();
        breaks.push(0.0);
    }
    let start = *breaks.last().expect("nonempty");
    let mut step = width;
    loop {
        let d = start + step;
        breaks.push(d);
        if rel(d) < -PEAK_DROP {
            break;
        }
        step *= 2.0;
    }

    let quad = quadrature::integrate(
        |d| rel(d).exp(),
        &breaks,
        QUAD_REL_TOL,
        REFINE_TOL,
        MAX_PANELS,
    )?;

    let mut total = quad.value;
    if tail {
        total += tail_series(lambda, z, s0 + breaks[0], phi0);
    }
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::Accuracy(format!(
            "pcf integral not positive (lambda={lambda}, z={z})"
        )));
    }
    Ok(phi0 + total.ln())
}

/// `∫_{-∞}^{s_l} e^{λ s - φ0} e^{-z e^s - e^{2s}/2} ds` using
/// `e^{-z u - u²/2} = Σ c_n u^n`, `(n+1) c_{n+1} = -z c_n - c_{n-1}`.
fn tail_series(lambda: f64, z: f64, s_l: f64, phi0: f64) -> f64 {
    let u_l = s_l.exp();
    let mut c_prev = 0.0;
    let mut c = 1.0;
    let mut sum = 0.0;
    // e^{n s_l} factored out of the exponential so it never overflows
    let base = (lambda * s_l - phi0).exp();
    let mut u_pow = 1.0;
    for n in 0..200 {
        let nf = n as f64;
        sum += c * u_pow / (lambda + nf);
        let c_next = (-z * c - c_prev) / (nf + 1.0);
        c_prev = c;
        c = c_next;
        u_pow *= u_l;
        // both remaining coefficient sequences are negligible
        if n > 2 && (c.abs() + c_prev.abs()) * u_pow < 1e-18 * sum.abs() {
            break;
        }
    }
    base * sum
}

/// `ln(e^{z²/4} D_{-λ}(z))`, the log of the Gaussian-weighted function used
/// by `H^(q)_K`.
pub fn ln_scaled_pcf(lambda: f64, z: f64) -> Result<f64> {
    Ok(ln_pcf_integral(lambda, z)? - ln_gamma(lambda)?)
}

/// Parabolic cylinder function `D_{-λ}(x)` for `λ > 0`.
pub fn pcf(lambda: f64, x: f64) -> Result<f64> {
    Ok((ln_scaled_pcf(lambda, x)? - 0.25 * x * x).exp())
}
