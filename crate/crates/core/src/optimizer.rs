//! Regime classification and the optimal barrier `b*`.
//!
//! The linear strategy (`b = 0`) is optimal when `μK/q² <= Δ` with
//! `Δ = -H(0)/H'(0)`. Otherwise `b*` is the unique zero on `(0, c*)` of
//!
//! ```text
//! R(b) = (K+q)(W(b)/W'(b) - μ/q) + K(μ/K - b) - q H(b)/H'(b)
//! ```
//!
//! which is the condition `v_b''(b-) = v_b''(b+)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ControlParams, ModelParams};
use crate::specfun::{h_ratio, root_delta, w_ratio};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// Pay at rate `K U` from the start (`b* = 0`).
    LinearAtZero,
    /// Wait until the surplus exceeds `b* > 0`.
    DelayedAtBStar,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeDecision {
    pub delta: f64,
    /// `μ K / q²`
    pub threshold: f64,
    pub regime: Regime,
    pub b_star: f64,
    pub c_star: f64,
    /// `R(b_star)`.
    pub residual: f64,
}

/// The classical reflection barrier
/// `c* = σ²/δ · ln((μ + δ)/(δ - μ))`, `δ = sqrt(μ² + 2qσ²)`.
pub fn classical_barrier(m: &ModelParams, c: &ControlParams) -> Result<f64> {
    m.validate()?;
    if !(c.q > 0.0) {
        return Err(Error::Domain(format!("q must be > 0, got {}", c.q)));
    }
    let delta = root_delta(m, c.q);
    if !(delta > 0.0) {
        return Err(Error::Domain("mu² + 2 q sigma² must be positive".into()));
    }
    // ln((δ+μ)/(δ-μ)) = 2 atanh(μ/δ)
    Ok(2.0 * m.sigma2() / delta * (m.mu / delta).atanh())
}

/// `Δ = -H(0)/H'(0)`.
pub fn delta_threshold(m: &ModelParams, c: &ControlParams) -> Result<f64> {
    m.validate()?;
    c.validate()?;
    Ok(-h_ratio(0.0, m, c)?)
}

/// `R(b)`; negative at `b = 0` exactly when `μK/q² > Δ`.
pub fn barrier_residual(b: f64, m: &ModelParams, c: &ControlParams) -> Result<f64> {
    let (q, k) = (c.q, c.k);
    let f = (k + q) * (w_ratio(b, m, c) - m.mu / q);
    let g = k * (m.mu / k - b);
    Ok(f + g - q * h_ratio(b, m, c)?)
}

/// `K(μ/K - b) - q H(b)/H'(b)`, strictly positive for every `b >= 0`.
pub fn inequality_gap(b: f64, m: &ModelParams, c: &ControlParams) -> Result<f64> {
    Ok(c.k * (m.mu / c.k - b) - c.q * h_ratio(b, m, c)?)
}

/// Bracketed root of a continuous function with `f(lo) < 0 < f(hi)`:
/// regula falsi with the Illinois weight halving, falling back to
/// bisection whenever an iteration fails to halve the bracket.
pub(crate) fn bracketed_root<F>(mut f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut f_lo = f(lo)?;
    let mut f_hi = f(hi)?;
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(Error::Bracket(format!(
            "residual {f_lo:e} at {lo} and {f_hi:e} at {hi}"
        )));
    }
    let mut side = 0i8;
    for _ in 0..400 {
        let width = hi - lo;
        if width <= xtol {
            break;
        }
        let mut x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
            f_lo = fx;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            f_hi = fx;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
        if hi - lo > 0.5 * width {
            let mid = 0.5 * (lo + hi);
            let fm = f(mid)?;
            if fm == 0.0 {
                return Ok(mid);
            }
            if fm < 0.0 {
                lo = mid;
                f_lo = fm;
            } else {
                hi = mid;
                f_hi = fm;
            }
            side = 0;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Classifies the regime and, when it is delayed, solves for `b*`.
pub fn solve_b_star(m: &ModelParams, c: &ControlParams) -> Result<RegimeDecision> {
    m.validate()?;
    c.validate()?;
    if !(m.mu > 0.0) {
        return Err(Error::Domain(format!(
            "optimal barrier requires mu > 0, got {}",
            m.mu
        )));
    }
    let c_star = classical_barrier(m, c)?;
    let delta = delta_threshold(m, c)?;
    let threshold = m.mu * c.k / (c.q * c.q);
    if threshold <= delta {
        return Ok(RegimeDecision {
            delta,
            threshold,
            regime: Regime::LinearAtZero,
            b_star: 0.0,
            c_star,
            residual: barrier_residual(0.0, m, c)?,
        });
    }
    let lo = 1e-10 * c_star;
    let hi = (1.0 - 1e-10) * c_star;
    let b_star = bracketed_root(|b| barrier_residual(b, m, c), lo, hi, 1e-12 * c_star)?;
    Ok(RegimeDecision {
        delta,
        threshold,
        regime: Regime::DelayedAtBStar,
        b_star,
        c_star,
        residual: barrier_residual(b_star, m, c)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KSize {
    /// `c* < min(μ/q, μ/K)`
    SmallK,
    /// `μ/K <= c* < μ/q`
    LargeK,
}

/// Position of `b*` relative to the mean-reversion level `μ/K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderingReport {
    pub size: KSize,
    pub b_star: f64,
    pub mu_over_k: f64,
    pub c_star: f64,
    pub mu_over_q: f64,
    /// What the criterion for this `K` size predicts for `b* < μ/K`.
    pub predicts_below_mu_over_k: bool,
    /// The solved `b*` compared directly with `μ/K`.
    pub b_star_below_mu_over_k: bool,
}

pub fn ordering_report(m: &ModelParams, c: &ControlParams) -> Result<OrderingReport> {
    let d = solve_b_star(m, c)?;
    if d.regime != Regime::DelayedAtBStar {
        return Err(Error::Precondition(
            "ordering report needs the delayed regime (b* > 0)".into(),
        ));
    }
    let mu_over_k = m.mu / c.k;
    let mu_over_q = m.mu / c.q;
    let (size, predicts) = if d.c_star < mu_over_q.min(mu_over_k) {
        (KSize::SmallK, true)
    } else {
        let lhs = (c.k + c.q) * (w_ratio(mu_over_k, m, c) - mu_over_q);
        let rhs = c.q * h_ratio(mu_over_k, m, c)?;
        (KSize::LargeK, lhs > rhs)
    };
    Ok(OrderingReport {
        size,
        b_star: d.b_star,
        mu_over_k,
        c_star: d.c_star,
        mu_over_q,
        predicts_below_mu_over_k: predicts,
        b_star_below_mu_over_k: d.b_star < mu_over_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_barrier_values() {
        let m = ModelParams::new(0.3, 4.5).unwrap();
        let c = ControlParams::new(0.07, 1.0).unwrap();
        let cs = classical_barrier(&m, &c).unwrap();
        // direct evaluation of the log form
        let d = (0.09f64 + 2.0 * 0.07 * 20.25).sqrt();
        let direct = 20.25 / d * ((0.3 + d) / (d - 0.3)).ln();
        assert!((cs - direct).abs() < 1e-12);
        assert!((cs - 4.197).abs() < 1e-3);
        let m0 = ModelParams::new(0.0, 4.5).unwrap();
        assert_eq!(classical_barrier(&m0, &c).unwrap(), 0.0);
    }

    #[test]
    fn classical_barrier_below_mu_over_q() {
        for &(mu, s, q) in &[(0.3, 4.5, 0.07), (1.0, 0.5, 0.01), (0.05, 3.0, 0.2)] {
            let m = ModelParams::new(mu, s).unwrap();
            let c = ControlParams::new(q, 1.0).unwrap();
            assert!(classical_barrier(&m, &c).unwrap() < mu / q);
        }
    }

    #[test]
    fn root_finder_on_cubic() {
        let r = bracketed_root(|x| Ok(x * x * x - 2.0), 0.0, 3.0, 1e-14).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-13);
        assert!(matches!(
            bracketed_root(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-12),
            Err(Error::Bracket(_))
        ));
    }

    #[test]
    fn nonpositive_drift_rejected() {
        let m = ModelParams::new(-0.1, 1.0).unwrap();
        let c = ControlParams::new(0.05, 0.1).unwrap();
        assert!(matches!(solve_b_star(&m, &c), Err(Error::Domain(_))));
    }

    #[test]
    fn ordering_requires_delayed_regime() {
        let m = ModelParams::new(0.3, 4.5).unwrap();
        let c = ControlParams::new(0.05, 0.1).unwrap();
        assert!(matches!(
            ordering_report(&m, &c),
            Err(Error::Precondition(_))
        ));
    }
}
