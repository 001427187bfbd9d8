use serde::{Deserialize, Serialize};

use super::pcf::ln_scaled_pcf;
use crate::error::{Error, Result};
use crate::model::{ControlParams, ModelParams};

/// A function value together with its first and second derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleEval {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// `sqrt(mu² + 2 q sigma²)`.
pub(crate) fn root_delta(m: &ModelParams, q: f64) -> f64 {
    (m.mu * m.mu + 2.0 * q * m.sigma2()).sqrt()
}

/// The `q`-scale function of Brownian motion with drift and its derivatives.
///
/// `W(x) = 0` for `x < 0`. At `x = 0` the right derivatives are returned.
/// The second derivative comes from `W'' = (2/σ²)(q W - μ W')`.
pub fn w_scale(x: f64, m: &ModelParams, c: &ControlParams) -> ScaleEval {
    let s2 = m.sigma2();
    if x < 0.0 {
        return ScaleEval {
            value: 0.0,
            d1: 0.0,
            d2: 0.0,
        };
    }
    let delta = root_delta(m, c.q);
    let up = (delta - m.mu) / s2;
    let down = (delta + m.mu) / s2;
    // (e^{up x} - e^{-down x}) / δ, written to avoid cancellation near 0
    let value = (-down * x).exp() * (2.0 * delta * x / s2).exp_m1() / delta;
    let d1 = (up * (up * x).exp() + down * (-down * x).exp()) / delta;
    let d2 = 2.0 / s2 * (c.q * value - m.mu * d1);
    ScaleEval { value, d1, d2 }
}

/// `W(x) / W'(x)` through the hyperbolic cotangent form; 0 for `x <= 0`.
pub fn w_ratio(x: f64, m: &ModelParams, c: &ControlParams) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let s2 = m.sigma2();
    let delta = root_delta(m, c.q);
    let coth = (x * delta / s2).tanh().recip();
    s2 / (delta * coth - m.mu)
}

fn h_argument(x: f64, m: &ModelParams, c: &ControlParams) -> f64 {
    (x - m.mu / c.k) / m.sigma * (2.0 * c.k).sqrt()
}

/// `ln H^(q)_K(x)`.
pub fn ln_h(x: f64, m: &ModelParams, c: &ControlParams) -> Result<f64> {
    c.validate()?;
    ln_scaled_pcf(c.lambda(), h_argument(x, m, c))
}

/// `H^(q)_K`, the positive decreasing solution of
/// `σ²/2 f'' + (μ - K x) f' - q f = 0`.
///
/// `H' = -(q √(2K) / (K σ)) H^(q+K)_K` and
/// `H'' = (2/σ²)((K x - μ) H' + q H)`.
pub fn h_func(x: f64, m: &ModelParams, c: &ControlParams) -> Result<ScaleEval> {
    c.validate()?;
    let z = h_argument(x, m, c);
    let lambda = c.lambda();
    let value = ln_scaled_pcf(lambda, z)?.exp();
    let d1 = -lambda * (2.0 * c.k).sqrt() / m.sigma * ln_scaled_pcf(lambda + 1.0, z)?.exp();
    let d2 = 2.0 / m.sigma2() * ((c.k * x - m.mu) * d1 + c.q * value);
    Ok(ScaleEval { value, d1, d2 })
}

/// `H(x) / H'(x)`, formed from log values so it stays finite when `H`
/// itself under- or overflows.
pub fn h_ratio(x: f64, m: &ModelParams, c: &ControlParams) -> Result<f64> {
    c.validate()?;
    let z = h_argument(x, m, c);
    let lambda = c.lambda();
    let diff = ln_scaled_pcf(lambda, z)? - ln_scaled_pcf(lambda + 1.0, z)?;
    Ok(-diff.exp() * m.sigma / (lambda * (2.0 * c.k).sqrt()))
}

/// Relative residuals `[r_W, r_H]` of the two ODEs at `x >= 0`, with the
/// second derivatives taken from the explicit exponentials for `W` and from
/// `H'' = -(λ √(2K)/σ) (H^(q+K))'` for `H`. Each residual is divided by the
/// sum of the absolute values of its three terms.
pub fn ode_residuals(x: f64, m: &ModelParams, c: &ControlParams) -> Result<[f64; 2]> {
    c.validate()?;
    if !(x >= 0.0) {
        return Err(Error::Domain(format!(
            "residual point must be >= 0, got {x}"
        )));
    }
    let s2 = m.sigma2();
    let delta = root_delta(m, c.q);
    let up = (delta - m.mu) / s2;
    let down = (delta + m.mu) / s2;
    let w = w_scale(x, m, c);
    let w2 = (up * up * (up * x).exp() - down * down * (-down * x).exp()) / delta;
    let h = h_func(x, m, c)?;
    let slope = c.lambda() * (2.0 * c.k).sqrt() / m.sigma;
    let h2 = -slope * h_func(x, m, &c.shifted(1))?.d1;
    let rel = |terms: [f64; 3]| {
        let scale: f64 = terms.iter().map(|t| t.abs()).sum();
        if scale > 0.0 {
            terms.iter().sum::<f64>().abs() / scale
        } else {
            0.0
        }
    };
    Ok([
        rel([0.5 * s2 * w2, m.mu * w.d1, -c.q * w.value]),
        rel([0.5 * s2 * h2, (m.mu - c.k * x) * h.d1, -c.q * h.value]),
    ])
}
