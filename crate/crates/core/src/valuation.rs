//! Value function of a delayed linear strategy and the HJB residual checker.
//!
//! For a barrier `b >= 0`,
//!
//! ```text
//! v_b(x) = K/(q+K) · C_b · W(x)                    0 <= x <= b
//! v_b(x) = K/(q+K) · (x + μ/q + D_b · H(x))        x > b
//! ```
//!
//! with `C_b`, `D_b` fixed by continuity and smooth pasting at `b`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ControlParams, ModelParams};
use crate::specfun::{h_func, w_scale, ScaleEval};

/// Slack allowed on the gradient conditions `v' >= 1` / `v' <= 1`.
pub const GRADIENT_TOL: f64 = 1e-9;

/// `(C_b, D_b)` for barrier `b`.
pub fn coefficients(b: f64, m: &ModelParams, c: &ControlParams) -> Result<(f64, f64)> {
    if !(b >= 0.0) || !b.is_finite() {
        return Err(Error::Domain(format!("barrier must be >= 0, got {b}")));
    }
    m.validate()?;
    c.validate()?;
    let w = w_scale(b, m, c);
    let h = h_func(b, m, c)?;
    let shift = b + m.mu / c.q;
    let den = w.d1 * h.value - w.value * h.d1;
    if den.abs() < 1e-300 || !den.is_finite() {
        return Err(Error::Degenerate(format!("W'H - WH' at b = {b}")));
    }
    let c_b = (h.value - shift * h.d1) / den;
    let d_b = (w.value - shift * w.d1) / den;
    Ok((c_b, d_b))
}

/// Closed-form representation of `v_b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueFunctionRep {
    pub b: f64,
    pub c_b: f64,
    pub d_b: f64,
    pub m: ModelParams,
    pub c: ControlParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Branch {
    Dead,
    Below,
    Above,
}

impl ValueFunctionRep {
    pub fn new(b: f64, m: ModelParams, c: ControlParams) -> Result<Self> {
        let (c_b, d_b) = coefficients(b, &m, &c)?;
        Ok(ValueFunctionRep { b, c_b, d_b, m, c })
    }

    fn weight(&self) -> f64 {
        self.c.k / (self.c.q + self.c.k)
    }

    fn branch(&self, x: f64) -> Branch {
        if x < 0.0 {
            Branch::Dead
        } else if x <= self.b && self.b > 0.0 {
            Branch::Below
        } else {
            Branch::Above
        }
    }

    fn eval_below(&self, x: f64) -> ScaleEval {
        let w = w_scale(x, &self.m, &self.c);
        let a = self.weight() * self.c_b;
        ScaleEval {
            value: a * w.value,
            d1: a * w.d1,
            d2: a * w.d2,
        }
    }

    fn eval_above(&self, x: f64) -> Result<ScaleEval> {
        let h = h_func(x, &self.m, &self.c)?;
        let a = self.weight();
        Ok(ScaleEval {
            value: a * (x + self.m.mu / self.c.q + self.d_b * h.value),
            d1: a * (1.0 + self.d_b * h.d1),
            d2: a * self.d_b * h.d2,
        })
    }

    /// `v_b` with its first two derivatives. Below or at `b` the `W` branch is
    /// used, so at `x = b` the result is the left limit.
    pub fn eval(&self, x: f64) -> Result<ScaleEval> {
        match self.branch(x) {
            Branch::Dead => Ok(ScaleEval {
                value: 0.0,
                d1: 0.0,
                d2: 0.0,
            }),
            Branch::Below => Ok(self.eval_below(x)),
            Branch::Above => self.eval_above(x),
        }
    }

    /// `v_b(x)`; zero for `x <= 0`.
    pub fn value(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        Ok(self.eval(x)?.value)
    }

    pub fn value_d1(&self, x: f64) -> Result<f64> {
        Ok(self.eval(x)?.d1)
    }

    pub fn value_d2(&self, x: f64) -> Result<f64> {
        Ok(self.eval(x)?.d2)
    }

    /// Left limit at the barrier (`W` branch).
    pub fn left_at_barrier(&self) -> ScaleEval {
        self.eval_below(self.b)
    }

    /// Right limit at the barrier (`H` branch).
    pub fn right_at_barrier(&self) -> Result<ScaleEval> {
        self.eval_above(self.b)
    }

    pub fn value_d1_left(&self) -> f64 {
        self.left_at_barrier().d1
    }

    pub fn value_d1_right(&self) -> Result<f64> {
        Ok(self.right_at_barrier()?.d1)
    }

    /// Jumps `(v, v', v'')` across the barrier, right minus left.
    pub fn pasting_gaps(&self) -> Result<[f64; 3]> {
        let l = self.left_at_barrier();
        let r = self.right_at_barrier()?;
        Ok([r.value - l.value, r.d1 - l.d1, r.d2 - l.d2])
    }
}

/// `v_b(x)` for a single barrier, building the representation on the fly.
pub fn value(x: f64, rep: &ValueFunctionRep) -> Result<f64> {
    rep.value(x)
}

/// HJB residuals and gradient conditions of `v_b` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HjbReport {
    pub grid: Vec<f64>,
    /// Residual scaled by `1 + |q v(x)|`.
    pub residual: Vec<f64>,
    /// `v' >= 1` at or below the barrier, `v' <= 1` above it.
    pub gradient_ok: Vec<bool>,
    pub max_abs_residual: f64,
}

impl HjbReport {
    pub fn all_gradients_ok(&self) -> bool {
        self.gradient_ok.iter().all(|&g| g)
    }
}

/// Evaluates the generator of the refracted diffusion on `v_b`:
///
/// * `x <= b`: `σ²/2 v'' + μ v' - q v`
/// * `x > b`: `σ²/2 v'' + (μ - K x) v' - q v + K x`
pub fn hjb_check(rep: &ValueFunctionRep, grid: &[f64]) -> Result<HjbReport> {
    if grid.is_empty() {
        return Err(Error::Precondition("empty grid".into()));
    }
    if grid.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::Precondition("grid points must be > 0".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition(
            "grid must be strictly increasing".into(),
        ));
    }
    let half_s2 = 0.5 * rep.m.sigma2();
    let (mu, q, k) = (rep.m.mu, rep.c.q, rep.c.k);
    let mut residual = Vec::with_capacity(grid.len());
    let mut gradient_ok = Vec::with_capacity(grid.len());
    for &x in grid {
        let v = rep.eval(x)?;
        let (raw, ok) = if x <= rep.b {
            (
                half_s2 * v.d2 + mu * v.d1 - q * v.value,
                v.d1 >= 1.0 - GRADIENT_TOL,
            )
        } else {
            (
                half_s2 * v.d2 + (mu - k * x) * v.d1 - q * v.value + k * x,
                v.d1 <= 1.0 + GRADIENT_TOL,
            )
        };
        residual.push(raw / (1.0 + (q * v.value).abs()));
        gradient_ok.push(ok);
    }
    let max_abs_residual = residual.iter().fold(0.0f64, |a, r| a.max(r.abs()));
    Ok(HjbReport {
        grid: grid.to_vec(),
        residual,
        gradient_ok,
        max_abs_residual,
    })
}
