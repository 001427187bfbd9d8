//! One-step maps for the refracted diffusion
//! `dU = (μ - K U 1{U > b}) dt + σ dB`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// `U + (μ - K U 1{U > b}) h + σ ΔB`.
    EulerMaruyama,
    /// Noise frozen over each cell: the drift ODE is solved exactly inside
    /// the cell and the Brownian increment is added at its right end.
    PiecewiseNoise,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::EulerMaruyama => "euler-maruyama",
            Scheme::PiecewiseNoise => "piecewise-noise",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dynamics {
    pub mu: f64,
    pub sigma: f64,
    pub k: f64,
    /// Refraction level; `-inf` gives a plain OU process.
    pub b: f64,
}

impl Dynamics {
    #[inline]
    pub fn drift(&self, u: f64) -> f64 {
        if u > self.b {
            self.mu - self.k * u
        } else {
            self.mu
        }
    }

    /// Dividend rate `K U 1{U > b}`.
    #[inline]
    pub fn rate(&self, u: f64) -> f64 {
        if u > self.b {
            self.k * u
        } else {
            0.0
        }
    }

    /// Exact solution of `du/dt = μ - K u 1{u > b}` after time `t`.
    ///
    /// When the flow reaches `b` with opposing drifts on either side
    /// (`μ > 0 > μ - K b`) it stays at `b`, paying out at rate `μ`.
    pub fn flow(&self, u: f64, t: f64) -> f64 {
        let (mu, k, b) = (self.mu, self.k, self.b);
        if k == 0.0 {
            return u + mu * t;
        }
        let level = mu / k;
        if u > b {
            let ou = level + (u - level) * (-k * t).exp();
            if level >= b || ou > b {
                return ou;
            }
            // crosses b at t_c < t
            let t_c = ((u - level) / (b - level)).ln() / k;
            let rest = t - t_c;
            if mu > 0.0 {
                b
            } else {
                b + mu * rest
            }
        } else {
            if mu <= 0.0 {
                return u + mu * t;
            }
            let t_c = (b - u) / mu;
            if t_c >= t {
                return u + mu * t;
            }
            let rest = t - t_c;
            if level > b {
                level + (b - level) * (-k * rest).exp()
            } else {
                b
            }
        }
    }

    /// State at the end of a cell before the noise is added.
    #[inline]
    pub fn advance_drift(&self, scheme: Scheme, u: f64, h: f64) -> f64 {
        match scheme {
            Scheme::EulerMaruyama => u + self.drift(u) * h,
            Scheme::PiecewiseNoise => self.flow(u, h),
        }
    }

    /// State inside a cell at offset `t` from its left end `u`, before the
    /// cell's noise is added (linear interpolation for Euler-Maruyama).
    pub fn interpolate(&self, scheme: Scheme, u: f64, dw: f64, h: f64, t: f64) -> f64 {
        match scheme {
            Scheme::EulerMaruyama => u + (self.drift(u) * h + self.sigma * dw) * (t / h),
            Scheme::PiecewiseNoise => self.flow(u, t),
        }
    }
}

/// Probability that a Brownian bridge with variance `sigma2_h` between `u0`
/// and `u1`, both strictly on one side of `level`, touches `level`.
#[inline]
pub(crate) fn bridge_hit_probability(u0: f64, u1: f64, level: f64, sigma2_h: f64) -> f64 {
    let a = (u0 - level) * (u1 - level);
    if a <= 0.0 {
        return 1.0;
    }
    let e = 2.0 * a / sigma2_h;
    if e > 45.0 {
        0.0
    } else {
        (-e).exp()
    }
}
