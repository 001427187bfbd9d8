use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uncontrolled surplus `dX = mu dt + sigma dB`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub mu: f64,
    pub sigma: f64,
}

impl ModelParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        let m = ModelParams { mu, sigma };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() {
            return Err(Error::Domain(format!("mu must be finite, got {}", self.mu)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Domain(format!(
                "sigma must be > 0, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma * self.sigma
    }
}

/// Discount rate `q` and maximal linear rate factor `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlParams {
    pub q: f64,
    pub k: f64,
}

impl ControlParams {
    /// Both `q > 0` and `k > 0`.
    pub fn new(q: f64, k: f64) -> Result<Self> {
        let c = ControlParams { q, k };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q > 0.0 && self.q.is_finite()) {
            return Err(Error::Domain(format!("q must be > 0, got {}", self.q)));
        }
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::Domain(format!("k must be > 0, got {}", self.k)));
        }
        Ok(())
    }

    /// Like [`validate`](Self::validate) but also accepts `k = 0`, which the
    /// simulator treats as the plain Brownian motion with drift.
    pub fn validate_allow_zero_k(&self) -> Result<()> {
        if !(self.q > 0.0 && self.q.is_finite()) {
            return Err(Error::Domain(format!("q must be > 0, got {}", self.q)));
        }
        if !(self.k >= 0.0 && self.k.is_finite()) {
            return Err(Error::Domain(format!("k must be >= 0, got {}", self.k)));
        }
        Ok(())
    }

    /// Order `q / k` of the parabolic cylinder function behind `H^(q)_K`.
    pub fn lambda(&self) -> f64 {
        self.q / self.k
    }

    /// Same `k`, discount rate shifted to `q + n k`.
    pub fn shifted(&self, n: u32) -> ControlParams {
        ControlParams {
            q: self.q + n as f64 * self.k,
            k: self.k,
        }
    }
}
