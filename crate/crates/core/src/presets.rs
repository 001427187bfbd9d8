//! Named parameter sets for the reproduction experiments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ControlParams, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    /// Interior optimal barrier: μ=0.3, σ=4.5, K=0.1, q=0.025, x0=4.60.
    Fig1Top,
    /// Linear strategy optimal: μ=0.3, σ=4.5, K=0.1, q=0.05, x0=4.60.
    Fig1Bottom,
    /// Value surface over (b, K): μ=0.3, σ=2.5, q=0.07, x0=1.
    Fig2,
    /// b*(K) curve: μ=0.3, σ=4.5, q=0.07, x0=1.
    Fig3,
    /// μ/K < b* < c* < μ/q: μ=0.3, σ=4.5, q=0.05, K=0.35.
    Remark,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::Fig1Top,
        Preset::Fig1Bottom,
        Preset::Fig2,
        Preset::Fig3,
        Preset::Remark,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig1Top => "fig1-top",
            Preset::Fig1Bottom => "fig1-bottom",
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Remark => "remark",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Preset::ALL
            .iter()
            .copied()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown preset '{name}'")))
    }

    pub fn model(&self) -> ModelParams {
        let sigma = match self {
            Preset::Fig2 => 2.5,
            _ => 4.5,
        };
        ModelParams { mu: 0.3, sigma }
    }

    /// Control parameters. For the K-sweep presets `k` is a representative
    /// point inside the default sweep range.
    pub fn control(&self) -> ControlParams {
        let (q, k) = match self {
            Preset::Fig1Top => (0.025, 0.1),
            Preset::Fig1Bottom => (0.05, 0.1),
            Preset::Fig2 => (0.07, 0.5),
            Preset::Fig3 => (0.07, 1.0),
            Preset::Remark => (0.05, 0.35),
        };
        ControlParams { q, k }
    }

    pub fn x0(&self) -> f64 {
        match self {
            Preset::Fig1Top | Preset::Fig1Bottom | Preset::Remark => 4.60,
            Preset::Fig2 | Preset::Fig3 => 1.0,
        }
    }

    /// Default `[K_min, K_max]` for the K sweeps.
    pub fn k_range(&self) -> (f64, f64) {
        match self {
            Preset::Fig2 => (0.01, 2.0),
            Preset::Fig3 => (0.01, 1000.0),
            _ => {
                let k = self.control().k;
                (k, k)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(Preset::from_name(p.name()).unwrap(), p);
        }
        assert!(Preset::from_name("fig4").is_err());
    }
}
