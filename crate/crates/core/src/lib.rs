//! Delayed linear dividend strategies for a Brownian surplus process.
//!
//! The surplus is a Brownian motion with drift `mu` and volatility `sigma`.
//! Dividends are paid at rate `k * U` whenever the controlled surplus `U`
//! sits above a barrier `b`, and nothing is paid below it. The controlled
//! process is therefore a refracted diffusion: Brownian motion with drift
//! below `b`, Ornstein-Uhlenbeck above it.
//!
//! The crate is split into:
//!
//! * [`specfun`]: gamma, the parabolic cylinder function `D_{-λ}`, the
//!   scale function `W^(q)` and the OU fundamental solution `H^(q)_K`.
//! * [`valuation`]: closed-form value function `v_b` and the HJB residual
//!   checker.
//! * [`optimizer`]: regime classification and the optimal barrier `b*`.
//! * [`simulator`]: Monte Carlo engine used as an independent oracle.
//! * [`presets`]: the named parameter sets used by the experiments.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod model;
pub mod optimizer;
pub mod presets;
pub mod simulator;
pub mod specfun;
pub mod valuation;

pub use error::{Error, Result};
pub use model::{ControlParams, ModelParams};
pub use optimizer::{
    classical_barrier, delta_threshold, ordering_report, solve_b_star, KSize, OrderingReport,
    Regime, RegimeDecision,
};
pub use presets::Preset;
pub use simulator::{
    closed_form_target, estimate, oracle_check, plan_horizon, scheme_sup_distance, simulate_path,
    strong_convergence_check, ConvergenceRow, FunctionalKind, McEstimate, OracleCheck, Path,
    PathFunctionalSpec, Scheme, SimConfig, StopRule,
};
pub use specfun::{gamma, h_func, ln_gamma, pcf, w_scale, ScaleEval};
pub use valuation::{coefficients, hjb_check, HjbReport, ValueFunctionRep};
