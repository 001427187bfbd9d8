//! Special functions: gamma, parabolic cylinder `D_{-λ}`, and the two
//! fundamental solutions `W^(q)` and `H^(q)_K` with their derivatives.
//!
//! Derivatives are always produced from recurrences or from the ODE each
//! function solves, never from finite differences.

mod gamma;
mod pcf;
pub mod quadrature;
mod scale;

pub use gamma::{gamma, ln_gamma};
pub use pcf::{ln_pcf_integral, ln_scaled_pcf, pcf, MAX_ORDER};
pub(crate) use scale::root_delta;
pub use scale::{h_func, h_ratio, ln_h, ode_residuals, w_ratio, w_scale, ScaleEval};
