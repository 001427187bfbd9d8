//! Coupled-mesh strong convergence diagnostics.
//!
//! All meshes of one sample share a single Brownian path drawn on a
//! reference grid; coarser increments are sums of reference increments.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{dynamics_for, normal, path_rng, stats, Scheme};
use crate::error::{Error, Result};
use crate::model::{ControlParams, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub mesh: f64,
    /// Mean over samples of `sup_t |U^mesh_t - U^ref_t|`.
    pub mean_sup_distance: f64,
    pub std_error: Option<f64>,
}

fn ratio(mesh: f64, h_ref: f64) -> Result<usize> {
    let r = mesh / h_ref;
    let ri = r.round();
    if ri < 1.0 || (r - ri).abs() > 1e-9 * r {
        return Err(Error::Config(format!(
            "mesh {mesh} is not a multiple of the reference step {h_ref}"
        )));
    }
    Ok(ri as usize)
}

/// Mean sup-distance between each mesh in `meshes` and a reference path on
/// the mesh `min(meshes) / refinement`, all driven by the same Brownian
/// path. The sup runs over every reference grid time, with the coarse path
/// evaluated inside its cells by the scheme's own interpolant.
#[allow(clippy::too_many_arguments)]
pub fn strong_convergence_check(
    m: &ModelParams,
    c: &ControlParams,
    b: f64,
    x0: f64,
    horizon: f64,
    meshes: &[f64],
    paths: u64,
    seed: u64,
    scheme: Scheme,
    refinement: u32,
) -> Result<Vec<ConvergenceRow>> {
    m.validate()?;
    c.validate_allow_zero_k()?;
    if meshes.is_empty() || paths == 0 || refinement == 0 {
        return Err(Error::Config(
            "need at least one mesh, path and refinement".into(),
        ));
    }
    if meshes.windows(2).any(|w| w[1] >= w[0]) || meshes.iter().any(|&h| !(h > 0.0)) {
        return Err(Error::Config(
            "meshes must be positive and strictly decreasing".into(),
        ));
    }
    let h_ref = meshes[meshes.len() - 1] / refinement as f64;
    let n_ref = ratio(horizon, h_ref)?;
    let ratios: Vec<usize> = meshes
        .iter()
        .map(|&h| ratio(h, h_ref))
        .collect::<Result<_>>()?;
    if ratios.iter().any(|r| n_ref % r != 0) {
        return Err(Error::Config(
            "horizon must be a multiple of every mesh".into(),
        ));
    }
    let dy = dynamics_for(m, c, b);
    let sigma = m.sigma;

    let per_path: Vec<Vec<f64>> = (0..paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(seed, i);
            let sqrt_h = h_ref.sqrt();
            let dw: Vec<f64> = (0..n_ref).map(|_| sqrt_h * normal(&mut rng)).collect();
            let mut reference = Vec::with_capacity(n_ref + 1);
            let mut u = x0;
            reference.push(u);
            for d in &dw {
                u = dy.advance_drift(scheme, u, h_ref) + sigma * d;
                reference.push(u);
            }
            ratios
                .iter()
                .zip(meshes)
                .map(|(&r, &h)| {
                    let mut u = x0;
                    let mut sup = 0.0f64;
                    for cell in 0..n_ref / r {
                        let base = cell * r;
                        let inc: f64 = dw[base..base + r].iter().sum();
                        for j in 0..r {
                            let v = dy.interpolate(scheme, u, inc, h, j as f64 * h_ref);
                            sup = sup.max((v - reference[base + j]).abs());
                        }
                        u = dy.advance_drift(scheme, u, h) + sigma * inc;
                    }
                    sup.max((u - reference[n_ref]).abs())
                })
                .collect()
        })
        .collect();

    Ok(meshes
        .iter()
        .enumerate()
        .map(|(j, &mesh)| {
            let col: Vec<f64> = per_path.iter().map(|row| row[j]).collect();
            let (mean, se) = stats::mean_and_se(&col);
            ConvergenceRow {
                mesh,
                mean_sup_distance: mean,
                std_error: se,
            }
        })
        .collect())
}

/// Mean over samples of the largest grid-point gap between the
/// Euler-Maruyama and piecewise-noise paths driven by the same increments.
#[allow(clippy::too_many_arguments)]
pub fn scheme_sup_distance(
    m: &ModelParams,
    c: &ControlParams,
    b: f64,
    x0: f64,
    horizon: f64,
    mesh: f64,
    paths: u64,
    seed: u64,
) -> Result<f64> {
    m.validate()?;
    c.validate_allow_zero_k()?;
    if !(mesh > 0.0) || paths == 0 {
        return Err(Error::Config("mesh must be > 0 and paths >= 1".into()));
    }
    let n = (horizon / mesh).ceil() as usize;
    let dy = dynamics_for(m, c, b);
    let sups: Vec<f64> = (0..paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(seed, i);
            let sqrt_h = mesh.sqrt();
            let (mut em, mut pw) = (x0, x0);
            let mut sup = 0.0f64;
            for _ in 0..n {
                let dw = sqrt_h * normal(&mut rng);
                em = dy.advance_drift(Scheme::EulerMaruyama, em, mesh) + m.sigma * dw;
                pw = dy.advance_drift(Scheme::PiecewiseNoise, pw, mesh) + m.sigma * dw;
                sup = sup.max((em - pw).abs());
            }
            sup
        })
        .collect();
    Ok(stats::pairwise_sum(&sups) / paths as f64)
}
