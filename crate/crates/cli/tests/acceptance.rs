//! End-to-end acceptance checks. Each check prints one PASS/FAIL line with
//! its measurements and wall time; the process fails if any check fails.
//! Positional arguments select checks by name substring.

use std::time::{Duration, Instant};

use dcl_cli::commands;
use dcl_cli::{Experiment, ExperimentConfig, Overrides};
use dcl_core::specfun::ode_residuals;
use dcl_core::{
    classical_barrier, gamma, oracle_check, ordering_report, pcf, plan_horizon, solve_b_star,
    strong_convergence_check, ControlParams, FunctionalKind, KSize, ModelParams,
    PathFunctionalSpec, Preset, Regime, Scheme, SimConfig, ValueFunctionRep,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome, Duration);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn preset(p: Preset) -> (ModelParams, ControlParams) {
    (p.model(), p.control())
}

fn special_functions() -> Outcome {
    let mut worst_pcf: f64 = 0.0;
    for i in 0..=1000 {
        let x = -5.0 + 0.01 * i as f64;
        let want = (x * x / 4.0).exp()
            * (2.0 * std::f64::consts::PI).sqrt()
            * 0.5
            * libm::erfc(x / std::f64::consts::SQRT_2);
        let got = pcf(1.0, x).map_err(|e| e.to_string())?;
        worst_pcf = worst_pcf.max((got - want).abs() / want);
    }
    ensure(worst_pcf <= 1e-9, || {
        format!("D_-1 relative error {worst_pcf:e}")
    })?;

    // Γ(n) = (n-1)! and Γ(n + 1/2) = (2n)! √π / (4^n n!), in exact arithmetic
    // up to the final rounding
    let mut worst_gamma: f64 = 0.0;
    for i in 1..=20u64 {
        let lambda = 0.5 * i as f64;
        let want = if i % 2 == 0 {
            (1..i / 2).map(|k| k as f64).product::<f64>()
        } else {
            let n = i / 2;
            let ratio: f64 = (n + 1..=2 * n).map(|k| k as f64).product();
            ratio * std::f64::consts::PI.sqrt() / 4f64.powi(n as i32)
        };
        let got = gamma(lambda).map_err(|e| e.to_string())?;
        worst_gamma = worst_gamma.max((got - want).abs() / want);
    }
    ensure(worst_gamma <= 1e-12, || {
        format!("gamma relative error {worst_gamma:e}")
    })?;
    Ok(format!(
        "max rel err: D_-1 {worst_pcf:.1e}, gamma {worst_gamma:.1e}"
    ))
}

fn ode_residual_grids() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let mut sets = Vec::new();
    for _ in 0..3 {
        let m = ModelParams::new(rng.random_range(0.0..1.0), rng.random_range(0.5..5.0))
            .map_err(|e| e.to_string())?;
        let c = ControlParams::new(rng.random_range(0.01..0.2), rng.random_range(0.01..1.0))
            .map_err(|e| e.to_string())?;
        let top = classical_barrier(&m, &c)
            .map_err(|e| e.to_string())?
            .max(m.mu / c.k)
            + 5.0 * m.sigma;
        for i in 0..1000 {
            let x = top * i as f64 / 999.0;
            let [rw, rh] = ode_residuals(x, &m, &c).map_err(|e| e.to_string())?;
            worst = worst.max(rw).max(rh);
        }
        sets.push(format!(
            "({:.3},{:.3},{:.3},{:.3})",
            m.mu, m.sigma, c.q, c.k
        ));
    }
    ensure(worst <= 1e-8, || format!("worst scaled residual {worst:e}"))?;
    Ok(format!(
        "worst scaled residual {worst:.1e} over (mu,sigma,q,K) = {}",
        sets.join(" ")
    ))
}

fn scaled(gap: f64, reference: f64) -> f64 {
    gap.abs() / reference.abs().max(1.0)
}

fn pasting() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let m = ModelParams::new(rng.random_range(0.01..1.0), rng.random_range(0.5..5.0))
            .map_err(|e| e.to_string())?;
        let c = ControlParams::new(rng.random_range(0.01..0.2), rng.random_range(0.01..1.0))
            .map_err(|e| e.to_string())?;
        let b = rng.random_range(1e-3..3.0) * m.sigma;
        let rep = ValueFunctionRep::new(b, m, c).map_err(|e| e.to_string())?;
        let [d0, d1, _] = rep.pasting_gaps().map_err(|e| e.to_string())?;
        let left = rep.left_at_barrier();
        worst = worst.max(scaled(d0, left.value)).max(scaled(d1, left.d1));
    }
    ensure(worst <= 1e-9, || format!("C0/C1 gap {worst:e}"))?;

    let tol = 1e-7;
    let mut at_opt: f64 = 0.0;
    let mut off_opt = f64::INFINITY;
    for p in [Preset::Fig1Top, Preset::Fig2, Preset::Fig3, Preset::Remark] {
        let (m, c) = preset(p);
        let b_star = solve_b_star(&m, &c).map_err(|e| e.to_string())?.b_star;
        let c2 = |b: f64| -> Result<f64, String> {
            let rep = ValueFunctionRep::new(b, m, c).map_err(|e| e.to_string())?;
            let [_, _, d2] = rep.pasting_gaps().map_err(|e| e.to_string())?;
            Ok(scaled(d2, rep.left_at_barrier().d2))
        };
        at_opt = at_opt.max(c2(b_star)?);
        off_opt = off_opt.min(c2(b_star - 0.25)?).min(c2(b_star + 0.25)?);
    }
    ensure(at_opt <= tol, || format!("C2 gap at b* {at_opt:e}"))?;
    ensure(off_opt >= 10.0 * tol, || {
        format!("C2 gap at b* +- 0.25 only {off_opt:e}")
    })?;
    Ok(format!(
        "C0/C1 worst {worst:.1e} (200 draws); C2 at b* {at_opt:.1e}, at b* +- 0.25 >= {off_opt:.1e}"
    ))
}

fn argmax_barrier(m: ModelParams, c: ControlParams, x0: f64, top: f64) -> Result<f64, String> {
    let mut best = (f64::NEG_INFINITY, 0.0);
    for j in 0..=400 {
        let b = top * j as f64 / 400.0;
        let v = ValueFunctionRep::new(b, m, c)
            .and_then(|r| r.value(x0))
            .map_err(|e| e.to_string())?;
        if v > best.0 {
            best = (v, b);
        }
    }
    Ok(best.1)
}

fn regimes() -> Outcome {
    let (m, c) = preset(Preset::Fig1Top);
    let d = solve_b_star(&m, &c).map_err(|e| e.to_string())?;
    ensure(d.regime == Regime::DelayedAtBStar, || {
        format!("fig1-top regime {:?}", d.regime)
    })?;
    let cell = d.c_star / 400.0;
    let arg = argmax_barrier(m, c, Preset::Fig1Top.x0(), d.c_star)?;
    ensure((arg - d.b_star).abs() <= cell, || {
        format!("argmax {arg} vs b* {} (cell {cell})", d.b_star)
    })?;

    let (m2, c2) = preset(Preset::Fig1Bottom);
    let d2 = solve_b_star(&m2, &c2).map_err(|e| e.to_string())?;
    ensure(d2.regime == Regime::LinearAtZero, || {
        format!("fig1-bottom regime {:?}", d2.regime)
    })?;
    let arg2 = argmax_barrier(m2, c2, Preset::Fig1Bottom.x0(), d2.c_star)?;
    ensure(arg2 == 0.0, || format!("fig1-bottom argmax {arg2}"))?;
    Ok(format!(
        "fig1-top b* = {:.6}, argmax {arg:.6} (cell {cell:.4}); fig1-bottom mu K/q^2 = {:.2} <= Delta = {:.4}, argmax 0",
        d.b_star, d2.threshold, d2.delta
    ))
}

fn large_k_ordering() -> Outcome {
    let (m, c) = preset(Preset::Remark);
    let r = ordering_report(&m, &c).map_err(|e| e.to_string())?;
    ensure(r.size == KSize::LargeK, || format!("size {:?}", r.size))?;
    ensure(
        r.mu_over_k < r.b_star && r.b_star < r.c_star && r.c_star < r.mu_over_q,
        || format!("{r:?}"),
    )?;
    ensure(!r.predicts_below_mu_over_k, || {
        "criterion predicts b* < mu/K".into()
    })?;
    Ok(format!(
        "mu/K = {:.4} < b* = {:.4} < c* = {:.4} < mu/q = {:.4}",
        r.mu_over_k, r.b_star, r.c_star, r.mu_over_q
    ))
}

fn barrier_vs_k() -> Outcome {
    let cfg = ExperimentConfig::resolve(
        Experiment::BarrierCurve,
        Overrides {
            preset: Some("fig3".into()),
            grid_k_count: Some(40),
            grid_k_max: Some(1e3),
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let table = commands::barrier_curve(&cfg).map_err(|e| e.to_string())?;
    let (c_row, rows) = table.rows.split_last().ok_or("empty table")?;
    let c_star = c_row.values[1].ok_or("no c* value")?;
    let bs: Vec<f64> = rows
        .iter()
        .map(|r| r.values[1].unwrap_or(f64::NAN))
        .collect();
    ensure(bs.len() == 40, || format!("{} rows", bs.len()))?;
    ensure((c_star - 4.197).abs() < 5e-4, || format!("c* = {c_star}"))?;
    ensure(bs.windows(2).all(|w| w[0] <= w[1]), || {
        format!("not monotone: {bs:?}")
    })?;
    ensure(bs.iter().all(|&b| b <= c_star), || "b* above c*".into())?;
    let last = *bs.last().unwrap();
    ensure(last >= 0.95 * c_star, || {
        format!("b*(1e3) = {last} < 0.95 c*")
    })?;
    let zeros = bs.iter().take_while(|&&b| b == 0.0).count();
    Ok(format!(
        "40 K values, {zeros} with b* = 0, b*(1e3) = {last:.5} = {:.4} c*, c* = {c_star:.5}",
        last / c_star
    ))
}

fn monte_carlo_oracles() -> Outcome {
    let (paths, step, seed) = (200_000u64, 1e-3, 42u64);
    let sigma_p = ModelParams::new(0.3, 4.5).map_err(|e| e.to_string())?;
    let ou = ControlParams::new(0.05, 0.1).map_err(|e| e.to_string())?;
    let (m1, c1) = preset(Preset::Fig1Top);
    let b_star = solve_b_star(&m1, &c1).map_err(|e| e.to_string())?.b_star;
    let cases = [
        (
            "two-sided exit",
            sigma_p,
            ou,
            FunctionalKind::TwoSidedExit { a: 5.0 },
            2.0,
        ),
        (
            "OU first passage",
            sigma_p,
            ou,
            FunctionalKind::FirstPassageLaplace { a: 1.0 },
            4.6,
        ),
        (
            "linear OU",
            sigma_p,
            ou,
            FunctionalKind::DiscountedLinearOU,
            3.0,
        ),
        (
            "dividends at b*",
            m1,
            c1,
            FunctionalKind::DiscountedDividends { b: b_star },
            4.6,
        ),
    ];
    let mut lines = Vec::new();
    let mut failed = false;
    for (label, m, c, kind, x0) in cases {
        let spec = PathFunctionalSpec::new(kind, x0);
        let scheme = Scheme::EulerMaruyama;
        let horizon =
            plan_horizon(&m, &c, &spec, step, paths, seed, scheme).map_err(|e| e.to_string())?;
        let cfg = SimConfig::new(step, horizon, paths, seed, scheme);
        let oc = oracle_check(&m, &c, &spec, &cfg, 3.0).map_err(|e| e.to_string())?;
        failed |= !oc.pass;
        lines.push(format!(
            "{label}: target {:.6} mean {:.6} se {:.2e} z {:+.2}{} T {:.0}",
            oc.target,
            oc.estimate.mean,
            oc.estimate.std_error.unwrap_or(f64::NAN),
            oc.z.unwrap_or(f64::NAN),
            if oc.retried { " (retried)" } else { "" },
            horizon
        ));
    }
    let detail = lines.join("; ");
    if failed {
        Err(detail)
    } else {
        Ok(detail)
    }
}

fn hjb_verify() -> Outcome {
    let resolve = |b: Option<f64>| {
        ExperimentConfig::resolve(
            Experiment::Verify,
            Overrides {
                preset: Some("fig1-top".into()),
                b,
                ..Default::default()
            },
        )
        .map_err(|e| e.to_string())
    };
    let at = commands::verify(&resolve(None)?).map_err(|e| e.to_string())?;
    let failing: Vec<_> = at
        .checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.name.clone())
        .collect();
    ensure(at.pass, || format!("at b* failing: {failing:?}"))?;
    let off = commands::verify(&resolve(Some(at.b_star + 0.5))?).map_err(|e| e.to_string())?;
    let gradient = off.check("hjb-gradient").ok_or("no gradient check")?;
    ensure(!gradient.pass && !off.pass, || {
        "b* + 0.5 passes the gradient check".into()
    })?;
    Ok(format!(
        "b* = {:.6}: {} checks pass; b* + 0.5: {} gradient violations from x = {:.4}",
        at.b_star,
        at.checks.len(),
        off.hjb.gradient_violations,
        off.hjb.first_violation.unwrap_or(f64::NAN)
    ))
}

fn strong_convergence() -> Outcome {
    let (m, c) = preset(Preset::Fig1Top);
    let b = solve_b_star(&m, &c).map_err(|e| e.to_string())?.b_star;
    let meshes = [0.1, 0.05, 0.025, 0.0125];
    let rows = strong_convergence_check(
        &m,
        &c,
        b,
        Preset::Fig1Top.x0(),
        10.0,
        &meshes,
        10_000,
        99,
        Scheme::PiecewiseNoise,
        8,
    )
    .map_err(|e| e.to_string())?;
    let detail = rows
        .iter()
        .map(|r| {
            format!(
                "h={}: {:.4e} (se {:.1e})",
                r.mesh,
                r.mean_sup_distance,
                r.std_error.unwrap_or(f64::NAN)
            )
        })
        .collect::<Vec<_>>()
        .join(", ");
    ensure(
        rows.windows(2)
            .all(|w| w[1].mean_sup_distance < w[0].mean_sup_distance),
        || format!("not strictly decreasing: {detail}"),
    )?;
    Ok(detail)
}

fn main() {
    let checks: [Check; 9] = [
        (
            "special-functions",
            special_functions,
            Duration::from_secs(1),
        ),
        ("ode-residuals", ode_residual_grids, Duration::from_secs(5)),
        ("pasting", pasting, Duration::from_secs(5)),
        ("regimes", regimes, Duration::from_secs(30)),
        ("large-k-ordering", large_k_ordering, Duration::from_secs(5)),
        ("barrier-vs-k", barrier_vs_k, Duration::from_secs(60)),
        (
            "monte-carlo-oracles",
            monte_carlo_oracles,
            Duration::from_secs(600),
        ),
        ("hjb-verify", hjb_verify, Duration::from_secs(10)),
        (
            "strong-convergence",
            strong_convergence,
            Duration::from_secs(120),
        ),
    ];
    let filters: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failures = 0;
    for (i, (name, check, budget)) in checks.into_iter().enumerate() {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let (pass, detail) = match outcome {
            Ok(d) if elapsed <= budget => (true, d),
            Ok(d) => (false, format!("{d}; over the {budget:?} budget")),
            Err(d) => (false, d),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "[{}/9] {:<20} {} ({:.2} s) {}",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            detail
        );
    }
    if failures > 0 {
        println!("acceptance: {failures} failed");
        std::process::exit(1);
    }
    println!("acceptance: all passed");
}
