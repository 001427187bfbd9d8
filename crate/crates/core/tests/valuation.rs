use dcl_core::valuation::value;
use dcl_core::{
    coefficients, h_func, hjb_check, solve_b_star, w_scale, ControlParams, ModelParams, Preset,
    ValueFunctionRep,
};
use proptest::prelude::*;

fn fig1_top() -> (ModelParams, ControlParams) {
    (Preset::Fig1Top.model(), Preset::Fig1Top.control())
}

fn scaled(gap: f64, reference: f64) -> f64 {
    gap.abs() / (1.0 + reference.abs())
}

fn c2_gap(rep: &ValueFunctionRep) -> f64 {
    let [_, _, d2] = rep.pasting_gaps().unwrap();
    scaled(d2, rep.left_at_barrier().d2)
}

#[test]
fn zero_barrier_has_no_lower_branch() {
    let (m, c) = fig1_top();
    let (_, d0) = coefficients(0.0, &m, &c).unwrap();
    let h0 = h_func(0.0, &m, &c).unwrap().value;
    // v_0(0) = 0
    assert!((m.mu / c.q + d0 * h0).abs() < 1e-12);
    let rep = ValueFunctionRep::new(0.0, m, c).unwrap();
    assert_eq!(rep.value(0.0).unwrap(), 0.0);
    assert!(rep.value(1.0).unwrap() > 0.0);
}

#[test]
fn coefficients_simplify_at_optimal_barrier() {
    let (m, c) = fig1_top();
    let b = solve_b_star(&m, &c).unwrap().b_star;
    let (cb, db) = coefficients(b, &m, &c).unwrap();
    let w1 = w_scale(b, &m, &c).d1;
    let h1 = h_func(b, &m, &c).unwrap().d1;
    assert!((cb - (c.q + c.k) / c.k / w1).abs() < 1e-7 * cb.abs());
    assert!((db - c.q / c.k / h1).abs() < 1e-7 * db.abs());
}

#[test]
fn smooth_fit_only_at_optimal_barrier() {
    let (m, c) = fig1_top();
    let b = solve_b_star(&m, &c).unwrap().b_star;
    let at = c2_gap(&ValueFunctionRep::new(b, m, c).unwrap());
    assert!(at <= 1e-7, "gap at b* = {at}");
    for off in [-0.25, 0.25] {
        let gap = c2_gap(&ValueFunctionRep::new(b + off, m, c).unwrap());
        assert!(gap >= 1e-6, "gap at b*{off:+} = {gap}");
    }
}

#[test]
fn value_is_increasing_and_positive() {
    let (m, c) = fig1_top();
    let b = solve_b_star(&m, &c).unwrap().b_star;
    let rep = ValueFunctionRep::new(b, m, c).unwrap();
    let mut prev = 0.0;
    for i in 1..=300 {
        let x = 0.1 * i as f64;
        let v = value(x, &rep).unwrap();
        assert!(v > prev);
        assert!(rep.value_d1(x).unwrap() > 0.0);
        prev = v;
    }
}

#[test]
fn optimal_barrier_dominates_grid() {
    let (m, c) = fig1_top();
    let b_star = solve_b_star(&m, &c).unwrap().b_star;
    let best = ValueFunctionRep::new(b_star, m, c).unwrap();
    for j in 0..=40 {
        let rep = ValueFunctionRep::new(0.3 * j as f64, m, c).unwrap();
        for &x in &[0.5, 2.0, 4.6, 8.0, 15.0] {
            assert!(rep.value(x).unwrap() <= best.value(x).unwrap() + 1e-10);
        }
    }
}

#[test]
fn hjb_holds_at_optimum_and_fails_above() {
    let (m, c) = fig1_top();
    let b = solve_b_star(&m, &c).unwrap().b_star;
    let grid: Vec<f64> = (1..=600).map(|i| 0.05 * i as f64).collect();
    let good = hjb_check(&ValueFunctionRep::new(b, m, c).unwrap(), &grid).unwrap();
    assert!(good.max_abs_residual < 1e-8);
    assert!(good.all_gradients_ok());
    let bad = hjb_check(&ValueFunctionRep::new(b + 0.5, m, c).unwrap(), &grid).unwrap();
    assert!(bad.max_abs_residual < 1e-8);
    assert!(!bad.all_gradients_ok());
}

#[test]
fn linear_regime_value_satisfies_hjb() {
    let (m, c) = (Preset::Fig1Bottom.model(), Preset::Fig1Bottom.control());
    let rep = ValueFunctionRep::new(0.0, m, c).unwrap();
    let grid: Vec<f64> = (1..=400).map(|i| 0.05 * i as f64).collect();
    let report = hjb_check(&rep, &grid).unwrap();
    assert!(report.max_abs_residual < 1e-8);
    assert!(report.all_gradients_ok());
}

#[test]
fn hjb_rejects_bad_grids() {
    let (m, c) = fig1_top();
    let rep = ValueFunctionRep::new(1.0, m, c).unwrap();
    assert!(hjb_check(&rep, &[]).is_err());
    assert!(hjb_check(&rep, &[0.0, 1.0]).is_err());
    assert!(hjb_check(&rep, &[2.0, 1.0]).is_err());
}

fn params() -> impl Strategy<Value = (ModelParams, ControlParams)> {
    (0.01f64..1.0, 0.5f64..5.0, 0.01f64..0.2, 0.01f64..1.0).prop_map(|(mu, sigma, q, k)| {
        (
            ModelParams::new(mu, sigma).unwrap(),
            ControlParams::new(q, k).unwrap(),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn continuous_and_smooth_at_any_barrier((m, c) in params(), frac in 0.001f64..3.0) {
        let b = frac * m.sigma;
        let rep = ValueFunctionRep::new(b, m, c).unwrap();
        let [d0, d1, _] = rep.pasting_gaps().unwrap();
        let left = rep.left_at_barrier();
        prop_assert!(d0.abs() <= 1e-9 * left.value.abs().max(1.0));
        prop_assert!(d1.abs() <= 1e-9 * left.d1.abs().max(1.0));
    }
}
