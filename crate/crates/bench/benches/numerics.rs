use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dcl_core::{
    estimate, h_func, pcf, solve_b_star, w_scale, FunctionalKind, PathFunctionalSpec, Preset,
    Scheme, SimConfig, ValueFunctionRep,
};

fn special_functions(c: &mut Criterion) {
    let mut group = c.benchmark_group("pcf");
    for lambda in [0.25, 1.0, 10.0, 1000.0] {
        group.bench_with_input(BenchmarkId::from_parameter(lambda), &lambda, |b, &l| {
            b.iter(|| pcf(black_box(l), black_box(1.3)))
        });
    }
    group.finish();

    let (m, k) = (Preset::Fig1Top.model(), Preset::Fig1Top.control());
    c.bench_function("w_scale", |b| b.iter(|| w_scale(black_box(4.6), &m, &k)));
    c.bench_function("h_func", |b| b.iter(|| h_func(black_box(4.6), &m, &k)));
}

fn optimizer(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_b_star");
    for p in [Preset::Fig1Top, Preset::Fig1Bottom, Preset::Fig3] {
        let (m, k) = (p.model(), p.control());
        group.bench_function(p.name(), |b| b.iter(|| solve_b_star(black_box(&m), &k)));
    }
    group.finish();

    let (m, k) = (Preset::Fig1Top.model(), Preset::Fig1Top.control());
    c.bench_function("value_curve_401", |b| {
        b.iter(|| {
            (0..=400)
                .map(|j| {
                    let bar = 11.3 * j as f64 / 400.0;
                    ValueFunctionRep::new(bar, m, k)
                        .and_then(|r| r.value(4.6))
                        .unwrap()
                })
                .sum::<f64>()
        })
    });
}

fn simulator(c: &mut Criterion) {
    let (m, k) = (Preset::Fig1Top.model(), Preset::Fig1Top.control());
    let b = solve_b_star(&m, &k).unwrap().b_star;
    let spec = PathFunctionalSpec::new(FunctionalKind::DiscountedDividends { b }, 4.6);
    let mut group = c.benchmark_group("estimate_200_paths");
    group.sample_size(10);
    for scheme in [Scheme::EulerMaruyama, Scheme::PiecewiseNoise] {
        let cfg = SimConfig::new(1e-2, 50.0, 200, 1, scheme);
        group.bench_function(scheme.name(), |bch| {
            bch.iter(|| estimate(&m, &k, &spec, black_box(&cfg)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, special_functions, optimizer, simulator);
criterion_main!(benches);
