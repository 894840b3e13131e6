use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use mums_core::analytics;
use mums_core::ensemble::{self, ArmaIllustration};
use mums_core::markov;
use mums_core::nk::{self, NkParams};
use mums_core::oracle;
use mums_core::{ModelSpec, ShockImpulse, SolverOptions};

fn univariate() -> ModelSpec {
    ModelSpec {
        n_controls: 1,
        control_names: vec!["y".into()],
        a0: vec![vec![1.0]],
        a1: vec![vec![0.5]],
        b0: vec![0.2],
        b1: vec![0.0],
        c0: vec![1.0],
        d0: vec![0.3],
        rho: 0.5,
        e: 0.0,
        p: 0.7,
    }
}

fn solvers(c: &mut Criterion) {
    let opts = SolverOptions::default();
    let nk_model = nk::build_model(&NkParams::default()).unwrap();
    let mut group = c.benchmark_group("solve");
    for (name, model) in [("univariate", univariate()), ("nk_habits", nk_model)] {
        group.bench_with_input(BenchmarkId::new("markov", name), &model, |b, m| {
            b.iter(|| markov::solve(black_box(m), ShockImpulse::unit(), &opts).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("state_space", name), &model, |b, m| {
            b.iter(|| oracle::solve_msv(black_box(m), &opts).unwrap())
        });
    }
    group.bench_function("nk_specialized", |b| {
        b.iter(|| nk::solve_specialized(black_box(&NkParams::default())).unwrap())
    });
    group.finish();
}

fn paths(c: &mut Criterion) {
    let opts = SolverOptions::default();
    let model = univariate();
    let (sol, _) = markov::solve(&model, ShockImpulse::unit(), &opts).unwrap();
    let ss = oracle::solve_msv(&model, &opts).unwrap();
    let mut group = c.benchmark_group("irf_200");
    group.bench_function("closed_form", |b| {
        b.iter(|| analytics::irf(black_box(&sol), 200))
    });
    group.bench_function("state_space", |b| {
        b.iter(|| oracle::iterate_irf(black_box(&ss), 200, ShockImpulse::unit()))
    });
    group.finish();
}

fn ensembles(c: &mut Criterion) {
    let mut group = c.benchmark_group("ensemble");
    group.sample_size(10);
    for runs in [1_000, ensemble::DEFAULT_RUNS] {
        let config = ArmaIllustration::default().chain(runs, 40, 1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(runs), &config, |b, cfg| {
            b.iter(|| ensemble::ensemble_average(black_box(cfg)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, solvers, paths, ensembles);
criterion_main!(benches);
