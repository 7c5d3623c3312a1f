use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use mmnoma_core::montecarlo::simulate_trial;
use mmnoma_core::specfun::{gauss_2f1, Hyp2f1};
use mmnoma_core::{AnalyticContext, SimOptions, SystemConfig};

fn hypergeometric(c: &mut Criterion) {
    let table = Hyp2f1::new(3.0, 0.5, 1.5).unwrap();
    c.bench_function("gauss_2f1 z=-1e6", |b| {
        b.iter(|| gauss_2f1(3.0, 0.5, 1.5, black_box(-1e6)))
    });
    c.bench_function("hyp2f1 table z=-1e6", |b| b.iter(|| table.eval(black_box(-1e6))));
}

fn analytic(c: &mut Criterion) {
    let ctx = AnalyticContext::new(SystemConfig::default()).unwrap();
    c.bench_function("laplace_interference", |b| {
        b.iter(|| ctx.laplace_interference(black_box(1e9)))
    });
    c.bench_function("coverage_near", |b| b.iter(|| ctx.coverage_near()));
    let mut group = c.benchmark_group("slow");
    group.sample_size(10);
    group.bench_function("coverage_far", |b| b.iter(|| ctx.coverage_far()));
    group.finish();
}

fn simulation(c: &mut Criterion) {
    let cfg = SystemConfig::default();
    let opts = SimOptions::default();
    let mut trial = 0u64;
    c.bench_function("simulate_trial", |b| {
        b.iter(|| {
            trial += 1;
            simulate_trial(&cfg, &opts, 1, black_box(trial))
        })
    });
}

criterion_group!(benches, hypergeometric, analytic, simulation);
criterion_main!(benches);
