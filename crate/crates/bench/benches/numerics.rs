use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use laguerre_bellman::sim::even_checkpoints;
use laguerre_bellman::verify::{run_suite, SuiteOptions};
use laguerre_bellman::{laguerre_eval, simulate, smallest_zero, tau_p, BellmanProfile, SimConfig};

fn series(c: &mut Criterion) {
    let mut group = c.benchmark_group("laguerre_eval");
    for p in [3.0, 100.0, 1e4] {
        group.bench_with_input(BenchmarkId::from_parameter(p), &p, |b, &p| {
            b.iter(|| laguerre_eval(black_box(p), black_box(0.5 / p), 1e-12))
        });
    }
    group.finish();
}

fn zeros(c: &mut Criterion) {
    let mut group = c.benchmark_group("smallest_zero");
    for p in [1.5, 3.0, 1e3] {
        group.bench_with_input(BenchmarkId::from_parameter(p), &p, |b, &p| b.iter(|| smallest_zero(black_box(p), 1e-13)));
    }
    group.finish();
}

fn quadrature(c: &mut Criterion) {
    c.bench_function("tau_p 1000", |b| b.iter(|| tau_p(black_box(1000.0))));
}

fn certification(c: &mut Criterion) {
    let profile = BellmanProfile::new(3.0).unwrap();
    let options = SuiteOptions { grid_points: 2000, ..SuiteOptions::default() };
    c.bench_function("verify suite p=3 grid 2000", |b| b.iter(|| run_suite(black_box(&profile), &options)));
}

fn monte_carlo(c: &mut Criterion) {
    let config = SimConfig { n_paths: 500, n_steps: 200, checkpoints: even_checkpoints(200, 10), ..SimConfig::new(3.0).unwrap() };
    let mut group = c.benchmark_group("simulate");
    group.sample_size(10);
    group.bench_function("p=3 500x200", |b| b.iter(|| simulate(black_box(&config)).unwrap()));
    group.finish();
}

criterion_group!(benches, series, zeros, quadrature, certification, monte_carlo);
criterion_main!(benches);
