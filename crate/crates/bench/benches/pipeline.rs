//! Benchmarks for the screening pipeline hot paths.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use dcscreen::dcorr::marginal_sweep;
use dcscreen::error_model::partition_sigma;
use dcscreen::screening::{corrected_beta, iterative_screen, CorrectionMode};
use dcscreen::simgen::{run_experiment, Knowledge, ModelKind, ScenarioConfig};
use dcscreen::survival::impute_response;

use dcscreen_bench::{censored_sample, fixture};

fn bench_marginal_sweep(c: &mut Criterion) {
    let f = fixture(200, 500, CorrectionMode::Naive, 1);
    c.bench_function("marginal_sweep/n200_p500", |b| {
        b.iter(|| marginal_sweep(black_box(&f.imputed), black_box(f.x.view())).unwrap())
    });
}

fn bench_imputation(c: &mut Criterion) {
    let sample = censored_sample(2000, 2);
    c.bench_function("impute_response/n2000", |b| {
        b.iter(|| impute_response(black_box(&sample)).unwrap())
    });
}

fn bench_corrected_beta(c: &mut Criterion) {
    let f = fixture(300, 60, CorrectionMode::Corrected, 3);
    let active: Vec<usize> = (0..10).collect();
    let blocks = partition_sigma(&f.sigma, &active).unwrap();
    let xi = f.x.slice(ndarray::s![.., ..10]);
    let xic = f.x.slice(ndarray::s![.., 10..]);
    c.bench_function("corrected_beta/n300_q10_rest50", |b| {
        b.iter(|| corrected_beta(black_box(xi), black_box(xic), &blocks, 300).unwrap())
    });
}

fn bench_iterative_screen(c: &mut Criterion) {
    let f = fixture(150, 300, CorrectionMode::Corrected, 4);
    c.bench_function("iterative_screen/n150_p300", |b| {
        b.iter(|| {
            iterative_screen(
                black_box(&f.imputed),
                black_box(f.x.view()),
                &f.sigma,
                &f.config,
            )
            .unwrap()
        })
    });
}

fn bench_experiment(c: &mut Criterion) {
    let mut cfg = ScenarioConfig::desk(ModelKind::Ph, 0.5, Some(0.15), Knowledge::Known);
    cfg.n = 60;
    cfg.p = 40;
    cfg.replications = 2;
    let mut group = c.benchmark_group("experiment");
    group.sample_size(10);
    group.bench_function("ph_n60_p40_r2", |b| {
        b.iter(|| run_experiment(black_box(&cfg)).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_marginal_sweep,
    bench_imputation,
    bench_corrected_beta,
    bench_iterative_screen,
    bench_experiment
);
criterion_main!(benches);
