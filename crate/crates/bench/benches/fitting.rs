use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use tealeaf_bench::samples;
use tealeaf_core::{fit_image, sweep_thresholds, FitConfig, FitMode};

fn sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep_thresholds");
    let cfg = FitConfig::default();
    for n in [100, 1_000, 10_000] {
        let s = samples(1, n, 25);
        group.bench_with_input(BenchmarkId::from_parameter(n * 2), &s, |b, s| {
            b.iter(|| sweep_thresholds(black_box([0.764, 0.392, -1.157]), s, &cfg).unwrap())
        });
    }
    group.finish();
}

fn fit(c: &mut Criterion) {
    let mut group = c.benchmark_group("fit_image");
    group.sample_size(10);
    let s = samples(2, 1_000, 25);
    group.bench_function("first_found/coarse", |b| {
        b.iter(|| fit_image(black_box(&s), &FitConfig::coarse()).unwrap())
    });
    group.bench_function("first_found/default", |b| {
        b.iter(|| fit_image(black_box(&s), &FitConfig::default()).unwrap())
    });
    group.bench_function("best/coarse", |b| {
        b.iter(|| fit_image(black_box(&s), &FitConfig::coarse().with_mode(FitMode::Best)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, sweep, fit);
criterion_main!(benches);
