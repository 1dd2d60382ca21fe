use criterion::{criterion_group, criterion_main, Criterion, Throughput};
use std::hint::black_box;
use tealeaf_bench::{field_image, random_mask, stems};
use tealeaf_core::{
    binarize, connected_components, run_campaign, FaultConfig, SegmentationParams, SimConfig,
};

fn segmentation(c: &mut Criterion) {
    let img = field_image(3, 640, 480, 60);
    let mut group = c.benchmark_group("segmentation");
    group.throughput(Throughput::Elements((640 * 480) as u64));
    group.bench_function("binarize/640x480", |b| {
        b.iter(|| binarize(black_box(&SegmentationParams::TENDER_LEAF), &img))
    });
    let mask = binarize(&SegmentationParams::TENDER_LEAF, &img);
    group.bench_function("components/leaf_field", |b| {
        b.iter(|| connected_components(black_box(&mask), 50))
    });
    let noise = random_mask(4, 640, 480, 0.4);
    group.bench_function("components/random_40pct", |b| {
        b.iter(|| connected_components(black_box(&noise), 1))
    });
    group.finish();
}

fn campaign(c: &mut Criterion) {
    let stems = stems(80);
    let cfg = SimConfig::default();
    let faults = FaultConfig {
        bias_rate: 0.075,
        bias: 1.32,
        ..FaultConfig::default()
    };
    let mut group = c.benchmark_group("campaign");
    group.sample_size(20);
    group.bench_function("80_trials", |b| {
        b.iter(|| run_campaign(black_box(&stems), &cfg, &faults, 42).unwrap())
    });
    group.finish();
}

criterion_group!(benches, segmentation, campaign);
criterion_main!(benches);
