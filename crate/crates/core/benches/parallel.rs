//! Scaleogram and verification workloads on the rayon pool versus the
//! sequential path. `cargo bench --no-default-features` builds without rayon.

use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use qwave::par;
use qwave::probes::standard_family;
use qwave::qwavelet::cwt_many;
use qwave::{BesselParams, QGrid, TransformPlan, WaveletSpec};

fn setup(q: f64) -> (WaveletSpec, Vec<qwave::GridFunction>) {
    let g = QGrid::new(q, -20, 40).unwrap();
    let plan = Arc::new(TransformPlan::new(&g, BesselParams::new(0.5, 0.25).unwrap()).unwrap());
    let probes = standard_family(&plan).unwrap();
    (WaveletSpec::pair(plan, 2, 3).unwrap(), probes)
}

fn scaleograms(c: &mut Criterion) {
    let mut group = c.benchmark_group("cwt_many");
    group.sample_size(10);
    for q in [0.3, 0.7] {
        let (spec, probes) = setup(q);
        let ks = spec.scales();
        let bs: Vec<i64> = spec.plan().spatial().indices().collect();
        group.bench_with_input(BenchmarkId::new("parallel", q), &q, |b, _| {
            b.iter(|| cwt_many(black_box(&probes), &spec, &ks, &bs).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", q), &q, |b, _| {
            b.iter(|| par::sequential(|| cwt_many(black_box(&probes), &spec, &ks, &bs).unwrap()))
        });
    }
    group.finish();
}

fn verify_cell(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_cell");
    group.sample_size(10);
    let g = QGrid::new(0.5, -20, 40).unwrap();
    group.bench_function("parallel", |b| b.iter(|| qwave::suite::run_cell(0.5, 0.0, 0.0, &g).unwrap()));
    group.bench_function("sequential", |b| {
        b.iter(|| par::sequential(|| qwave::suite::run_cell(0.5, 0.0, 0.0, &g).unwrap()))
    });
    group.finish();
}

criterion_group!(benches, scaleograms, verify_cell);
criterion_main!(benches);
