use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use curvobstruct_bench::bench_point;
use curvobstruct_core::complex::{make_ac_field, StructureAtPoint};
use curvobstruct_core::geometry::{model_metric, riemann, ModelMetricSpec};
use curvobstruct_core::jet::{jet_array, Order};
use curvobstruct_core::run_scenario;
use curvobstruct_core::scenario::lookup;

fn jets(c: &mut Criterion) {
    let mut group = c.benchmark_group("metric_jet");
    for n in [4, 6, 8] {
        let g = model_metric(ModelMetricSpec::new(1.0, n).unwrap());
        let p = bench_point(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| jet_array(black_box(g.components()), black_box(&p), Order::Second).unwrap())
        });
    }
    group.finish();
}

fn curvature(c: &mut Criterion) {
    let mut group = c.benchmark_group("riemann");
    for n in [4, 6, 8] {
        let g = model_metric(ModelMetricSpec::new(1.0, n).unwrap());
        let p = bench_point(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| riemann(black_box(&g), black_box(&p)).unwrap())
        });
    }
    group.finish();
}

fn structure(c: &mut Criterion) {
    let mut group = c.benchmark_group("structure_at_point");
    for n in [4, 6] {
        let g = model_metric(ModelMetricSpec::new(1.0, n).unwrap());
        let a = make_ac_field(n, 7, 0.05).unwrap();
        let p = bench_point(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| StructureAtPoint::new(black_box(&a), black_box(&g), black_box(&p)).unwrap())
        });
    }
    group.finish();
}

fn scenarios(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_scenario");
    group.sample_size(20);
    for name in ["round-6-standard", "perturbed-6"] {
        let cfg = lookup(name).unwrap();
        group.bench_function(name, |b| b.iter(|| run_scenario(black_box(&cfg)).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, jets, curvature, structure, scenarios);
criterion_main!(benches);
