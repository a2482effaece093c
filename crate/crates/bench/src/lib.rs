//! Benchmarks for the curvobstruct pipeline; see `benches/pipeline.rs`.

use curvobstruct_core::ChartPoint;

/// Fixed off-centre point used by every benchmark.
pub fn bench_point(dim: usize) -> ChartPoint {
    ChartPoint::new((0..dim).map(|i| 0.1 + 0.05 * i as f64).collect()).expect("valid point")
}
