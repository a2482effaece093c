//! Metric side: Levi-Civita connection, curvature, sectional curvature,
//! Kulkarni–Nomizu product, the constant-curvature model family and
//! orthonormal frames.

mod connection;
mod curvature;
mod frame;
mod metric;

pub use connection::{christoffel, ConnectionAtPoint};
pub use curvature::{
    calibrate_sign, kulkarni_nomizu, riemann, sectional_curvature, CurvatureAtPoint, Frame,
};
pub use frame::{gram_schmidt, orthonormal_frame, orthonormal_frame_from};
pub use metric::{metric_at, model_metric, MetricAtPoint, MetricField, ModelMetricSpec};

/// `uᵀ m v`.
pub(crate) fn bilinear(m: &nalgebra::DMatrix<f64>, u: &[f64], v: &[f64]) -> f64 {
    let n = u.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += u[i] * m[(i, j)] * v[j];
        }
    }
    acc
}
