use nalgebra::DMatrix;

use super::metric::{check_positive_definite, MetricField};
use crate::error::{Error, Result};
use crate::field::ChartPoint;

/// Modified Gram–Schmidt of the rows of `vectors` in the inner product `g`, in row order.
pub fn gram_schmidt(vectors: &DMatrix<f64>, g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = g.nrows();
    if vectors.ncols() != n {
        return Err(Error::Shape(format!("vectors must have {n} components")));
    }
    let inner = |u: &[f64], v: &[f64]| super::bilinear(g, u, v);
    let mut rows: Vec<Vec<f64>> = (0..vectors.nrows())
        .map(|i| vectors.row(i).iter().copied().collect())
        .collect();
    for i in 0..rows.len() {
        for j in 0..i {
            let proj = inner(&rows[i], &rows[j]);
            let (done, rest) = rows.split_at_mut(i);
            for (a, b) in rest[0].iter_mut().zip(&done[j]) {
                *a -= proj * b;
            }
        }
        let norm2 = inner(&rows[i], &rows[i]);
        if norm2.is_nan() || norm2 <= 1e-24 {
            return Err(Error::Shape(format!(
                "vector {i} is linearly dependent on its predecessors"
            )));
        }
        let inv = norm2.sqrt().recip();
        rows[i].iter_mut().for_each(|a| *a *= inv);
    }
    Ok(DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]))
}

/// Orthonormal frame of a metric matrix: row `i` holds the coordinate components of `E_i`.
pub fn orthonormal_frame_from(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_positive_definite(g)?;
    let n = g.nrows();
    gram_schmidt(&DMatrix::identity(n, n), g)
}

pub fn orthonormal_frame(g: &MetricField, p: &ChartPoint) -> Result<DMatrix<f64>> {
    orthonormal_frame_from(&g.value_at(p)?)
}
