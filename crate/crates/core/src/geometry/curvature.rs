use nalgebra::DMatrix;
use ndarray::Array4;
use serde::Serialize;

use super::bilinear;
use super::connection::ConnectionAtPoint;
#[cfg(test)]
use super::frame::gram_schmidt;
use super::frame::orthonormal_frame_from;
use super::metric::{metric_at, model_metric, MetricAtPoint, MetricField, ModelMetricSpec};
use crate::error::{Error, Result};
use crate::field::ChartPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Coordinate,
    Orthonormal,
}

/// `R^∇` and `Rm` at one point, in either the coordinate or an orthonormal frame.
#[derive(Debug, Clone)]
pub struct CurvatureAtPoint {
    /// `r_mixed[[l, i, j, k]] = R^l_ijk`, i.e. `R(e_i, e_j) e_k = R^l_ijk e_l`
    pub r_mixed: Array4<f64>,
    /// `rm[[i, j, k, l]] = g(R(e_i, e_j) e_k, e_l)`
    pub rm: Array4<f64>,
    /// Metric coefficients in the same frame.
    pub metric: DMatrix<f64>,
    pub frame: Frame,
}

impl CurvatureAtPoint {
    pub fn from_parts(m: &MetricAtPoint, c: &ConnectionAtPoint) -> Self {
        let n = m.dim();
        let (gam, dgam) = (&c.gamma, &c.dgamma);
        let r_mixed = Array4::from_shape_fn((n, n, n, n), |(l, i, j, k)| {
            let mut r = dgam[[l, j, k, i]] - dgam[[l, i, k, j]];
            for s in 0..n {
                r += gam[[l, i, s]] * gam[[s, j, k]] - gam[[l, j, s]] * gam[[s, i, k]];
            }
            r
        });
        let rm = Array4::from_shape_fn((n, n, n, n), |(i, j, k, l)| {
            (0..n).map(|s| r_mixed[[s, i, j, k]] * m.g[(s, l)]).sum()
        });
        Self {
            r_mixed,
            rm,
            metric: m.g.clone(),
            frame: Frame::Coordinate,
        }
    }

    pub fn dim(&self) -> usize {
        self.rm.shape()[0]
    }

    /// Re-expresses the coordinate-frame tensors in the frame whose rows are `frame`.
    pub fn in_frame(&self, frame: &DMatrix<f64>, kind: Frame) -> Result<Self> {
        let n = self.dim();
        if frame.nrows() != n || frame.ncols() != n {
            return Err(Error::Shape(format!("frame must be {n}×{n}")));
        }
        // columns of `cols` are the frame vectors; their inverse maps coordinates to frame components
        let cols = frame.transpose();
        let inv = cols
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Shape("frame vectors are linearly dependent".into()))?;
        let rm = transform_covariant(&self.rm, frame);
        let lowered = transform_covariant_mixed(&self.r_mixed, frame, &inv);
        let metric = frame * &self.metric * frame.transpose();
        Ok(Self {
            r_mixed: lowered,
            rm,
            metric,
            frame: kind,
        })
    }

    /// `Rm(X, Y, Z, W)` for frame-component vectors.
    pub fn rm_eval(&self, x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if y[j] == 0.0 {
                    continue;
                }
                for k in 0..n {
                    let xyz = x[i] * y[j] * z[k];
                    if xyz == 0.0 {
                        continue;
                    }
                    for l in 0..n {
                        acc += xyz * w[l] * self.rm[[i, j, k, l]];
                    }
                }
            }
        }
        acc
    }

    /// `R^∇(X, Y) Z` as a frame-component vector.
    pub fn apply(&self, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let xyz = x[i] * y[j] * z[k];
                    if xyz == 0.0 {
                        continue;
                    }
                    for (l, o) in out.iter_mut().enumerate() {
                        *o += xyz * self.r_mixed[[l, i, j, k]];
                    }
                }
            }
        }
        out
    }

    /// `Rm(X, Y, X, Y) / (g(X,X) g(Y,Y) − g(X,Y)²)`.
    pub fn sectional(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let g = &self.metric;
        let gram = bilinear(g, x, x) * bilinear(g, y, y) - bilinear(g, x, y).powi(2);
        let nx: f64 = x.iter().map(|v| v * v).sum();
        let ny: f64 = y.iter().map(|v| v * v).sum();
        if gram.is_nan() || gram < 1e-12 * nx * ny || nx == 0.0 || ny == 0.0 {
            return Err(Error::DegeneratePlane { gram });
        }
        Ok(self.rm_eval(x, y, x, y) / gram)
    }

    pub fn max_abs(&self) -> f64 {
        self.rm.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

fn transform_covariant(t: &Array4<f64>, e: &DMatrix<f64>) -> Array4<f64> {
    let n = t.shape()[0];
    // contract one slot at a time
    let mut cur = t.clone();
    for slot in 0..4 {
        let mut next = Array4::zeros((n, n, n, n));
        for idx in ndarray::indices((n, n, n, n)) {
            let (a, b, c, d) = idx;
            let mut acc = 0.0;
            for s in 0..n {
                let (w, src) = match slot {
                    0 => (e[(a, s)], [s, b, c, d]),
                    1 => (e[(b, s)], [a, s, c, d]),
                    2 => (e[(c, s)], [a, b, s, d]),
                    _ => (e[(d, s)], [a, b, c, s]),
                };
                acc += w * cur[src];
            }
            next[[a, b, c, d]] = acc;
        }
        cur = next;
    }
    cur
}

fn transform_covariant_mixed(t: &Array4<f64>, e: &DMatrix<f64>, inv: &DMatrix<f64>) -> Array4<f64> {
    let n = t.shape()[0];
    let mut cur = t.clone();
    for slot in 0..4 {
        let mut next = Array4::zeros((n, n, n, n));
        for (a, b, c, d) in ndarray::indices((n, n, n, n)) {
            let mut acc = 0.0;
            for s in 0..n {
                let (w, src) = match slot {
                    0 => (inv[(a, s)], [s, b, c, d]),
                    1 => (e[(b, s)], [a, s, c, d]),
                    2 => (e[(c, s)], [a, b, s, d]),
                    _ => (e[(d, s)], [a, b, c, s]),
                };
                acc += w * cur[src];
            }
            next[[a, b, c, d]] = acc;
        }
        cur = next;
    }
    cur
}

pub fn riemann(g: &MetricField, p: &ChartPoint) -> Result<CurvatureAtPoint> {
    let m = metric_at(g, p)?;
    let c = ConnectionAtPoint::from_metric(&m);
    Ok(CurvatureAtPoint::from_parts(&m, &c))
}

pub fn sectional_curvature(g: &MetricField, p: &ChartPoint, x: &[f64], y: &[f64]) -> Result<f64> {
    let n = g.dim();
    if x.len() != n || y.len() != n {
        return Err(Error::Shape(format!(
            "plane vectors must have {n} components"
        )));
    }
    riemann(g, p)?.sectional(x, y)
}

/// `h⊙k(X,Y,Z,W) = h(X,Z)k(Y,W) + h(Y,W)k(X,Z) − h(X,W)k(Y,Z) − h(Y,Z)k(X,W)`.
pub fn kulkarni_nomizu(
    h: &DMatrix<f64>,
    k: &DMatrix<f64>,
    x: &[f64],
    y: &[f64],
    z: &[f64],
    w: &[f64],
) -> Result<f64> {
    let n = h.nrows();
    let square = |m: &DMatrix<f64>| m.nrows() == n && m.ncols() == n;
    if !square(h) || !square(k) || [x, y, z, w].iter().any(|v| v.len() != n) {
        return Err(Error::Shape(format!(
            "Kulkarni–Nomizu product needs {n}×{n} forms and {n}-vectors"
        )));
    }
    let b = bilinear;
    Ok(b(h, x, z) * b(k, y, w) + b(h, y, w) * b(k, x, z)
        - b(h, x, w) * b(k, y, z)
        - b(h, y, z) * b(k, x, w))
}

/// Sign `σ` with `σ·R_ijji = c₀` in orthonormal frames of the model metric.
///
/// Every pair `i ≠ j` at every sample point must give the same sign to `1e-6`.
pub fn calibrate_sign(spec: &ModelMetricSpec, points: &[ChartPoint]) -> Result<f64> {
    if spec.c0 == 0.0 {
        return Err(Error::Calibration(
            "no sign can be calibrated against c0 = 0".into(),
        ));
    }
    if points.is_empty() {
        return Err(Error::Calibration("no sample points".into()));
    }
    let g = model_metric(*spec);
    let tol = 1e-6 * spec.c0.abs().max(1.0);
    let mut sign: Option<f64> = None;
    for p in points {
        let m = metric_at(&g, p)?;
        let curv = CurvatureAtPoint::from_parts(&m, &ConnectionAtPoint::from_metric(&m));
        let e = orthonormal_frame_from(&m.g)?;
        let on = curv.in_frame(&e, Frame::Orthonormal)?;
        let n = spec.dim;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let rijji = on.rm[[i, j, j, i]];
                let s = if rijji * spec.c0 >= 0.0 { 1.0 } else { -1.0 };
                if (s * rijji - spec.c0).abs() > tol {
                    return Err(Error::Calibration(format!(
                        "R_{i}{j}{j}{i} = {rijji} is not ±c0 = ±{} at {:?}",
                        spec.c0,
                        p.coords()
                    )));
                }
                match sign {
                    None => sign = Some(s),
                    Some(prev) if prev != s => {
                        return Err(Error::Calibration(format!(
                            "sign flips between samples (at {:?}, pair ({i}, {j}))",
                            p.coords()
                        )))
                    }
                    _ => {}
                }
            }
        }
    }
    Ok(sign.expect("at least one pair"))
}
