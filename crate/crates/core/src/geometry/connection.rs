use ndarray::{Array3, Array4};

use super::metric::{metric_at, MetricAtPoint, MetricField};
use crate::error::Result;
use crate::field::ChartPoint;

/// Christoffel symbols of the Levi-Civita connection and their first derivatives.
#[derive(Debug, Clone)]
pub struct ConnectionAtPoint {
    /// `gamma[[k, i, j]] = Γ^k_ij`
    pub gamma: Array3<f64>,
    /// `dgamma[[k, i, j, l]] = ∂_l Γ^k_ij`
    pub dgamma: Array4<f64>,
}

impl ConnectionAtPoint {
    /// `Γ^k_ij = ½ g^{kl}(∂_i g_jl + ∂_j g_il − ∂_l g_ij)`, symmetrised in `(i, j)`.
    pub fn from_metric(m: &MetricAtPoint) -> Self {
        let n = m.dim();
        let (dg, ddg, gi) = (&m.dg, &m.ddg, &m.g_inv);
        let lower = Array3::from_shape_fn((n, n, n), |(l, i, j)| {
            0.5 * (dg[[j, l, i]] + dg[[i, l, j]] - dg[[i, j, l]])
        });
        // d_lower[[l, i, j, m]] = ∂_m Γ_{l,ij}
        let d_lower = Array4::from_shape_fn((n, n, n, n), |(l, i, j, m)| {
            0.5 * (ddg[[j, l, i, m]] + ddg[[i, l, j, m]] - ddg[[i, j, l, m]])
        });
        // d_inv[[k, l, m]] = ∂_m g^{kl} = −g^{ka} ∂_m g_ab g^{bl}
        let d_inv = Array3::from_shape_fn((n, n, n), |(k, l, m)| {
            let mut acc = 0.0;
            for a in 0..n {
                for b in 0..n {
                    acc -= gi[(k, a)] * dg[[a, b, m]] * gi[(b, l)];
                }
            }
            acc
        });

        let mut gamma = Array3::zeros((n, n, n));
        let mut dgamma = Array4::zeros((n, n, n, n));
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let mut g = 0.0;
                    for l in 0..n {
                        g += gi[(k, l)] * lower[[l, i, j]];
                    }
                    gamma[[k, i, j]] = g;
                    gamma[[k, j, i]] = g;
                    for m in 0..n {
                        let mut d = 0.0;
                        for l in 0..n {
                            d += d_inv[[k, l, m]] * lower[[l, i, j]]
                                + gi[(k, l)] * d_lower[[l, i, j, m]];
                        }
                        dgamma[[k, i, j, m]] = d;
                        dgamma[[k, j, i, m]] = d;
                    }
                }
            }
        }
        Self { gamma, dgamma }
    }

    pub fn dim(&self) -> usize {
        self.gamma.shape()[0]
    }

    /// `∇_u v` for the constant-coefficient vector `v` at the point, i.e. `Γ^k_ij uⁱ vʲ`.
    pub fn christoffel_action(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|k| {
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        acc += self.gamma[[k, i, j]] * u[i] * v[j];
                    }
                }
                acc
            })
            .collect()
    }

    /// Largest `|Γ^k_ij − Γ^k_ji|`.
    pub fn torsion_max(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    worst = worst.max((self.gamma[[k, i, j]] - self.gamma[[k, j, i]]).abs());
                }
            }
        }
        worst
    }
}

pub fn christoffel(g: &MetricField, p: &ChartPoint) -> Result<ConnectionAtPoint> {
    Ok(ConnectionAtPoint::from_metric(&metric_at(g, p)?))
}
