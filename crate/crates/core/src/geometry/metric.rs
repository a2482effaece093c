use nalgebra::DMatrix;
use ndarray::{Array3, Array4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ChartPoint, FieldArray, ScalarField};
use crate::hyperdual::HyperDual;
use crate::jet::{jet_array, JetValue, Order};

/// Relative threshold on the smallest eigenvalue, scaled by the trace.
const PD_THRESHOLD: f64 = 1e-10;

/// Riemannian metric given by its `n×n` coefficient functions `g_ij` (row-major).
#[derive(Debug, Clone)]
pub struct MetricField {
    dim: usize,
    components: FieldArray,
}

impl MetricField {
    pub fn new(dim: usize, components: FieldArray) -> Result<Self> {
        if components.len() != dim * dim {
            return Err(Error::Shape(format!(
                "metric on a {dim}-dimensional chart needs {} components, got {}",
                dim * dim,
                components.len()
            )));
        }
        Ok(Self { dim, components })
    }

    pub fn from_scalars(dim: usize, components: Vec<ScalarField>) -> Result<Self> {
        Self::new(dim, FieldArray::from_scalars(components))
    }

    pub fn flat(dim: usize) -> Self {
        let values: Vec<f64> = DMatrix::<f64>::identity(dim, dim).iter().copied().collect();
        let components = FieldArray::new(dim * dim, move |_| {
            values.iter().map(|&v| HyperDual::constant(v)).collect()
        });
        Self { dim, components }
    }

    /// `g_ij = φ(x) δ_ij`.
    pub fn conformal(dim: usize, factor: ScalarField) -> Self {
        let guard = factor.clone();
        let components = FieldArray::new(dim * dim, move |x| {
            let phi = factor.eval(x);
            let mut out = vec![HyperDual::ZERO; dim * dim];
            for i in 0..dim {
                out[i * dim + i] = phi;
            }
            out
        })
        .with_guard(move |x| guard.contains(x));
        Self { dim, components }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &FieldArray {
        &self.components
    }

    pub fn contains(&self, p: &ChartPoint) -> bool {
        self.components.contains(p.coords())
    }

    pub fn value_at(&self, p: &ChartPoint) -> Result<DMatrix<f64>> {
        if p.dim() != self.dim {
            return Err(Error::Shape(format!(
                "point of dimension {} for a {}-dimensional metric",
                p.dim(),
                self.dim
            )));
        }
        if !self.contains(p) {
            return Err(Error::Domain {
                point: p.coords().to_vec(),
            });
        }
        let g = DMatrix::from_row_slice(self.dim, self.dim, &self.components.values(p.coords()));
        check_positive_definite(&g)?;
        Ok(g)
    }

    /// Largest `|g_ij - g_ji|` at `p`.
    pub fn asymmetry_at(&self, p: &ChartPoint) -> f64 {
        let g = DMatrix::from_row_slice(self.dim, self.dim, &self.components.values(p.coords()));
        (&g - g.transpose()).amax()
    }
}

pub(crate) fn check_positive_definite(g: &DMatrix<f64>) -> Result<()> {
    let sym = (g + g.transpose()) * 0.5;
    let min_eigenvalue = sym.clone().symmetric_eigen().eigenvalues.min();
    let threshold = PD_THRESHOLD * sym.trace().abs();
    if min_eigenvalue > threshold && min_eigenvalue.is_finite() {
        Ok(())
    } else {
        Err(Error::SingularMetric {
            min_eigenvalue,
            threshold,
        })
    }
}

/// Metric value, inverse and first two coordinate derivatives at a point.
#[derive(Debug, Clone)]
pub struct MetricAtPoint {
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    /// `dg[[i, j, l]] = ∂_l g_ij`
    pub dg: Array3<f64>,
    /// `ddg[[i, j, l, m]] = ∂_l ∂_m g_ij`
    pub ddg: Array4<f64>,
}

impl MetricAtPoint {
    /// Assembles from per-component jets (row-major), symmetrising in `(i, j)`.
    pub fn from_jets(dim: usize, jets: &[JetValue]) -> Result<Self> {
        if jets.len() != dim * dim {
            return Err(Error::Shape(format!(
                "expected {} metric jets, got {}",
                dim * dim,
                jets.len()
            )));
        }
        let n = dim;
        let sym = |i: usize, j: usize, f: &dyn Fn(&JetValue) -> f64| {
            0.5 * (f(&jets[i * n + j]) + f(&jets[j * n + i]))
        };
        let g = DMatrix::from_fn(n, n, |i, j| sym(i, j, &|jv| jv.value));
        check_positive_definite(&g)?;
        let g_inv = g.clone().try_inverse().ok_or(Error::SingularMetric {
            min_eigenvalue: 0.0,
            threshold: 0.0,
        })?;
        let dg = Array3::from_shape_fn((n, n, n), |(i, j, l)| sym(i, j, &|jv| jv.grad[l]));
        let ddg = Array4::from_shape_fn((n, n, n, n), |(i, j, l, m)| {
            sym(i, j, &|jv| jv.hess[(l, m)])
        });
        Ok(Self { g, g_inv, dg, ddg })
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        super::bilinear(&self.g, u, v)
    }
}

pub fn metric_at(g: &MetricField, p: &ChartPoint) -> Result<MetricAtPoint> {
    if p.dim() != g.dim() {
        return Err(Error::Shape(format!(
            "point of dimension {} for a {}-dimensional metric",
            p.dim(),
            g.dim()
        )));
    }
    let jets = jet_array(g.components(), p, Order::Second)?;
    MetricAtPoint::from_jets(g.dim(), &jets)
}

/// Constant sectional curvature model `δ_ij / (1 + c₀|x|²/4)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelMetricSpec {
    pub c0: f64,
    pub dim: usize,
}

impl ModelMetricSpec {
    pub fn new(c0: f64, dim: usize) -> Result<Self> {
        if dim < 2 || !dim.is_multiple_of(2) {
            return Err(Error::Dimension {
                dim,
                reason: "chart dimension must be even and at least 2",
            });
        }
        if !c0.is_finite() {
            return Err(Error::config("c0", "must be finite"));
        }
        Ok(Self { c0, dim })
    }

    /// `|x|² < 4/|c₀|` for negative curvature, everything otherwise.
    pub fn contains(&self, x: &[f64]) -> bool {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        self.c0 >= 0.0 || r2 < 4.0 / self.c0.abs()
    }
}

pub fn model_metric(spec: ModelMetricSpec) -> MetricField {
    let ModelMetricSpec { c0, dim } = spec;
    if c0 == 0.0 {
        return MetricField::flat(dim);
    }
    let factor = ScalarField::new(move |x| {
        let r2: HyperDual = x.iter().map(|&v| v * v).sum();
        (r2 * (0.25 * c0) + 1.0).powi(-2)
    })
    .with_guard(move |x| spec.contains(x));
    MetricField::conformal(dim, factor)
}
