use nalgebra::{DMatrix, DVector};
use ndarray::Array3;

use super::form::VectorFieldSpec;
use super::structure::ACStructureField;
use crate::error::{Error, Result};
use crate::field::ChartPoint;
use crate::jet::{jet_array, JetValue, Order};

/// A vector field's value and first derivatives at a point: `grad[(k, l)] = ∂_l X^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorJet {
    pub value: DVector<f64>,
    pub grad: DMatrix<f64>,
}

impl VectorJet {
    pub fn from_jets(jets: &[JetValue]) -> Self {
        let n = jets.len();
        Self {
            value: DVector::from_fn(n, |k, _| jets[k].value),
            grad: DMatrix::from_fn(n, n, |k, l| jets[k].grad[l]),
        }
    }

    pub fn of(field: &VectorFieldSpec, p: &ChartPoint) -> Result<Self> {
        Ok(Self::from_jets(&jet_array(
            field.components(),
            p,
            Order::First,
        )?))
    }

    pub fn constant(v: &[f64]) -> Self {
        let n = v.len();
        Self {
            value: DVector::from_column_slice(v),
            grad: DMatrix::zeros(n, n),
        }
    }

    /// `[X, Y]^k = X^i ∂_i Y^k − Y^i ∂_i X^k`.
    pub fn bracket(&self, other: &VectorJet) -> DVector<f64> {
        &other.grad * &self.value - &self.grad * &other.value
    }
}

/// Operator matrix of a structure with its first derivatives: `d[l][(c, j)] = ∂_l A^c_j`.
#[derive(Debug, Clone)]
pub(crate) struct OperatorJet {
    pub value: DMatrix<f64>,
    pub d: Vec<DMatrix<f64>>,
}

impl OperatorJet {
    pub fn from_jets(n: usize, jets: &[JetValue]) -> Self {
        Self {
            value: DMatrix::from_fn(n, n, |c, j| jets[c * n + j].value),
            d: (0..n)
                .map(|l| DMatrix::from_fn(n, n, |c, j| jets[c * n + j].grad[l]))
                .collect(),
        }
    }

    /// Jet of the field `A X`.
    pub fn apply(&self, x: &VectorJet) -> VectorJet {
        let n = x.value.len();
        let mut grad = &self.value * &x.grad;
        for l in 0..n {
            let col = &self.d[l] * &x.value;
            for c in 0..n {
                grad[(c, l)] += col[c];
            }
        }
        VectorJet {
            value: &self.value * &x.value,
            grad,
        }
    }

    /// `[AX, AY] − A([AX, Y] + [X, AY]) − [X, Y]`.
    pub fn nijenhuis(&self, x: &VectorJet, y: &VectorJet) -> DVector<f64> {
        let (ax, ay) = (self.apply(x), self.apply(y));
        ax.bracket(&ay) - &self.value * (ax.bracket(y) + x.bracket(&ay)) - x.bracket(y)
    }
}

pub fn lie_bracket(x: &VectorFieldSpec, y: &VectorFieldSpec, p: &ChartPoint) -> Result<Vec<f64>> {
    if x.dim() != p.dim() || y.dim() != p.dim() {
        return Err(Error::Shape(
            "vector fields must match the chart dimension".into(),
        ));
    }
    let b = VectorJet::of(x, p)?.bracket(&VectorJet::of(y, p)?);
    Ok(b.iter().copied().collect())
}

pub fn nijenhuis(
    a: &ACStructureField,
    x: &VectorFieldSpec,
    y: &VectorFieldSpec,
    p: &ChartPoint,
) -> Result<Vec<f64>> {
    let n = a.dim();
    if x.dim() != n || y.dim() != n || p.dim() != n {
        return Err(Error::Shape(
            "structure, fields and point dimensions differ".into(),
        ));
    }
    let op = OperatorJet::from_jets(n, &jet_array(a.operator_field(), p, Order::First)?);
    let v = op.nijenhuis(&VectorJet::of(x, p)?, &VectorJet::of(y, p)?);
    Ok(v.iter().copied().collect())
}

/// `N[[k, i, j]] = N_A(∂_i, ∂_j)^k` at `p`.
pub fn nijenhuis_tensor(a: &ACStructureField, p: &ChartPoint) -> Result<Array3<f64>> {
    let n = a.dim();
    let op = OperatorJet::from_jets(n, &jet_array(a.operator_field(), p, Order::First)?);
    Ok(nijenhuis_from(&op))
}

pub(crate) fn nijenhuis_from(op: &OperatorJet) -> Array3<f64> {
    let n = op.value.nrows();
    let basis: Vec<VectorJet> = (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            VectorJet::constant(&e)
        })
        .collect();
    let mut out = Array3::zeros((n, n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let v = op.nijenhuis(&basis[i], &basis[j]);
            for k in 0..n {
                out[[k, i, j]] = v[k];
                out[[k, j, i]] = -v[k];
            }
        }
    }
    out
}
