//! Value, gradient and Hessian of coefficient fields at a chart point.
//!
//! [`jet`] is the production path (hyper-dual, exact to rounding). [`jet_fd`]
//! is a central-difference oracle kept for cross-checks only.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::field::{ChartPoint, FieldArray, ScalarField};
use crate::hyperdual::HyperDual;

pub const DEFAULT_FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct JetValue {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: DMatrix<f64>,
}

impl JetValue {
    pub fn zero(dim: usize) -> Self {
        Self {
            value: 0.0,
            grad: vec![0.0; dim],
            hess: DMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|g| g.is_finite())
            && self.hess.iter().all(|h| h.is_finite())
    }

    /// Largest `|self - other| / max(1, |self|)` over value, gradient and Hessian.
    pub fn max_relative_diff(&self, other: &JetValue) -> (f64, f64, f64) {
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(1.0);
        let v = rel(self.value, other.value);
        let g = self
            .grad
            .iter()
            .zip(&other.grad)
            .map(|(&a, &b)| rel(a, b))
            .fold(0.0, f64::max);
        let h = self
            .hess
            .iter()
            .zip(other.hess.iter())
            .map(|(&a, &b)| rel(a, b))
            .fold(0.0, f64::max);
        (v, g, h)
    }
}

/// How many derivative orders to propagate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    First,
    Second,
}

fn check_point(contains: impl Fn(&[f64]) -> bool, p: &[f64]) -> Result<()> {
    if contains(p) {
        Ok(())
    } else {
        Err(Error::Domain { point: p.to_vec() })
    }
}

fn seeded(p: &[f64], i: usize, j: usize) -> Vec<HyperDual> {
    p.iter()
        .enumerate()
        .map(|(m, &x)| {
            HyperDual::new(
                x,
                if m == i { 1.0 } else { 0.0 },
                if m == j { 1.0 } else { 0.0 },
                0.0,
            )
        })
        .collect()
}

/// Jets of every output of `eval`, using one hyper-dual pass per `(i, j)` with `i <= j`
/// (or one pass per direction for [`Order::First`]).
fn hyperdual_jets(
    n: usize,
    outputs: usize,
    p: &[f64],
    order: Order,
    eval: impl Fn(&[HyperDual]) -> Vec<HyperDual>,
) -> Vec<JetValue> {
    let mut jets = vec![JetValue::zero(n); outputs];
    for i in 0..n {
        let upper = match order {
            Order::First => i + 1,
            Order::Second => n,
        };
        for j in i..upper {
            let out = eval(&seeded(p, i, j));
            for (jet, v) in jets.iter_mut().zip(out) {
                if i == j {
                    jet.value = v.re;
                    jet.grad[i] = v.e1;
                }
                if order == Order::Second {
                    jet.hess[(i, j)] = v.e12;
                    jet.hess[(j, i)] = v.e12;
                }
            }
        }
    }
    jets
}

fn ensure_finite(jets: &[JetValue], what: &str) -> Result<()> {
    if jets.iter().all(JetValue::is_finite) {
        Ok(())
    } else {
        Err(Error::NonFinite { what: what.into() })
    }
}

pub fn jet(f: &ScalarField, p: &ChartPoint) -> Result<JetValue> {
    check_point(|x| f.contains(x), p.coords())?;
    let jets = hyperdual_jets(p.dim(), 1, p.coords(), Order::Second, |x| vec![f.eval(x)]);
    ensure_finite(&jets, "scalar field jet")?;
    Ok(jets.into_iter().next().expect("one output"))
}

pub fn jet_array(f: &FieldArray, p: &ChartPoint, order: Order) -> Result<Vec<JetValue>> {
    check_point(|x| f.contains(x), p.coords())?;
    let jets = hyperdual_jets(p.dim(), f.len(), p.coords(), order, |x| f.eval(x));
    ensure_finite(&jets, "field array jet")?;
    Ok(jets)
}

fn fd_jets(
    n: usize,
    outputs: usize,
    p: &[f64],
    h: f64,
    contains: impl Fn(&[f64]) -> bool,
    eval: impl Fn(&[f64]) -> Vec<f64>,
) -> Result<Vec<JetValue>> {
    let at = |shifts: &[(usize, f64)]| -> Result<Vec<f64>> {
        let mut x = p.to_vec();
        for &(m, s) in shifts {
            x[m] += s;
        }
        check_point(&contains, &x)?;
        Ok(eval(&x))
    };
    let centre = at(&[])?;
    let mut jets: Vec<JetValue> = centre
        .iter()
        .map(|&v| JetValue {
            value: v,
            ..JetValue::zero(n)
        })
        .collect();
    debug_assert_eq!(jets.len(), outputs);
    for i in 0..n {
        let plus = at(&[(i, h)])?;
        let minus = at(&[(i, -h)])?;
        for (o, jet) in jets.iter_mut().enumerate() {
            jet.grad[i] = (plus[o] - minus[o]) / (2.0 * h);
            jet.hess[(i, i)] = (plus[o] - 2.0 * centre[o] + minus[o]) / (h * h);
        }
        for j in (i + 1)..n {
            let pp = at(&[(i, h), (j, h)])?;
            let pm = at(&[(i, h), (j, -h)])?;
            let mp = at(&[(i, -h), (j, h)])?;
            let mm = at(&[(i, -h), (j, -h)])?;
            for (o, jet) in jets.iter_mut().enumerate() {
                let v = (pp[o] - pm[o] - mp[o] + mm[o]) / (4.0 * h * h);
                jet.hess[(i, j)] = v;
                jet.hess[(j, i)] = v;
            }
        }
    }
    Ok(jets)
}

/// Central-difference gradient and Hessian with step `h`.
pub fn jet_fd(f: &ScalarField, p: &ChartPoint, h: f64) -> Result<JetValue> {
    let jets = fd_jets(
        p.dim(),
        1,
        p.coords(),
        h,
        |x| f.contains(x),
        |x| vec![f.value(x)],
    )?;
    Ok(jets.into_iter().next().expect("one output"))
}

pub fn jet_fd_array(f: &FieldArray, p: &ChartPoint, h: f64) -> Result<Vec<JetValue>> {
    fd_jets(
        p.dim(),
        f.len(),
        p.coords(),
        h,
        |x| f.contains(x),
        |x| f.values(x),
    )
}
