//! Chart points and coefficient fields evaluated on hyper-dual coordinates.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hyperdual::HyperDual;

/// A point of an open chart of even dimension `n >= 2`.
#[derive(Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ChartPoint {
    coords: Vec<f64>,
}

impl ChartPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let dim = coords.len();
        if dim < 2 || !dim.is_multiple_of(2) {
            return Err(Error::Dimension {
                dim,
                reason: "chart dimension must be even and at least 2",
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite {
                what: "chart point coordinates".into(),
            });
        }
        Ok(Self { coords })
    }

    pub fn origin(dim: usize) -> Result<Self> {
        Self::new(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn norm_squared(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum()
    }
}

impl fmt::Debug for ChartPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("ChartPoint").field(&self.coords).finish()
    }
}

type ScalarFn = dyn Fn(&[HyperDual]) -> HyperDual + Send + Sync;
type ArrayFn = dyn Fn(&[HyperDual]) -> Vec<HyperDual> + Send + Sync;
type Guard = dyn Fn(&[f64]) -> bool + Send + Sync;

fn always(_: &[f64]) -> bool {
    true
}

/// A real coefficient function on a chart together with the predicate marking
/// where it may be evaluated.
#[derive(Clone)]
pub struct ScalarField {
    eval: Arc<ScalarFn>,
    guard: Arc<Guard>,
}

impl ScalarField {
    pub fn new(f: impl Fn(&[HyperDual]) -> HyperDual + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(f),
            guard: Arc::new(always),
        }
    }

    pub fn constant(v: f64) -> Self {
        Self::new(move |_| HyperDual::constant(v))
    }

    pub fn with_guard(mut self, guard: impl Fn(&[f64]) -> bool + Send + Sync + 'static) -> Self {
        self.guard = Arc::new(guard);
        self
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        (self.guard)(x)
    }

    pub fn eval(&self, x: &[HyperDual]) -> HyperDual {
        (self.eval)(x)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let hd: Vec<HyperDual> = x.iter().map(|&v| HyperDual::constant(v)).collect();
        self.eval(&hd).re
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ScalarField")
    }
}

/// Several coefficient functions sharing one evaluation, e.g. the `n×n`
/// components of a metric stored row-major.
#[derive(Clone)]
pub struct FieldArray {
    len: usize,
    eval: Arc<ArrayFn>,
    guard: Arc<Guard>,
}

impl FieldArray {
    pub fn new(
        len: usize,
        f: impl Fn(&[HyperDual]) -> Vec<HyperDual> + Send + Sync + 'static,
    ) -> Self {
        Self {
            len,
            eval: Arc::new(f),
            guard: Arc::new(always),
        }
    }

    /// Bundles independent scalar fields; the guard is the conjunction of theirs.
    pub fn from_scalars(fields: Vec<ScalarField>) -> Self {
        let len = fields.len();
        let guards = fields.clone();
        Self {
            len,
            eval: Arc::new(move |x| fields.iter().map(|f| f.eval(x)).collect()),
            guard: Arc::new(move |x| guards.iter().all(|f| f.contains(x))),
        }
    }

    pub fn with_guard(mut self, guard: impl Fn(&[f64]) -> bool + Send + Sync + 'static) -> Self {
        self.guard = Arc::new(guard);
        self
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        (self.guard)(x)
    }

    pub fn eval(&self, x: &[HyperDual]) -> Vec<HyperDual> {
        let out = (self.eval)(x);
        debug_assert_eq!(out.len(), self.len);
        out
    }

    pub fn values(&self, x: &[f64]) -> Vec<f64> {
        let hd: Vec<HyperDual> = x.iter().map(|&v| HyperDual::constant(v)).collect();
        self.eval(&hd).into_iter().map(|v| v.re).collect()
    }

    /// One output viewed as a standalone scalar field.
    pub fn component(&self, index: usize) -> ScalarField {
        assert!(index < self.len, "component {index} out of range");
        let eval = Arc::clone(&self.eval);
        let guard = Arc::clone(&self.guard);
        ScalarField {
            eval: Arc::new(move |x| eval(x)[index]),
            guard,
        }
    }
}

impl fmt::Debug for FieldArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldArray(len = {})", self.len)
    }
}
