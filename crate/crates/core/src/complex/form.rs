use ndarray::{ArrayD, Dimension, IxDyn};

use crate::error::{Error, Result};
use crate::field::{ChartPoint, FieldArray, ScalarField};
use crate::geometry::{christoffel, ConnectionAtPoint, MetricField};
use crate::hyperdual::HyperDual;
use crate::jet::{jet_array, JetValue, Order};

/// Vector field given by its coordinate-frame coefficients.
#[derive(Debug, Clone)]
pub struct VectorFieldSpec {
    components: FieldArray,
}

impl VectorFieldSpec {
    pub fn new(components: FieldArray) -> Self {
        Self { components }
    }

    pub fn from_scalars(components: Vec<ScalarField>) -> Self {
        Self::new(FieldArray::from_scalars(components))
    }

    pub fn constant(v: &[f64]) -> Self {
        let v = v.to_vec();
        Self::new(FieldArray::new(v.len(), move |_| {
            v.iter().map(|&c| HyperDual::constant(c)).collect()
        }))
    }

    /// `f · X`.
    pub fn scaled(&self, f: ScalarField) -> Self {
        let inner = self.components.clone();
        let guard = (inner.clone(), f.clone());
        Self::new(
            FieldArray::new(inner.len(), move |x| {
                let s = f.eval(x);
                inner.eval(x).into_iter().map(|c| c * s).collect()
            })
            .with_guard(move |x| guard.0.contains(x) && guard.1.contains(x)),
        )
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &FieldArray {
        &self.components
    }
}

/// A tangent-bundle-valued `k`-form given by its values on coordinate frame fields.
///
/// `eval(x, [i₁, .., i_k])` returns the `n` coordinate components of
/// `α(∂_{i₁}, .., ∂_{i_k})`.
#[derive(Debug, Clone)]
pub struct VectorValuedForm {
    dim: usize,
    degree: usize,
    components: FieldArray,
}

fn tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

impl VectorValuedForm {
    pub fn new(
        dim: usize,
        degree: usize,
        eval: impl Fn(&[HyperDual], &[usize]) -> Vec<HyperDual> + Send + Sync + 'static,
    ) -> Result<Self> {
        if degree > 3 {
            return Err(Error::Dimension {
                dim: degree,
                reason: "form degree must be at most 3",
            });
        }
        let idx = tuples(dim, degree);
        let len = dim * idx.len();
        // storage is [c, i₁, .., i_k] row-major
        let components = FieldArray::new(len, move |x| {
            let per: Vec<Vec<HyperDual>> = idx.iter().map(|t| eval(x, t)).collect();
            let mut out = vec![HyperDual::ZERO; len];
            let m = per.len();
            for (t, vals) in per.iter().enumerate() {
                for (c, v) in vals.iter().enumerate() {
                    out[c * m + t] = *v;
                }
            }
            out
        });
        Ok(Self {
            dim,
            degree,
            components,
        })
    }

    /// `Id` viewed as a `T_M`-valued 1-form.
    pub fn identity(dim: usize) -> Self {
        Self::new(dim, 1, move |_, idx| {
            (0..dim)
                .map(|c| HyperDual::constant(if c == idx[0] { 1.0 } else { 0.0 }))
                .collect()
        })
        .expect("degree 1")
    }

    /// A vector field as a 0-form.
    pub fn from_vector_field(x: &VectorFieldSpec) -> Self {
        let fields = x.components().clone();
        Self {
            dim: x.dim(),
            degree: 0,
            components: fields,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn jet(&self, p: &ChartPoint) -> Result<FormJet> {
        let jets = jet_array(&self.components, p, Order::Second)?;
        Ok(FormJet::from_jets(self.dim, self.degree, &jets, true))
    }

    pub fn eval_at(&self, p: &ChartPoint, indices: &[usize]) -> Vec<f64> {
        let vals = self.components.values(p.coords());
        let per = self.dim.pow(self.degree as u32);
        let offset = flat_offset(self.dim, indices);
        (0..self.dim).map(|c| vals[c * per + offset]).collect()
    }

    /// Largest deviation from full antisymmetry under adjacent transpositions.
    pub fn antisymmetry_defect(&self, p: &ChartPoint) -> f64 {
        let mut worst = 0.0f64;
        for t in tuples(self.dim, self.degree) {
            let base = self.eval_at(p, &t);
            for s in 0..self.degree.saturating_sub(1) {
                let mut swapped = t.clone();
                swapped.swap(s, s + 1);
                let other = self.eval_at(p, &swapped);
                for (a, b) in base.iter().zip(&other) {
                    worst = worst.max((a + b).abs());
                }
            }
        }
        worst
    }
}

fn flat_offset(n: usize, indices: &[usize]) -> usize {
    indices.iter().fold(0, |acc, &i| acc * n + i)
}

/// Components of a vector-valued form at a point with up to two derivative orders.
///
/// `value` has shape `[n; k + 1]` indexed `[c, i₁, .., i_k]`; `grad` appends the
/// derivative direction `l` and `hess` appends `l, m`.
#[derive(Debug, Clone)]
pub struct FormJet {
    pub degree: usize,
    pub value: ArrayD<f64>,
    pub grad: Option<ArrayD<f64>>,
    pub hess: Option<ArrayD<f64>>,
}

impl FormJet {
    pub fn from_jets(n: usize, degree: usize, jets: &[JetValue], second_order: bool) -> Self {
        let shape = vec![n; degree + 1];
        let value = ArrayD::from_shape_vec(IxDyn(&shape), jets.iter().map(|j| j.value).collect())
            .expect("component count matches shape");
        let mut gshape = shape.clone();
        gshape.push(n);
        let grad = ArrayD::from_shape_vec(
            IxDyn(&gshape),
            jets.iter().flat_map(|j| j.grad.iter().copied()).collect(),
        )
        .expect("gradient shape");
        let hess = second_order.then(|| {
            let mut hshape = gshape.clone();
            hshape.push(n);
            ArrayD::from_shape_vec(
                IxDyn(&hshape),
                jets.iter()
                    .flat_map(|j| (0..n).flat_map(move |l| (0..n).map(move |m| j.hess[(l, m)])))
                    .collect(),
            )
            .expect("hessian shape")
        });
        Self {
            degree,
            value,
            grad: Some(grad),
            hess,
        }
    }

    pub fn dim(&self) -> usize {
        self.value.shape()[0]
    }

    /// Value on frame indices as an `n`-vector.
    pub fn at(&self, indices: &[usize]) -> Vec<f64> {
        let mut idx = vec![0];
        idx.extend_from_slice(indices);
        (0..self.dim())
            .map(|c| {
                idx[0] = c;
                self.value[IxDyn(&idx)]
            })
            .collect()
    }

    /// `α(u₁, .., u_k)` for arbitrary coordinate-component vectors.
    pub fn eval_vectors(&self, vectors: &[&[f64]]) -> Vec<f64> {
        assert_eq!(vectors.len(), self.degree);
        let n = self.dim();
        let mut out = vec![0.0; n];
        for t in tuples(n, self.degree) {
            let w: f64 = t.iter().zip(vectors).map(|(&i, v)| v[i]).product();
            if w == 0.0 {
                continue;
            }
            for (c, v) in self.at(&t).into_iter().enumerate() {
                out[c] += w * v;
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.value.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

/// `(∇_m α)` as an array `[m, c, i₁, .., i_k]`, plus its derivative `[.., l]` when
/// `α` carries second derivatives.
pub fn covariant_derivative(
    alpha: &FormJet,
    conn: &ConnectionAtPoint,
) -> Result<(ArrayD<f64>, Option<ArrayD<f64>>)> {
    let n = alpha.dim();
    let k = alpha.degree;
    let grad = alpha
        .grad
        .as_ref()
        .ok_or_else(|| Error::Shape("covariant derivative needs first derivatives".into()))?;
    let (gam, dgam) = (&conn.gamma, &conn.dgamma);
    let mut shape = vec![n; k + 2];
    let cov = ArrayD::from_shape_fn(IxDyn(&shape), |ix| {
        let ix = ix.slice();
        let (m, c, js) = (ix[0], ix[1], &ix[2..]);
        let mut src: Vec<usize> = Vec::with_capacity(k + 2);
        src.push(c);
        src.extend_from_slice(js);
        src.push(m);
        let mut v = grad[IxDyn(&src)];
        src.pop();
        for d in 0..n {
            src[0] = d;
            v += gam[[c, m, d]] * alpha.value[IxDyn(&src)];
        }
        src[0] = c;
        for r in 0..k {
            let orig = src[r + 1];
            for d in 0..n {
                src[r + 1] = d;
                v -= gam[[d, m, orig]] * alpha.value[IxDyn(&src)];
            }
            src[r + 1] = orig;
        }
        v
    });
    let dcov = match &alpha.hess {
        None => None,
        Some(hess) => {
            shape.push(n);
            Some(ArrayD::from_shape_fn(IxDyn(&shape), |ix| {
                let ix = ix.slice();
                let (m, c, js, l) = (ix[0], ix[1], &ix[2..k + 2], ix[k + 2]);
                let mut src: Vec<usize> = Vec::with_capacity(k + 3);
                src.push(c);
                src.extend_from_slice(js);
                src.push(m);
                src.push(l);
                let mut v = hess[IxDyn(&src)];
                src.truncate(k + 1);
                // src = [c, js]
                for d in 0..n {
                    src[0] = d;
                    let av = alpha.value[IxDyn(&src)];
                    src.push(l);
                    let ag = grad[IxDyn(&src)];
                    src.pop();
                    v += dgam[[c, m, d, l]] * av + gam[[c, m, d]] * ag;
                }
                src[0] = c;
                for r in 0..k {
                    let orig = src[r + 1];
                    for d in 0..n {
                        src[r + 1] = d;
                        let av = alpha.value[IxDyn(&src)];
                        src.push(l);
                        let ag = grad[IxDyn(&src)];
                        src.pop();
                        v -= dgam[[d, m, orig, l]] * av + gam[[d, m, orig]] * ag;
                    }
                    src[r + 1] = orig;
                }
                v
            }))
        }
    };
    Ok((cov, dcov))
}

/// `(d^∇α)(e_{i₀}, .., e_{i_k}) = Σ_s (−1)^s (∇_{i_s} α)(.., ê_{i_s}, ..)` on coordinate
/// frame fields. The output carries first derivatives when `α` carries second ones.
pub fn dnabla(alpha: &FormJet, conn: &ConnectionAtPoint) -> Result<FormJet> {
    let n = alpha.dim();
    let k = alpha.degree;
    if k >= 3 {
        return Err(Error::Dimension {
            dim: k,
            reason: "d^∇ is implemented for degrees 0, 1 and 2",
        });
    }
    let (cov, dcov) = covariant_derivative(alpha, conn)?;
    let out_shape = vec![n; k + 2];
    let antisym = |src: &ArrayD<f64>, ix: &[usize], extra: Option<usize>| {
        let (c, is) = (ix[0], &ix[1..k + 2]);
        let mut acc = 0.0;
        let mut key: Vec<usize> = Vec::with_capacity(k + 3);
        for s in 0..=k {
            key.clear();
            key.push(is[s]);
            key.push(c);
            key.extend(
                is.iter()
                    .enumerate()
                    .filter(|&(t, _)| t != s)
                    .map(|(_, &i)| i),
            );
            if let Some(l) = extra {
                key.push(l);
            }
            let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * src[IxDyn(&key)];
        }
        acc
    };
    let value = ArrayD::from_shape_fn(IxDyn(&out_shape), |ix| antisym(&cov, ix.slice(), None));
    let grad = dcov.map(|d| {
        let mut gshape = out_shape.clone();
        gshape.push(n);
        ArrayD::from_shape_fn(IxDyn(&gshape), |ix| {
            let ix = ix.slice();
            antisym(&d, &ix[..k + 2], Some(ix[k + 2]))
        })
    });
    Ok(FormJet {
        degree: k + 1,
        value,
        grad,
        hess: None,
    })
}

/// `d^∇α` at `p` evaluated on coordinate frame indices.
pub fn dnabla_at(
    alpha: &VectorValuedForm,
    g: &MetricField,
    p: &ChartPoint,
    indices: &[usize],
) -> Result<Vec<f64>> {
    if indices.len() != alpha.degree() + 1 {
        return Err(Error::Index(format!(
            "d^∇ of a {}-form takes {} indices, got {}",
            alpha.degree(),
            alpha.degree() + 1,
            indices.len()
        )));
    }
    if indices.iter().any(|&i| i >= alpha.dim()) {
        return Err(Error::Index(format!("indices {indices:?} out of range")));
    }
    let conn = christoffel(g, p)?;
    Ok(dnabla(&alpha.jet(p)?, &conn)?.at(indices))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::random_vector_components;
    use crate::geometry::{model_metric, ModelMetricSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn flat_constant_structure_is_parallel() {
        let n = 4;
        let j0 = super::super::standard_j0(n);
        let a = VectorValuedForm::new(n, 1, move |_, idx| {
            (0..n)
                .map(|c| HyperDual::constant(j0[(c, idx[0])]))
                .collect()
        })
        .unwrap();
        let p = ChartPoint::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        for (i, j) in [(0, 1), (2, 3), (1, 3)] {
            let v = dnabla_at(&a, &MetricField::flat(n), &p, &[i, j]).unwrap();
            assert!(v.iter().all(|&c| c == 0.0));
        }
    }

    #[test]
    fn degree_zero_is_covariant_derivative() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in [2, 4] {
            let g = crate::fields::perturbed_metric(n, rng.gen(), 0.3).unwrap();
            let comps = random_vector_components(n, &mut rng);
            let z = VectorFieldSpec::new(comps.clone());
            let form = VectorValuedForm::from_vector_field(&z);
            let p = ChartPoint::new((0..n).map(|_| rng.gen_range(-0.5..0.5)).collect()).unwrap();
            let conn = christoffel(&g, &p).unwrap();
            let zj = jet_array(&comps, &p, Order::First).unwrap();
            for i in 0..n {
                let got = dnabla_at(&form, &g, &p, &[i]).unwrap();
                // ∇_i Z^c = ∂_i Z^c + Γ^c_{i d} Z^d
                for c in 0..n {
                    let mut expect = zj[c].grad[i];
                    for d in 0..n {
                        expect += conn.gamma[[c, i, d]] * zj[d].value;
                    }
                    assert!((got[c] - expect).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn identity_form_has_vanishing_dnabla() {
        // d^∇ Id is the torsion of ∇
        let g = model_metric(ModelMetricSpec::new(1.0, 4).unwrap());
        let p = ChartPoint::new(vec![0.3, -0.2, 0.1, 0.4]).unwrap();
        let conn = christoffel(&g, &p).unwrap();
        let d = dnabla(&VectorValuedForm::identity(4).jet(&p).unwrap(), &conn).unwrap();
        assert!(d.max_abs() < 1e-9);
    }

    #[test]
    fn dnabla_output_is_antisymmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 4;
        let a = crate::complex::make_ac_field(n, rng.gen(), 0.1).unwrap();
        let g = model_metric(ModelMetricSpec::new(1.0, n).unwrap());
        let p = ChartPoint::new(vec![0.2, 0.1, -0.3, 0.25]).unwrap();
        let jets = jet_array(a.operator_field(), &p, Order::Second).unwrap();
        let form = FormJet::from_jets(n, 1, &jets, true);
        let conn = christoffel(&g, &p).unwrap();
        let d1 = dnabla(&form, &conn).unwrap();
        let d2 = dnabla(&d1, &conn).unwrap();
        for t in tuples(n, 2) {
            let (x, y) = (d1.at(&t), d1.at(&[t[1], t[0]]));
            assert!(x.iter().zip(&y).all(|(a, b)| (a + b).abs() < 1e-12));
        }
        for t in tuples(n, 3) {
            let x = d2.at(&t);
            for perm in [[t[1], t[0], t[2]], [t[0], t[2], t[1]]] {
                let y = d2.at(&perm);
                assert!(x.iter().zip(&y).all(|(a, b)| (a + b).abs() < 1e-12));
            }
        }
        assert!(d2.grad.is_none());
        assert!(dnabla(
            &FormJet {
                degree: 3,
                ..d2.clone()
            },
            &conn
        )
        .is_err());
    }

    #[test]
    fn input_antisymmetry_check() {
        let good = VectorValuedForm::new(2, 2, |x, idx| {
            let s = match (idx[0], idx[1]) {
                (0, 1) => 1.0,
                (1, 0) => -1.0,
                _ => 0.0,
            };
            vec![x[0] * s, x[1] * s]
        })
        .unwrap();
        let bad = VectorValuedForm::new(2, 2, |x, _| vec![x[0], x[1]]).unwrap();
        let p = ChartPoint::new(vec![0.5, 0.25]).unwrap();
        assert_eq!(good.antisymmetry_defect(&p), 0.0);
        assert!(bad.antisymmetry_defect(&p) > 0.1);
    }

    #[test]
    fn wrong_index_count_rejected() {
        let form = VectorValuedForm::identity(2);
        let p = ChartPoint::origin(2).unwrap();
        assert!(matches!(
            dnabla_at(&form, &MetricField::flat(2), &p, &[0]),
            Err(Error::Index(_))
        ));
    }
}
