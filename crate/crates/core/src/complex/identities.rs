use nalgebra::{DMatrix, DVector};
use ndarray::{Array3, IxDyn};
use serde::Serialize;

use super::form::{covariant_derivative, dnabla, FormJet, VectorFieldSpec, VectorValuedForm};
use super::nijenhuis::{nijenhuis_from, OperatorJet, VectorJet};
use super::structure::ACStructureField;
use crate::error::{Error, Result};
use crate::field::ChartPoint;
use crate::geometry::{metric_at, ConnectionAtPoint, CurvatureAtPoint, MetricAtPoint, MetricField};
use crate::jet::{jet_array, Order};

/// Absolute identity residual together with the operand scale it is judged against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    pub abs: f64,
    pub scale: f64,
}

impl Residual {
    pub const ZERO: Residual = Residual {
        abs: 0.0,
        scale: 1.0,
    };

    fn between(lhs: &DVector<f64>, rhs: &DVector<f64>, operands: &[&DVector<f64>]) -> Self {
        let abs = (lhs - rhs).amax();
        let scale = 1.0
            + operands
                .iter()
                .map(|v| v.amax())
                .fold(lhs.amax().max(rhs.amax()), f64::max);
        Self { abs, scale }
    }

    pub fn normalized(&self) -> f64 {
        self.abs / self.scale
    }

    pub fn within(&self, tol: f64) -> bool {
        self.abs <= tol * self.scale
    }

    /// The larger normalised residual of the two.
    pub fn worst(self, other: Residual) -> Residual {
        if other.normalized() > self.normalized() {
            other
        } else {
            self
        }
    }
}

/// Everything the identity suite needs at one point, computed once.
#[derive(Debug, Clone)]
pub struct StructureAtPoint {
    pub point: ChartPoint,
    pub metric: MetricAtPoint,
    pub connection: ConnectionAtPoint,
    /// Coordinate-frame curvature.
    pub curvature: CurvatureAtPoint,
    /// `A` as a 1-form with two derivative orders.
    pub a_form: FormJet,
    /// `cov_a[[m, c, j]] = (∇_m A)^c_j`
    pub cov_a: Array3<f64>,
    /// `d^∇A`, with first derivatives.
    pub da: FormJet,
    /// `(d^∇)²A`.
    pub dda: FormJet,
    /// `N_A(∂_i, ∂_j)^k` as `[k, i, j]`.
    pub nijenhuis: Array3<f64>,
    op: OperatorJet,
}

impl StructureAtPoint {
    pub fn new(a: &ACStructureField, g: &MetricField, p: &ChartPoint) -> Result<Self> {
        let n = a.dim();
        if g.dim() != n || p.dim() != n {
            return Err(Error::Shape(
                "structure, metric and point dimensions differ".into(),
            ));
        }
        let metric = metric_at(g, p)?;
        let connection = ConnectionAtPoint::from_metric(&metric);
        let curvature = CurvatureAtPoint::from_parts(&metric, &connection);
        let jets = jet_array(a.operator_field(), p, Order::Second)?;
        let a_form = FormJet::from_jets(n, 1, &jets, true);
        let op = OperatorJet::from_jets(n, &jets);
        let (cov, _) = covariant_derivative(&a_form, &connection)?;
        let cov_a = cov
            .into_dimensionality::<ndarray::Ix3>()
            .map_err(|e| Error::Shape(e.to_string()))?;
        let da = dnabla(&a_form, &connection)?;
        let dda = dnabla(&da, &connection)?;
        let nijenhuis = nijenhuis_from(&op);
        Ok(Self {
            point: p.clone(),
            metric,
            connection,
            curvature,
            a_form,
            cov_a,
            da,
            dda,
            nijenhuis,
            op,
        })
    }

    pub fn dim(&self) -> usize {
        self.point.dim()
    }

    /// Operator matrix `A^c_j` at the point.
    pub fn operator(&self) -> &DMatrix<f64> {
        &self.op.value
    }

    fn apply_a(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.op.value * v
    }

    /// `d^∇A(u, v)`.
    pub fn da_eval(&self, u: &[f64], v: &[f64]) -> DVector<f64> {
        DVector::from_vec(self.da.eval_vectors(&[u, v]))
    }

    /// `(∇_u A)` as an operator matrix.
    pub fn cov_a_along(&self, u: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |c, j| {
            (0..n).map(|m| u[m] * self.cov_a[[m, c, j]]).sum()
        })
    }

    pub fn max_dnabla(&self) -> f64 {
        self.da.max_abs()
    }

    pub fn max_nijenhuis(&self) -> f64 {
        self.nijenhuis.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// `N_A(X, Y)` from the bracket formula using the fields' jets.
    pub fn nijenhuis_fields(&self, x: &VectorJet, y: &VectorJet) -> DVector<f64> {
        self.op.nijenhuis(x, y)
    }

    /// `N_A(X,Y) = A(d^∇A(AX, AY) − d^∇A(X, Y))`.
    pub fn eq1(&self, x: &VectorJet, y: &VectorJet) -> Residual {
        let lhs = self.nijenhuis_fields(x, y);
        let (xv, yv) = (x.value.as_slice(), y.value.as_slice());
        let (ax, ay) = (self.apply_a(&x.value), self.apply_a(&y.value));
        let d_aa = self.da_eval(ax.as_slice(), ay.as_slice());
        let d_xy = self.da_eval(xv, yv);
        let rhs = self.apply_a(&(&d_aa - &d_xy));
        Residual::between(&lhs, &rhs, &[&d_aa, &d_xy])
    }

    /// `−A∘N_A = Aᵀ∘d^∇A∘A − d^∇A`, using the bilinear component matrices `[(d^∇A)_c]`.
    pub fn eq2(&self, x: &VectorJet, y: &VectorJet) -> Residual {
        let n = self.dim();
        let m = &self.op.value;
        let lhs = -(m * self.nijenhuis_fields(x, y));
        let mut sandwiched = DVector::zeros(n);
        let mut plain = DVector::zeros(n);
        for c in 0..n {
            let d = DMatrix::from_fn(n, n, |i, j| self.da.value[IxDyn(&[c, i, j])]);
            let s = m.transpose() * &d * m;
            sandwiched[c] = (x.value.transpose() * s * &y.value)[(0, 0)];
            plain[c] = (x.value.transpose() * d * &y.value)[(0, 0)];
        }
        let rhs = &sandwiched - &plain;
        Residual::between(&lhs, &rhs, &[&sandwiched, &plain])
    }

    /// `d^∇(A∘A) = 0` read two ways: the 2-form
    /// `(∇_X A)(AY) − (∇_Y A)(AX) + A(d^∇A(X, Y))`, and the operator relation
    /// `(∇_Z A)A + A(∇_Z A)` for `Z ∈ {X, Y}`. Reports the worse of the two.
    pub fn anticommute(&self, x: &[f64], y: &[f64]) -> Residual {
        let a = &self.op.value;
        let (xv, yv) = (DVector::from_column_slice(x), DVector::from_column_slice(y));
        let (cx, cy) = (self.cov_a_along(x), self.cov_a_along(y));
        let first = &cx * (a * &yv) - &cy * (a * &xv);
        let second = a * self.da_eval(x, y);
        let zero = DVector::zeros(x.len());
        let form = Residual::between(&(&first + &second), &zero, &[&first, &second]);
        let mut op = Residual::ZERO;
        for c in [&cx, &cy] {
            let s = c * a + a * c;
            let flat = DVector::from_iterator(s.len(), s.iter().copied());
            let parts = DVector::from_iterator(s.len(), (c * a).iter().copied());
            op = op.worst(Residual::between(
                &flat,
                &DVector::zeros(s.len()),
                &[&parts],
            ));
        }
        form.worst(op)
    }

    /// `R(X,Y)AZ + R(Y,Z)AX + R(Z,X)AY` on coordinate frame indices.
    pub fn curvature_cyclic(&self, i: usize, j: usize, k: usize) -> DVector<f64> {
        let n = self.dim();
        let col = |j: usize| -> Vec<f64> { (0..n).map(|c| self.op.value[(c, j)]).collect() };
        let e = |i: usize| -> Vec<f64> {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            v
        };
        let r = &self.curvature;
        let sum: Vec<f64> = r
            .apply(&e(i), &e(j), &col(k))
            .into_iter()
            .zip(r.apply(&e(j), &e(k), &col(i)))
            .zip(r.apply(&e(k), &e(i), &col(j)))
            .map(|((a, b), c)| a + b + c)
            .collect();
        DVector::from_vec(sum)
    }

    /// `((d^∇)²A(e_i, e_j, e_k), curvature cyclic sum)` and their residual.
    pub fn cyclic(&self, i: usize, j: usize, k: usize) -> (DVector<f64>, DVector<f64>, Residual) {
        let lhs = DVector::from_vec(self.dda.at(&[i, j, k]));
        let rhs = self.curvature_cyclic(i, j, k);
        let res = Residual::between(&lhs, &rhs, &[]);
        (lhs, rhs, res)
    }

    /// Worst cyclic residual over every index triple.
    pub fn cyclic_all(&self) -> Residual {
        let n = self.dim();
        let mut worst = Residual::ZERO;
        for (i, j, k) in ndarray::indices((n, n, n)).into_iter() {
            worst = worst.worst(self.cyclic(i, j, k).2);
        }
        worst
    }

    /// `Rm(X,Y,AZ,W) + Rm(Y,Z,AX,W) + Rm(Z,X,AY,W)` in coordinates.
    pub fn metric_cyclic(&self, x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> f64 {
        let a = |v: &[f64]| -> Vec<f64> {
            self.apply_a(&DVector::from_column_slice(v))
                .iter()
                .copied()
                .collect()
        };
        let r = &self.curvature;
        r.rm_eval(x, y, &a(z), w) + r.rm_eval(y, z, &a(x), w) + r.rm_eval(z, x, &a(y), w)
    }

    /// `max |d^∇ Id|` together with the bracket-form torsion `Γ^k_ij − Γ^k_ji`.
    pub fn torsion(&self) -> Result<f64> {
        let id = VectorValuedForm::identity(self.dim()).jet(&self.point)?;
        let d = dnabla(&id, &self.connection)?;
        Ok(d.max_abs().max(self.connection.torsion_max()))
    }
}

fn prepare(
    a: &ACStructureField,
    g: &MetricField,
    p: &ChartPoint,
    x: &VectorFieldSpec,
    y: &VectorFieldSpec,
) -> Result<(StructureAtPoint, VectorJet, VectorJet)> {
    let s = StructureAtPoint::new(a, g, p)?;
    Ok((s, VectorJet::of(x, p)?, VectorJet::of(y, p)?))
}

pub fn check_eq1(
    a: &ACStructureField,
    g: &MetricField,
    p: &ChartPoint,
    x: &VectorFieldSpec,
    y: &VectorFieldSpec,
) -> Result<Residual> {
    let (s, xj, yj) = prepare(a, g, p, x, y)?;
    Ok(s.eq1(&xj, &yj))
}

pub fn check_eq2(
    a: &ACStructureField,
    g: &MetricField,
    p: &ChartPoint,
    x: &VectorFieldSpec,
    y: &VectorFieldSpec,
) -> Result<Residual> {
    let (s, xj, yj) = prepare(a, g, p, x, y)?;
    Ok(s.eq2(&xj, &yj))
}

pub fn check_anticommute(
    a: &ACStructureField,
    g: &MetricField,
    p: &ChartPoint,
    x: &[f64],
    y: &[f64],
) -> Result<Residual> {
    Ok(StructureAtPoint::new(a, g, p)?.anticommute(x, y))
}

/// Both sides of `(d^∇)²A(e_i, e_j, e_k) = R(e_i,e_j)Ae_k + R(e_j,e_k)Ae_i + R(e_k,e_i)Ae_j`.
pub fn cyclic_curvature_sum(
    a: &ACStructureField,
    g: &MetricField,
    p: &ChartPoint,
    i: usize,
    j: usize,
    k: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = a.dim();
    if i >= n || j >= n || k >= n {
        return Err(Error::Index(format!(
            "({i}, {j}, {k}) out of range for dimension {n}"
        )));
    }
    let (lhs, rhs, _) = StructureAtPoint::new(a, g, p)?.cyclic(i, j, k);
    Ok((lhs.iter().copied().collect(), rhs.iter().copied().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::make_ac_field;
    use crate::fields::{perturbed_metric, random_vector_components};
    use crate::geometry::{model_metric, ModelMetricSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const TOL: f64 = 1e-6;

    fn point(n: usize, rng: &mut impl Rng) -> ChartPoint {
        ChartPoint::new((0..n).map(|_| rng.gen_range(-0.5..0.5)).collect()).unwrap()
    }

    fn metric(n: usize, rng: &mut impl Rng) -> MetricField {
        match rng.gen_range(0..3) {
            0 => perturbed_metric(n, rng.gen(), 0.3).unwrap(),
            1 => model_metric(ModelMetricSpec::new(rng.gen_range(-1.5..1.5), n).unwrap()),
            _ => MetricField::flat(n),
        }
    }

    fn sample(n: usize, rng: &mut ChaCha8Rng) -> (StructureAtPoint, VectorJet, VectorJet) {
        let a = make_ac_field(n, rng.gen(), rng.gen_range(0.0..0.2)).unwrap();
        let g = metric(n, rng);
        let p = point(n, rng);
        let x = VectorFieldSpec::new(random_vector_components(n, rng));
        let y = VectorFieldSpec::new(random_vector_components(n, rng));
        prepare(&a, &g, &p, &x, &y).unwrap()
    }

    #[test]
    fn identities_hold_on_random_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        for n in [2, 4, 6] {
            for _ in 0..6 {
                let (s, x, y) = sample(n, &mut rng);
                let (xv, yv) = (x.value.as_slice().to_vec(), y.value.as_slice().to_vec());
                for (name, r) in [
                    ("eq1", s.eq1(&x, &y)),
                    ("eq2", s.eq2(&x, &y)),
                    ("anticommute", s.anticommute(&xv, &yv)),
                    ("cyclic", s.cyclic_all()),
                ] {
                    assert!(r.within(TOL), "n={n} {name}: {r:?}");
                }
                assert!(s.torsion().unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn eq1_and_eq2_agree_on_magnitude() {
        // −A∘N has the same norm as N up to ‖A‖, so the two residuals track each other
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for n in [4, 6] {
            let (s, x, y) = sample(n, &mut rng);
            let n_field = s.nijenhuis_fields(&x, &y);
            let an = s.operator() * &n_field;
            assert!(an.amax() <= s.operator().norm() * n_field.amax() + 1e-8);
        }
    }

    #[test]
    fn flat_constant_structure_is_trivial() {
        let a = ACStructureField::standard(4).unwrap();
        let g = MetricField::flat(4);
        let mut rng = ChaCha8Rng::seed_from_u64(102);
        let p = point(4, &mut rng);
        let s = StructureAtPoint::new(&a, &g, &p).unwrap();
        assert_eq!(s.max_dnabla(), 0.0);
        assert_eq!(s.max_nijenhuis(), 0.0);
        assert_eq!(s.cyclic_all().abs, 0.0);
        let x = VectorFieldSpec::new(random_vector_components(4, &mut rng));
        let y = VectorFieldSpec::new(random_vector_components(4, &mut rng));
        assert!(check_eq1(&a, &g, &p, &x, &y).unwrap().abs < 1e-14);
        assert!(check_eq2(&a, &g, &p, &x, &y).unwrap().abs < 1e-14);
    }

    #[test]
    fn surface_structure_is_parallel() {
        // in real dimension 2 every A with A² = −I compatible with a conformal metric is ∇-parallel
        let a = ACStructureField::standard(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(103);
        for c0 in [1.0, -1.0, 2.0] {
            let g = model_metric(ModelMetricSpec::new(c0, 2).unwrap());
            for _ in 0..5 {
                let p = point(2, &mut rng);
                let s = StructureAtPoint::new(&a, &g, &p).unwrap();
                assert!(s.max_dnabla() < 1e-8);
                assert!(s.max_nijenhuis() < 1e-8);
                for (i, j, k) in ndarray::indices((2, 2, 2)).into_iter() {
                    assert!(s.curvature_cyclic(i, j, k).amax() < 1e-8);
                }
                let v: Vec<Vec<f64>> = (0..4)
                    .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
                    .collect();
                assert!(s.metric_cyclic(&v[0], &v[1], &v[2], &v[3]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn j0_on_round_metric_has_vanishing_nijenhuis_but_not_dnabla() {
        let a = ACStructureField::standard(4).unwrap();
        let g = model_metric(ModelMetricSpec::new(1.0, 4).unwrap());
        let p = ChartPoint::new(vec![0.3, -0.2, 0.1, 0.4]).unwrap();
        let s = StructureAtPoint::new(&a, &g, &p).unwrap();
        assert_eq!(s.max_nijenhuis(), 0.0);
        assert!(s.max_dnabla() > 1e-2);
        // the 2-form relation still holds, so the failure is not an engine defect
        assert!(s
            .anticommute(&[1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0])
            .within(TOL));
    }

    #[test]
    fn j0_dnabla_matches_conformal_formula() {
        // g = e^{2φ}δ, A constant orthogonal and antisymmetric:
        // d^∇A(X,Y) = X dφ(AY) − Y dφ(AX) − AX dφ(Y) + AY dφ(X) − 2⟨X,AY⟩∇φ
        let mut rng = ChaCha8Rng::seed_from_u64(104);
        for (c0, n) in [(1.0, 4), (-1.0, 4), (2.0, 6)] {
            let a = ACStructureField::standard(n).unwrap();
            let g = model_metric(ModelMetricSpec::new(c0, n).unwrap());
            let j = crate::complex::standard_j0(n);
            for _ in 0..5 {
                let p = point(n, &mut rng);
                let x0 = p.coords();
                let q = 1.0 + c0 * p.norm_squared() / 4.0;
                let dphi = DVector::from_iterator(n, x0.iter().map(|&xk| -c0 * xk / (2.0 * q)));
                let s = StructureAtPoint::new(&a, &g, &p).unwrap();
                let x = DVector::from_iterator(n, (0..n).map(|_| rng.gen_range(-1.0..1.0)));
                let y = DVector::from_iterator(n, (0..n).map(|_| rng.gen_range(-1.0..1.0)));
                let (ax, ay) = (&j * &x, &j * &y);
                let expect = &x * dphi.dot(&ay) - &y * dphi.dot(&ax) - &ax * dphi.dot(&y)
                    + &ay * dphi.dot(&x)
                    - &dphi * (2.0 * x.dot(&ay));
                let got = s.da_eval(x.as_slice(), y.as_slice());
                assert!((got - &expect).amax() < 1e-12);
                if dphi.amax() > 1e-3 {
                    assert!(expect.amax() > 0.0);
                }
            }
        }
    }

    #[test]
    fn cyclic_sum_index_errors() {
        let a = ACStructureField::standard(2).unwrap();
        let g = MetricField::flat(2);
        let p = ChartPoint::origin(2).unwrap();
        assert!(matches!(
            cyclic_curvature_sum(&a, &g, &p, 0, 1, 2),
            Err(Error::Index(_))
        ));
        let (l, r) = cyclic_curvature_sum(&a, &g, &p, 0, 1, 0).unwrap();
        assert_eq!(l, vec![0.0, 0.0]);
        assert_eq!(r, vec![0.0, 0.0]);
    }

    #[test]
    fn residual_scaling() {
        let r = Residual {
            abs: 2e-6,
            scale: 4.0,
        };
        assert!(r.within(1e-6));
        assert!(!r.within(1e-7));
        assert_eq!(r.worst(Residual::ZERO), r);
    }
}
