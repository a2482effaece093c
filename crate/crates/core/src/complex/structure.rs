use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{ChartPoint, FieldArray, ScalarField};
use crate::fields::PERTURBATION_BOX;
use crate::hyperdual::HyperDual;
use crate::poly::Polynomial;

/// Block-diagonal standard structure: `J₀(E₂ₘ₋₁) = E₂ₘ`, `J₀(E₂ₘ) = −E₂ₘ₋₁` (1-based).
///
/// Returned in operator (column-acting) form.
pub fn standard_j0(dim: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(dim, dim);
    for m in 0..dim / 2 {
        j[(2 * m + 1, 2 * m)] = 1.0;
        j[(2 * m, 2 * m + 1)] = -1.0;
    }
    j
}

/// A (1,1)-tensor field with `A∘A = −Id`.
///
/// Internally the components are the operator matrix `op[c][j] = A^c_j`, so
/// `(A v)^c = Σ_j A^c_j v^j`. Frame components in the row-is-input convention
/// `A(E_a) = Σ_b A_ab E_b` come from [`ACStructureField::frame_components`].
#[derive(Debug, Clone)]
pub struct ACStructureField {
    dim: usize,
    op: FieldArray,
}

impl ACStructureField {
    pub fn from_operator(dim: usize, op: FieldArray) -> Result<Self> {
        if dim < 2 || !dim.is_multiple_of(2) {
            return Err(Error::Dimension {
                dim,
                reason: "almost-complex structures need even dimension",
            });
        }
        if op.len() != dim * dim {
            return Err(Error::Shape(format!(
                "structure needs {} components, got {}",
                dim * dim,
                op.len()
            )));
        }
        Ok(Self { dim, op })
    }

    /// From components `A_ab` with `A(E_a) = Σ_b A_ab E_b`, row-major in `(a, b)`.
    pub fn from_frame_components(dim: usize, components: Vec<ScalarField>) -> Result<Self> {
        if components.len() != dim * dim {
            return Err(Error::Shape(format!(
                "structure needs {} components, got {}",
                dim * dim,
                components.len()
            )));
        }
        let reordered: Vec<ScalarField> = (0..dim * dim)
            .map(|idx| {
                let (c, j) = (idx / dim, idx % dim);
                components[j * dim + c].clone()
            })
            .collect();
        Self::from_operator(dim, FieldArray::from_scalars(reordered))
    }

    pub fn constant(op: DMatrix<f64>) -> Result<Self> {
        let dim = op.nrows();
        let values: Vec<f64> = (0..dim * dim)
            .map(|idx| op[(idx / dim, idx % dim)])
            .collect();
        Self::from_operator(
            dim,
            FieldArray::new(dim * dim, move |_| {
                values.iter().map(|&v| HyperDual::constant(v)).collect()
            }),
        )
    }

    pub fn standard(dim: usize) -> Result<Self> {
        Self::constant(standard_j0(dim))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operator_field(&self) -> &FieldArray {
        &self.op
    }

    pub fn operator_at(&self, p: &ChartPoint) -> Result<DMatrix<f64>> {
        if !self.op.contains(p.coords()) {
            return Err(Error::Domain {
                point: p.coords().to_vec(),
            });
        }
        let v = self.op.values(p.coords());
        Ok(DMatrix::from_row_slice(self.dim, self.dim, &v))
    }

    /// `max |A(p)² + I|`.
    pub fn square_defect(&self, p: &ChartPoint) -> Result<f64> {
        let a = self.operator_at(p)?;
        Ok((&a * &a + DMatrix::identity(self.dim, self.dim)).amax())
    }

    /// `max |A(p) − A(p)ᵀ|`; strictly positive for any exact structure.
    pub fn asymmetry(&self, p: &ChartPoint) -> Result<f64> {
        let a = self.operator_at(p)?;
        Ok((&a - a.transpose()).amax())
    }
}

/// Frame components `A_ab` (`A(E_a) = Σ_b A_ab E_b`) of an operator matrix in the frame
/// whose rows are the `E_a`.
pub fn frame_components(op: &DMatrix<f64>, frame: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let cols = frame.transpose();
    let inv = cols
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Shape("frame vectors are linearly dependent".into()))?;
    // column a of inv·op·cols holds the frame components of A(E_a)
    Ok((inv * op * cols).transpose())
}

impl ACStructureField {
    pub fn frame_components(&self, p: &ChartPoint, frame: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        frame_components(&self.operator_at(p)?, frame)
    }
}

/// Solves `m · out = rhs` column by column with partial pivoting on the real parts.
fn solve(mut m: Vec<HyperDual>, mut rhs: Vec<HyperDual>, n: usize) -> Vec<HyperDual> {
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a * n + col].re.abs().total_cmp(&m[b * n + col].re.abs()))
            .expect("non-empty");
        if pivot != col {
            for k in 0..n {
                m.swap(col * n + k, pivot * n + k);
                rhs.swap(col * n + k, pivot * n + k);
            }
        }
        let inv = m[col * n + col].recip();
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = m[row * n + col] * inv;
            if f == HyperDual::ZERO {
                continue;
            }
            for k in 0..n {
                let (mv, rv) = (m[col * n + k], rhs[col * n + k]);
                m[row * n + k] -= f * mv;
                rhs[row * n + k] -= f * rv;
            }
        }
    }
    for row in 0..n {
        let inv = m[row * n + row].recip();
        for k in 0..n {
            rhs[row * n + k] *= inv;
        }
    }
    rhs
}

/// `A(x) = B(x) J₀ B(x)⁻¹` with `B = I + ε P(x)`, `P` a seeded quadratic-polynomial matrix.
///
/// `P` is scaled so that `‖P‖_F <= 4` on the box `|xᵢ| < 0.6`, hence for `ε <= 0.2`
/// the condition number of `B` stays below `(1 + 0.8) / (1 − 0.8) = 9` there.
pub fn make_ac_field(dim: usize, seed: u64, epsilon: f64) -> Result<ACStructureField> {
    if !(0.0..=0.2).contains(&epsilon) {
        return Err(Error::config(
            "epsilon",
            format!("{epsilon} is outside [0, 0.2]"),
        ));
    }
    if dim < 2 || !dim.is_multiple_of(2) {
        return Err(Error::Dimension {
            dim,
            reason: "almost-complex structures need even dimension",
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut polys: Vec<Polynomial> = (0..dim * dim)
        .map(|_| Polynomial::random(dim, 2, &mut rng))
        .collect();
    let frob = polys
        .iter()
        .map(|p| p.bound_on_box(PERTURBATION_BOX).powi(2))
        .sum::<f64>()
        .sqrt();
    for p in &mut polys {
        p.scale(4.0 * epsilon / frob);
    }
    let j0 = standard_j0(dim);
    let op = FieldArray::new(dim * dim, move |x| {
        let n = dim;
        let b: Vec<HyperDual> = (0..n * n)
            .map(|idx| polys[idx].eval(x) + if idx / n == idx % n { 1.0 } else { 0.0 })
            .collect();
        // A = (B J₀) B⁻¹  ⇔  Bᵀ Aᵀ = (B J₀)ᵀ
        let mut bj_t = vec![HyperDual::ZERO; n * n];
        for r in 0..n {
            for c in 0..n {
                let v: HyperDual = (0..n).map(|k| b[r * n + k] * j0[(k, c)]).sum();
                bj_t[c * n + r] = v;
            }
        }
        let mut b_t = vec![HyperDual::ZERO; n * n];
        for r in 0..n {
            for c in 0..n {
                b_t[c * n + r] = b[r * n + c];
            }
        }
        let a_t = solve(b_t, bj_t, n);
        let mut a = vec![HyperDual::ZERO; n * n];
        for r in 0..n {
            for c in 0..n {
                a[r * n + c] = a_t[c * n + r];
            }
        }
        a
    })
    .with_guard(|x| x.iter().all(|v| v.abs() < PERTURBATION_BOX));
    ACStructureField::from_operator(dim, op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn j0_components_match_convention() {
        let s = ACStructureField::standard(4).unwrap();
        let p = ChartPoint::origin(4).unwrap();
        let a = s.frame_components(&p, &DMatrix::identity(4, 4)).unwrap();
        // A₁₂ = 1, A₂₁ = −1, A₃₄ = 1, A₄₃ = −1
        assert_eq!(a[(0, 1)], 1.0);
        assert_eq!(a[(1, 0)], -1.0);
        assert_eq!(a[(2, 3)], 1.0);
        assert_eq!(a[(3, 2)], -1.0);
        assert_eq!(s.square_defect(&p).unwrap(), 0.0);
    }

    #[test]
    fn perturbed_structure_squares_to_minus_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in [2, 4, 6, 8] {
            let a = make_ac_field(n, rng.gen(), 0.2).unwrap();
            for _ in 0..20 {
                let p =
                    ChartPoint::new((0..n).map(|_| rng.gen_range(-0.5..0.5)).collect()).unwrap();
                assert!(a.square_defect(&p).unwrap() < 1e-10);
                assert!(a.asymmetry(&p).unwrap() > 1e-8);
                let op = a.operator_at(&p).unwrap();
                let b_like = op.clone().try_inverse().unwrap();
                // A⁻¹ = −A
                assert!((b_like + &op).amax() < 1e-10);
            }
        }
    }

    #[test]
    fn perturbation_is_nonconstant() {
        let a = make_ac_field(4, 3, 0.05).unwrap();
        let p = ChartPoint::origin(4).unwrap();
        let q = ChartPoint::new(vec![0.3; 4]).unwrap();
        assert!((a.operator_at(&p).unwrap() - a.operator_at(&q).unwrap()).amax() > 1e-3);
    }

    #[test]
    fn frame_components_round_trip() {
        let a = make_ac_field(4, 1, 0.1).unwrap();
        let p = ChartPoint::new(vec![0.1, 0.2, 0.3, -0.1]).unwrap();
        let g = DMatrix::from_fn(4, 4, |i, j| if i == j { 2.0 + i as f64 } else { 0.1 });
        let e = crate::geometry::orthonormal_frame_from(&g).unwrap();
        let comps = a.frame_components(&p, &e).unwrap();
        let op = a.operator_at(&p).unwrap();
        // A(E_a) = Σ_b A_ab E_b in coordinates
        for row in 0..4 {
            let ea = e.row(row).transpose();
            let lhs = &op * ea;
            let mut rhs = nalgebra::DVector::zeros(4);
            for b in 0..4 {
                rhs += e.row(b).transpose() * comps[(row, b)];
            }
            assert!((lhs - rhs).amax() < 1e-12);
        }
        assert!((&comps * &comps + DMatrix::identity(4, 4)).amax() < 1e-10);
    }

    #[test]
    fn epsilon_range_enforced() {
        assert!(make_ac_field(4, 0, 0.3).is_err());
        assert!(make_ac_field(3, 0, 0.1).is_err());
    }

    #[test]
    fn custom_components_use_row_as_input() {
        let comps = vec![
            ScalarField::constant(0.0),
            ScalarField::constant(1.0),
            ScalarField::constant(-1.0),
            ScalarField::constant(0.0),
        ];
        let a = ACStructureField::from_frame_components(2, comps).unwrap();
        let op = a.operator_at(&ChartPoint::origin(2).unwrap()).unwrap();
        assert_eq!(op, standard_j0(2));
    }
}
