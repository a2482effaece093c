//! Seeded field builders: perturbed metrics and polynomial vector/scalar fields.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{FieldArray, ScalarField};
use crate::geometry::MetricField;
use crate::hyperdual::HyperDual;
use crate::poly::Polynomial;

/// Half-width of the coordinate box on which the perturbation bounds are enforced.
pub const PERTURBATION_BOX: f64 = 0.6;

fn in_box(x: &[f64]) -> bool {
    x.iter().all(|v| v.abs() < PERTURBATION_BOX)
}

/// `g = δ + ε S(x)` with `S` a symmetric quadratic-polynomial matrix scaled so that
/// `‖S‖_F <= 1` on the perturbation box, hence positive definite for `ε < 1`.
pub fn perturbed_metric(dim: usize, seed: u64, epsilon: f64) -> Result<MetricField> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::config(
            "epsilon",
            "metric perturbation must lie in [0, 1)",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(dim * (dim + 1) / 2);
    for _ in 0..dim * (dim + 1) / 2 {
        entries.push(Polynomial::random(dim, 2, &mut rng));
    }
    let frob: f64 = entries
        .iter()
        .enumerate()
        .map(|(idx, p)| {
            let b = p.bound_on_box(PERTURBATION_BOX);
            // off-diagonal entries appear twice
            if is_diagonal(dim, idx) {
                b * b
            } else {
                2.0 * b * b
            }
        })
        .sum::<f64>()
        .sqrt();
    for p in &mut entries {
        p.scale(epsilon / frob);
    }
    let components = FieldArray::new(dim * dim, move |x| {
        let mut out = vec![HyperDual::ZERO; dim * dim];
        let mut idx = 0;
        for i in 0..dim {
            for j in i..dim {
                let v = entries[idx].eval(x) + if i == j { 1.0 } else { 0.0 };
                out[i * dim + j] = v;
                out[j * dim + i] = v;
                idx += 1;
            }
        }
        out
    })
    .with_guard(in_box);
    MetricField::new(dim, components)
}

fn is_diagonal(dim: usize, packed: usize) -> bool {
    let mut idx = 0;
    for i in 0..dim {
        for j in i..dim {
            if idx == packed {
                return i == j;
            }
            idx += 1;
        }
    }
    false
}

/// Quadratic polynomial scalar field with coefficients in `[-1, 1]`.
pub fn random_scalar_field(dim: usize, rng: &mut impl Rng) -> ScalarField {
    let p = Polynomial::random(dim, 2, rng);
    ScalarField::new(move |x| p.eval(x))
}

/// Vector field with quadratic polynomial components.
pub fn random_vector_components(dim: usize, rng: &mut impl Rng) -> FieldArray {
    let polys: Vec<Polynomial> = (0..dim).map(|_| Polynomial::random(dim, 2, rng)).collect();
    FieldArray::new(dim, move |x| polys.iter().map(|p| p.eval(x)).collect())
}
