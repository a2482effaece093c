//! Seeded random polynomials used to build test and scenario fields.

use rand::Rng;

use crate::hyperdual::HyperDual;

#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: f64,
    /// Variable indices with repetition, e.g. `[0, 0, 2]` is `x₁²x₃`.
    pub vars: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub dim: usize,
    pub terms: Vec<Monomial>,
}

fn multisets(
    dim: usize,
    degree: usize,
    start: usize,
    prefix: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if prefix.len() == degree {
        out.push(prefix.clone());
        return;
    }
    for v in start..dim {
        prefix.push(v);
        multisets(dim, degree, v, prefix, out);
        prefix.pop();
    }
}

impl Polynomial {
    /// Every monomial of total degree `<= max_degree` with a coefficient drawn from `[-1, 1]`.
    pub fn random(dim: usize, max_degree: usize, rng: &mut impl Rng) -> Self {
        let mut terms = Vec::new();
        for degree in 0..=max_degree {
            let mut sets = Vec::new();
            multisets(dim, degree, 0, &mut Vec::new(), &mut sets);
            for vars in sets {
                terms.push(Monomial {
                    coeff: rng.gen_range(-1.0..1.0),
                    vars,
                });
            }
        }
        Self { dim, terms }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self {
            dim,
            terms: vec![Monomial {
                coeff: c,
                vars: vec![],
            }],
        }
    }

    pub fn eval(&self, x: &[HyperDual]) -> HyperDual {
        self.terms
            .iter()
            .map(|t| {
                t.vars
                    .iter()
                    .fold(HyperDual::constant(t.coeff), |acc, &v| acc * x[v])
            })
            .sum()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| t.vars.iter().fold(t.coeff, |acc, &v| acc * x[v]))
            .sum()
    }

    /// Upper bound of `|p(x)|` over the box `|xᵢ| <= half_width`.
    pub fn bound_on_box(&self, half_width: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff.abs() * half_width.powi(t.vars.len() as i32))
            .sum()
    }

    pub fn scale(&mut self, factor: f64) {
        for t in &mut self.terms {
            t.coeff *= factor;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn monomial_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        // C(n + d, d) monomials of degree <= d in n variables
        assert_eq!(Polynomial::random(4, 2, &mut rng).terms.len(), 15);
        assert_eq!(Polynomial::random(6, 3, &mut rng).terms.len(), 84);
    }

    #[test]
    fn bound_holds_on_box() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = Polynomial::random(4, 2, &mut rng);
        let b = p.bound_on_box(0.5);
        for _ in 0..200 {
            let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-0.5..0.5)).collect();
            assert!(p.value(&x).abs() <= b);
        }
    }
}
