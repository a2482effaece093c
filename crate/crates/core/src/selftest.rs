//! Randomized identity suite behind `curvobstruct selftest`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::complex::{make_ac_field, Residual, StructureAtPoint, VectorFieldSpec, VectorJet};
use crate::error::Result;
use crate::field::ChartPoint;
use crate::fields::{perturbed_metric, random_vector_components};
use crate::geometry::{model_metric, MetricField, ModelMetricSpec};
use crate::obstruction::Tolerances;

#[derive(Debug, Clone, Serialize)]
pub struct CheckSummary {
    pub name: &'static str,
    pub samples: usize,
    pub worst: Residual,
    pub passed: bool,
}

/// Draws `samples` random `(A, g, p, X, Y)` tuples per dimension in `{2, 4, 6}` and
/// checks every identity on each.
pub fn run_selftest(samples: usize, seed: u64, tol: &Tolerances) -> Result<Vec<CheckSummary>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = ["eq1", "eq2", "anticommute", "cyclic"];
    let mut worst = [Residual::ZERO; 4];
    let mut count = 0;
    for n in [2, 4, 6] {
        for _ in 0..samples {
            let a = make_ac_field(n, rng.gen(), rng.gen_range(0.0..0.2))?;
            let g: MetricField = if rng.gen_bool(0.5) {
                perturbed_metric(n, rng.gen(), 0.3)?
            } else {
                model_metric(ModelMetricSpec::new(rng.gen_range(-1.5..1.5), n)?)
            };
            let p = ChartPoint::new((0..n).map(|_| rng.gen_range(-0.5..0.5)).collect())?;
            let x = VectorJet::of(
                &VectorFieldSpec::new(random_vector_components(n, &mut rng)),
                &p,
            )?;
            let y = VectorJet::of(
                &VectorFieldSpec::new(random_vector_components(n, &mut rng)),
                &p,
            )?;
            let s = StructureAtPoint::new(&a, &g, &p)?;
            let r = [
                s.eq1(&x, &y),
                s.eq2(&x, &y),
                s.anticommute(x.value.as_slice(), y.value.as_slice()),
                s.cyclic_all(),
            ];
            for (w, r) in worst.iter_mut().zip(r) {
                *w = w.worst(r);
            }
            count += 1;
        }
    }
    Ok(names
        .iter()
        .zip(worst)
        .map(|(&name, w)| CheckSummary {
            name,
            samples: count,
            worst: w,
            passed: w.within(tol.identity),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_passes() {
        let out = run_selftest(3, 1, &Tolerances::default()).unwrap();
        assert_eq!(out.len(), 4);
        assert!(out.iter().all(|c| c.passed && c.samples == 9));
    }
}
