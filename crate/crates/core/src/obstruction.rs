//! Orthonormal-frame contraction of the cyclic curvature identity against the
//! constant-curvature component table, and the resulting pointwise verdict.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::complex::{ACStructureField, StructureAtPoint};
use crate::error::{Error, Result};
use crate::field::ChartPoint;
use crate::geometry::{
    model_metric, orthonormal_frame_from, CurvatureAtPoint, Frame, MetricField, ModelMetricSpec,
};

/// Tolerance ladder shared by the identity suite and the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Identity residuals, relative to the operand scale.
    pub identity: f64,
    /// Below this, `d^∇A` and `N_A` count as vanishing.
    pub integrability: f64,
    /// Contractions above `obstruction_factor × identity` are obstructions.
    pub obstruction_factor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: 1e-6,
            integrability: 1e-8,
            obstruction_factor: 10.0,
        }
    }
}

impl Tolerances {
    pub fn obstruction_threshold(&self) -> f64 {
        self.obstruction_factor * self.identity
    }
}

/// Orthonormal-frame data at one point: `Rm` components and the structure's `A_ab`.
#[derive(Debug, Clone)]
pub struct ObstructionFrame {
    pub point: ChartPoint,
    pub frame: DMatrix<f64>,
    pub curvature: CurvatureAtPoint,
    /// `A(E_a) = Σ_b A_ab E_b`
    pub a: DMatrix<f64>,
}

impl ObstructionFrame {
    pub fn new(a: &ACStructureField, g: &MetricField, p: &ChartPoint) -> Result<Self> {
        let coord = crate::geometry::riemann(g, p)?;
        Self::from_curvature(a, &coord, p)
    }

    pub fn from_structure(a: &ACStructureField, s: &StructureAtPoint) -> Result<Self> {
        Self::from_curvature(a, &s.curvature, &s.point)
    }

    fn from_curvature(
        a: &ACStructureField,
        coord: &CurvatureAtPoint,
        p: &ChartPoint,
    ) -> Result<Self> {
        let frame = orthonormal_frame_from(&coord.metric)?;
        let curvature = coord.in_frame(&frame, Frame::Orthonormal)?;
        let a = a.frame_components(p, &frame)?;
        Ok(Self {
            point: p.clone(),
            frame,
            curvature,
            a,
        })
    }

    fn negate_curvature(&mut self) {
        self.curvature.rm.mapv_inplace(|v| -v);
        self.curvature.r_mixed.mapv_inplace(|v| -v);
    }

    /// `Σ_b [A_kb R_ijbi + A_ib R_jkbi + A_jb R_kibi]`.
    pub fn brute_sum(&self, i: usize, j: usize, k: usize) -> f64 {
        let r = &self.curvature.rm;
        let a = &self.a;
        (0..a.nrows())
            .map(|b| {
                a[(k, b)] * r[[i, j, b, i]]
                    + a[(i, b)] * r[[j, k, b, i]]
                    + a[(j, b)] * r[[k, i, b, i]]
            })
            .sum()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractionRecord {
    pub point: ChartPoint,
    /// 0-based `(i, j, k)`, pairwise distinct.
    #[serde(skip)]
    pub indices: (usize, usize, usize),
    pub brute_sum: f64,
    pub closed_form: f64,
    #[serde(skip)]
    pub frame: DMatrix<f64>,
    /// `1 + |c₀|·max|A_ab|`, the scale the two values are compared at.
    pub scale: f64,
}

impl ContractionRecord {
    pub fn discrepancy(&self) -> f64 {
        (self.brute_sum - self.closed_form).abs()
    }
}

fn validate_triple(n: usize, (i, j, k): (usize, usize, usize)) -> Result<()> {
    if n < 4 {
        return Err(Error::Dimension {
            dim: n,
            reason: "the contraction needs an index distinct from two others, so n >= 4",
        });
    }
    if i >= n || j >= n || k >= n {
        return Err(Error::Index(format!(
            "({i}, {j}, {k}) out of range for dimension {n}"
        )));
    }
    if i == j || j == k || i == k {
        return Err(Error::Index(format!(
            "({i}, {j}, {k}) are not pairwise distinct"
        )));
    }
    Ok(())
}

/// Contraction at one point and triple from precomputed frame data.
pub fn contract_in_frame(
    f: &ObstructionFrame,
    c0: f64,
    sigma: f64,
    triple: (usize, usize, usize),
) -> Result<ContractionRecord> {
    validate_triple(f.a.nrows(), triple)?;
    let (i, j, k) = triple;
    Ok(ContractionRecord {
        point: f.point.clone(),
        indices: triple,
        brute_sum: f.brute_sum(i, j, k),
        closed_form: sigma * c0 * (f.a[(k, j)] - f.a[(j, k)]),
        frame: f.frame.clone(),
        scale: 1.0 + c0.abs() * f.a.amax(),
    })
}

/// Contraction of the cyclic identity with `X = W` at `p` on orthonormal frame vectors
/// `(E_i, E_j, E_k)`. The calibration sign is taken from `p` itself; for flat models
/// (`c₀ = 0`) it is `+1` and both values vanish.
pub fn contract_obstruction(
    a: &ACStructureField,
    spec: &ModelMetricSpec,
    p: &ChartPoint,
    triple: (usize, usize, usize),
) -> Result<ContractionRecord> {
    validate_triple(spec.dim, triple)?;
    let f = ObstructionFrame::new(a, &model_metric(*spec), p)?;
    let sigma = if spec.c0 == 0.0 {
        1.0
    } else {
        sign_from_frames(spec.c0, std::slice::from_ref(&f))?
    };
    contract_in_frame(&f, spec.c0, sigma, triple)
}

/// `Rm(X,Y,AZ,X) + Rm(Y,Z,AX,X) + Rm(Z,X,AY,X)` for coordinate-component vectors.
pub fn eq3_residual(
    a: &ACStructureField,
    g: &MetricField,
    p: &ChartPoint,
    x: &[f64],
    y: &[f64],
    z: &[f64],
) -> Result<f64> {
    let n = a.dim();
    if [x, y, z].iter().any(|v| v.len() != n) {
        return Err(Error::Shape(format!("vectors must have {n} components")));
    }
    let s = StructureAtPoint::new(a, g, p)?;
    Ok(s.metric_cyclic(x, y, z, x))
}

/// Sign `σ` with `σ R_ijji = c₀` for every pair in every supplied orthonormal frame.
pub(crate) fn sign_from_frames(c0: f64, frames: &[ObstructionFrame]) -> Result<f64> {
    let tol = 1e-6 * c0.abs().max(1.0);
    let mut sign = None;
    for f in frames {
        let n = f.a.nrows();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let r = f.curvature.rm[[i, j, j, i]];
                let s = if r * c0 >= 0.0 { 1.0 } else { -1.0 };
                if (s * r - c0).abs() > tol {
                    return Err(Error::Calibration(format!(
                        "R_ijji = {r} is not ±{c0} at {:?}",
                        f.point.coords()
                    )));
                }
                if sign.is_some_and(|prev| prev != s) {
                    return Err(Error::Calibration(
                        "sign is not constant across samples".into(),
                    ));
                }
                sign = Some(s);
            }
        }
    }
    sign.ok_or_else(|| Error::Calibration("no sample points".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VerdictStatus {
    IntegrableConsistent,
    Obstructed,
    Inconclusive,
}

impl VerdictStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            VerdictStatus::IntegrableConsistent => "INTEGRABLE_CONSISTENT",
            VerdictStatus::Obstructed => "OBSTRUCTED",
            VerdictStatus::Inconclusive => "INCONCLUSIVE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub point: Vec<f64>,
    /// 1-based `(i, j, k)`.
    pub indices: [usize; 3],
    pub brute_sum: f64,
    pub closed_form: f64,
}

impl Witness {
    pub fn from_record(r: &ContractionRecord) -> Self {
        let (i, j, k) = r.indices;
        Self {
            point: r.point.coords().to_vec(),
            indices: [i + 1, j + 1, k + 1],
            brute_sum: r.brute_sum,
            closed_form: r.closed_form,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub status: VerdictStatus,
    pub max_dnabla: f64,
    pub max_nijenhuis: f64,
    pub max_contraction: f64,
    pub tolerance: f64,
    pub witness: Option<Witness>,
    /// `false` when an obstruction coexists with a vanishing `N_A` or `d^∇A`, which
    /// the integrability criterion rules out.
    pub consistent: bool,
}

/// Verdict from already computed contractions and integrability norms.
pub fn verdict_from(
    records: &[ContractionRecord],
    max_dnabla: f64,
    max_nijenhuis: f64,
    tol: &Tolerances,
) -> Verdict {
    let worst = records
        .iter()
        .fold(None::<&ContractionRecord>, |best, r| match best {
            Some(b) if b.closed_form.abs() >= r.closed_form.abs() => Some(b),
            _ => Some(r),
        });
    let max_contraction = worst.map_or(0.0, |r| r.closed_form.abs());
    let status = if max_contraction > tol.obstruction_threshold() {
        VerdictStatus::Obstructed
    } else if max_dnabla < tol.integrability && max_nijenhuis < tol.integrability {
        VerdictStatus::IntegrableConsistent
    } else {
        VerdictStatus::Inconclusive
    };
    let consistent = match status {
        VerdictStatus::Obstructed => {
            max_nijenhuis > tol.integrability && max_dnabla > tol.integrability
        }
        _ => true,
    };
    Verdict {
        status,
        max_dnabla,
        max_nijenhuis,
        max_contraction,
        tolerance: tol.identity,
        witness: worst
            .filter(|_| status == VerdictStatus::Obstructed)
            .map(Witness::from_record),
        consistent,
    }
}

/// Every pairwise-distinct `(i, j, k)` in lexicographic order.
pub fn distinct_triples(n: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if i != j && j != k && i != k {
                    out.push((i, j, k));
                }
            }
        }
    }
    out
}

/// Sweeps every distinct triple at every sample point for the model metric of `spec`.
pub fn theorem2_verdict(
    a: &ACStructureField,
    spec: &ModelMetricSpec,
    points: &[ChartPoint],
    tol: &Tolerances,
) -> Result<Verdict> {
    theorem2_verdict_signed(a, spec, points, tol, 1.0)
}

/// As [`theorem2_verdict`] with every `Rm` component multiplied by `curvature_sign`
/// before calibration, for checking that the verdict is convention independent.
pub fn theorem2_verdict_signed(
    a: &ACStructureField,
    spec: &ModelMetricSpec,
    points: &[ChartPoint],
    tol: &Tolerances,
    curvature_sign: f64,
) -> Result<Verdict> {
    if spec.dim < 4 {
        return Err(Error::config(
            "dim",
            "the obstruction needs dimension at least 4",
        ));
    }
    if spec.c0 == 0.0 {
        return Err(Error::config(
            "c0",
            "the obstruction needs non-zero constant curvature",
        ));
    }
    if points.is_empty() {
        return Err(Error::config(
            "points",
            "at least one sample point is required",
        ));
    }
    let g = model_metric(*spec);
    let mut frames = Vec::with_capacity(points.len());
    let (mut max_dnabla, mut max_nijenhuis) = (0.0f64, 0.0f64);
    for p in points {
        let s = StructureAtPoint::new(a, &g, p)?;
        max_dnabla = max_dnabla.max(s.max_dnabla());
        max_nijenhuis = max_nijenhuis.max(s.max_nijenhuis());
        let mut f = ObstructionFrame::from_structure(a, &s)?;
        if curvature_sign < 0.0 {
            f.negate_curvature();
        }
        frames.push(f);
    }
    let sigma = sign_from_frames(spec.c0, &frames)?;
    let mut records = Vec::new();
    for f in &frames {
        for t in distinct_triples(spec.dim) {
            records.push(contract_in_frame(f, spec.c0, sigma, t)?);
        }
    }
    Ok(verdict_from(&records, max_dnabla, max_nijenhuis, tol))
}

/// `λ_min(S² + I)`, which is at least 1 for every real symmetric `S`.
pub fn symmetric_spectral_check(s: &DMatrix<f64>) -> Result<f64> {
    if s.nrows() != s.ncols() {
        return Err(Error::Shape("matrix must be square".into()));
    }
    let asym = (s - s.transpose()).amax();
    if asym > 1e-12 * (1.0 + s.amax()) {
        return Err(Error::Shape(format!(
            "matrix is not symmetric (defect {asym:e})"
        )));
    }
    let n = s.nrows();
    let m = s * s + DMatrix::identity(n, n);
    let m = (&m + m.transpose()) * 0.5;
    Ok(m.symmetric_eigen().eigenvalues.min())
}
