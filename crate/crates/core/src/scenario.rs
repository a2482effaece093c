//! Scenario catalog, seeded runner, and report serialization.
//!
//! Sample points are drawn with `ChaCha8Rng::seed_from_u64(seed)` (from `rand_chacha`),
//! uniformly in the box `|x_i| < 0.5` and rejected if outside the chart guard. Every
//! random choice in a run is drawn from that single stream in a fixed order, before any
//! parallel work starts, so reports are reproducible across platforms and thread counts.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::{
    make_ac_field, ACStructureField, Residual, StructureAtPoint, VectorFieldSpec, VectorJet,
};
use crate::error::{Error, Result};
use crate::expr::parse_field;
use crate::field::ChartPoint;
use crate::fields::random_vector_components;
use crate::geometry::{model_metric, MetricField, ModelMetricSpec};
use crate::obstruction::{
    contract_in_frame, distinct_triples, sign_from_frames, verdict_from, ContractionRecord,
    ObstructionFrame, Tolerances, Verdict, Witness,
};

pub const SAMPLE_HALF_WIDTH: f64 = 0.5;
pub const MAX_WITNESSES: usize = 10;
pub const GENERATOR: &str = "ChaCha8 (rand_chacha, seed_from_u64)";
const MAX_EPSILON: f64 = 0.2;
const CUSTOM_SQUARE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum AcKind {
    #[serde(rename = "standard_J0")]
    StandardJ0,
    #[serde(rename = "perturbed")]
    Perturbed { seed: u64, epsilon: f64 },
    /// Row-major `A_ab` with `A(∂_a) = Σ_b A_ab ∂_b`, as expressions in `x1..xn`.
    #[serde(rename = "custom")]
    Custom { components: Vec<String> },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrability: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obstruction_factor: Option<f64>,
}

impl ToleranceOverrides {
    pub fn resolve(&self) -> Tolerances {
        let d = Tolerances::default();
        Tolerances {
            identity: self.identity.unwrap_or(d.identity),
            integrability: self.integrability.unwrap_or(d.integrability),
            obstruction_factor: self.obstruction_factor.unwrap_or(d.obstruction_factor),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub dim: usize,
    pub c0: f64,
    pub ac_kind: AcKind,
    pub points: usize,
    pub seed: u64,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::config("name", "must not be empty"));
        }
        if self.dim < 2 || self.dim > 8 || !self.dim.is_multiple_of(2) {
            return Err(Error::config(
                "dim",
                format!("must be even with 2 <= dim <= 8, got {}", self.dim),
            ));
        }
        if !self.c0.is_finite() {
            return Err(Error::config("c0", "must be finite"));
        }
        if self.points < 1 {
            return Err(Error::config("points", "must be at least 1"));
        }
        let t = &self.tolerances;
        for (field, v) in [
            ("tolerances.identity", t.identity),
            ("tolerances.integrability", t.integrability),
            ("tolerances.obstruction_factor", t.obstruction_factor),
        ] {
            if v.is_some_and(|v| !(v.is_finite() && v > 0.0)) {
                return Err(Error::config(field, "must be a positive finite number"));
            }
        }
        match &self.ac_kind {
            AcKind::StandardJ0 => {}
            AcKind::Perturbed { epsilon, .. } => {
                if !(0.0..=MAX_EPSILON).contains(epsilon) {
                    return Err(Error::config(
                        "ac_kind.epsilon",
                        format!("must lie in [0, {MAX_EPSILON}], got {epsilon}"),
                    ));
                }
            }
            AcKind::Custom { components } => {
                if components.len() != self.dim * self.dim {
                    return Err(Error::config(
                        "ac_kind.components",
                        format!(
                            "expected {} expressions, got {}",
                            self.dim * self.dim,
                            components.len()
                        ),
                    ));
                }
                let a = self.structure()?;
                check_square(&a, &ChartPoint::origin(self.dim)?)?;
            }
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<ModelMetricSpec> {
        ModelMetricSpec::new(self.c0, self.dim)
    }

    pub fn structure(&self) -> Result<ACStructureField> {
        match &self.ac_kind {
            AcKind::StandardJ0 => ACStructureField::standard(self.dim),
            AcKind::Perturbed { seed, epsilon } => make_ac_field(self.dim, *seed, *epsilon),
            AcKind::Custom { components } => {
                let fields = components
                    .iter()
                    .enumerate()
                    .map(|(idx, src)| {
                        parse_field(src, self.dim).map_err(|e| {
                            Error::config("ac_kind.components", format!("entry {idx}: {e}"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                ACStructureField::from_frame_components(self.dim, fields)
            }
        }
    }

    /// A verdict is only defined for `dim >= 4` and `c0 != 0`.
    pub fn has_verdict(&self) -> bool {
        self.dim >= 4 && self.c0 != 0.0
    }
}

fn check_square(a: &ACStructureField, p: &ChartPoint) -> Result<()> {
    let defect = a.square_defect(p)?;
    if defect > CUSTOM_SQUARE_TOL {
        return Err(Error::config(
            "ac_kind.components",
            format!(
                "A² + I = {defect:e} at {:?}, not an almost-complex structure",
                p.coords()
            ),
        ));
    }
    Ok(())
}

fn entry(name: &str, dim: usize, c0: f64, ac_kind: AcKind) -> ScenarioConfig {
    ScenarioConfig {
        name: name.to_string(),
        dim,
        c0,
        ac_kind,
        points: 5,
        seed: 20240917,
        tolerances: ToleranceOverrides::default(),
    }
}

/// Built-in scenarios, in listing order.
pub fn catalog() -> Vec<ScenarioConfig> {
    use AcKind::*;
    vec![
        entry("flat-2", 2, 0.0, StandardJ0),
        entry("flat-4", 4, 0.0, StandardJ0),
        entry("surface-control", 2, 1.0, StandardJ0),
        entry("round-4-standard", 4, 1.0, StandardJ0),
        entry("round-6-standard", 6, 1.0, StandardJ0),
        entry("hyperbolic-4", 4, -1.0, StandardJ0),
        entry(
            "perturbed-4",
            4,
            1.0,
            Perturbed {
                seed: 7,
                epsilon: 0.05,
            },
        ),
        entry(
            "perturbed-6",
            6,
            1.0,
            Perturbed {
                seed: 11,
                epsilon: 0.05,
            },
        ),
    ]
}

pub fn lookup(name: &str) -> Option<ScenarioConfig> {
    let name = match name {
        "flat-4-standard" => "flat-4",
        other => other,
    };
    catalog().into_iter().find(|c| c.name == name)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Sweep points on the rayon pool.
    pub parallel: bool,
    /// Added to every `eq1` residual; exercises the exit-code path.
    pub inject_residual: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Sampling {
    pub generator: &'static str,
    pub seed: u64,
    pub half_width: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointReport {
    pub coords: Vec<f64>,
    pub max_dnabla: f64,
    pub max_nijenhuis: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IdentityCheck {
    pub abs: f64,
    pub scale: f64,
    pub within_tolerance: bool,
}

impl IdentityCheck {
    fn new(r: Residual, tol: f64) -> Self {
        Self {
            abs: r.abs,
            scale: r.scale,
            within_tolerance: r.within(tol),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IdentityMaxima {
    pub eq1: IdentityCheck,
    pub eq2: IdentityCheck,
    pub anticommute: IdentityCheck,
    pub cyclic: IdentityCheck,
}

impl IdentityMaxima {
    pub fn all_within(&self) -> bool {
        [self.eq1, self.eq2, self.anticommute, self.cyclic]
            .iter()
            .all(|c| c.within_tolerance)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub config: ScenarioConfig,
    pub sampling: Sampling,
    pub tolerances: Tolerances,
    pub sign: f64,
    pub points: Vec<PointReport>,
    pub max_dnabla: f64,
    pub max_nijenhuis: f64,
    pub identities: IdentityMaxima,
    pub max_contraction: f64,
    pub max_contraction_discrepancy: f64,
    pub witnesses: Vec<Witness>,
    pub verdict: Option<Verdict>,
    pub notes: Vec<String>,
    /// Excluded from serialized reports so that they stay byte-identical.
    #[serde(skip)]
    pub wall_time: Duration,
}

struct PointOutcome {
    report: PointReport,
    eq1: Residual,
    eq2: Residual,
    anticommute: Residual,
    cyclic: Residual,
    frame: Option<ObstructionFrame>,
}

struct PointInput {
    point: ChartPoint,
    x: VectorFieldSpec,
    y: VectorFieldSpec,
}

fn sample_inputs(
    cfg: &ScenarioConfig,
    g: &MetricField,
    a: &ACStructureField,
) -> Result<Vec<PointInput>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.dim;
    let mut out = Vec::with_capacity(cfg.points);
    let max_attempts = 1000 * cfg.points;
    let mut attempts = 0;
    while out.len() < cfg.points {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::config(
                "c0",
                "chart guard leaves too little of the sampling box",
            ));
        }
        let coords: Vec<f64> = (0..n)
            .map(|_| rng.gen_range(-SAMPLE_HALF_WIDTH..SAMPLE_HALF_WIDTH))
            .collect();
        if !a.operator_field().contains(&coords) {
            continue;
        }
        let point = ChartPoint::new(coords)?;
        if !g.contains(&point) {
            continue;
        }
        let x = VectorFieldSpec::new(random_vector_components(n, &mut rng));
        let y = VectorFieldSpec::new(random_vector_components(n, &mut rng));
        out.push(PointInput { point, x, y });
    }
    Ok(out)
}

fn evaluate_point(
    cfg: &ScenarioConfig,
    a: &ACStructureField,
    g: &MetricField,
    input: &PointInput,
    opts: &RunOptions,
) -> Result<PointOutcome> {
    let p = &input.point;
    if matches!(cfg.ac_kind, AcKind::Custom { .. }) {
        check_square(a, p)?;
    }
    let s = StructureAtPoint::new(a, g, p)?;
    let xj = VectorJet::of(&input.x, p)?;
    let yj = VectorJet::of(&input.y, p)?;
    let mut eq1 = s.eq1(&xj, &yj);
    if let Some(extra) = opts.inject_residual {
        eq1.abs += extra;
    }
    let anticommute = s.anticommute(xj.value.as_slice(), yj.value.as_slice());
    let frame = if cfg.c0 != 0.0 {
        Some(ObstructionFrame::from_structure(a, &s)?)
    } else {
        None
    };
    Ok(PointOutcome {
        report: PointReport {
            coords: p.coords().to_vec(),
            max_dnabla: s.max_dnabla(),
            max_nijenhuis: s.max_nijenhuis(),
        },
        eq2: s.eq2(&xj, &yj),
        eq1,
        anticommute,
        cyclic: s.cyclic_all(),
        frame,
    })
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunReport> {
    run_scenario_with(cfg, &RunOptions::default())
}

pub fn run_scenario_with(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<RunReport> {
    let start = Instant::now();
    cfg.validate()?;
    let tol = cfg.tolerances.resolve();
    let spec = cfg.spec()?;
    let g = model_metric(spec);
    let a = cfg.structure()?;
    let inputs = sample_inputs(cfg, &g, &a)?;

    let outcomes: Vec<PointOutcome> = if opts.parallel {
        inputs
            .par_iter()
            .map(|inp| evaluate_point(cfg, &a, &g, inp, opts))
            .collect::<Result<_>>()?
    } else {
        inputs
            .iter()
            .map(|inp| evaluate_point(cfg, &a, &g, inp, opts))
            .collect::<Result<_>>()?
    };

    let worst = |f: fn(&PointOutcome) -> Residual| {
        outcomes.iter().fold(Residual::ZERO, |w, o| w.worst(f(o)))
    };
    let identities = IdentityMaxima {
        eq1: IdentityCheck::new(worst(|o| o.eq1), tol.identity),
        eq2: IdentityCheck::new(worst(|o| o.eq2), tol.identity),
        anticommute: IdentityCheck::new(worst(|o| o.anticommute), tol.identity),
        cyclic: IdentityCheck::new(worst(|o| o.cyclic), tol.identity),
    };
    let max_dnabla = outcomes
        .iter()
        .fold(0.0f64, |m, o| m.max(o.report.max_dnabla));
    let max_nijenhuis = outcomes
        .iter()
        .fold(0.0f64, |m, o| m.max(o.report.max_nijenhuis));

    let frames: Vec<ObstructionFrame> = outcomes.iter().filter_map(|o| o.frame.clone()).collect();
    let sign = if cfg.c0 == 0.0 {
        1.0
    } else {
        sign_from_frames(cfg.c0, &frames)?
    };

    let mut notes = vec![format!(
        "pointwise check at {} sampled chart point{}; compactness is not used by the computation",
        cfg.points,
        if cfg.points == 1 { "" } else { "s" }
    )];
    let mut records: Vec<ContractionRecord> = Vec::new();
    if cfg.dim >= 4 {
        for f in &frames {
            for t in distinct_triples(cfg.dim) {
                records.push(contract_in_frame(f, cfg.c0, sign, t)?);
            }
        }
    }
    let max_contraction = records
        .iter()
        .fold(0.0f64, |m, r| m.max(r.closed_form.abs()));
    let max_contraction_discrepancy = records
        .iter()
        .fold(0.0f64, |m, r| m.max(r.discrepancy() / r.scale));

    let verdict = if cfg.has_verdict() {
        Some(verdict_from(&records, max_dnabla, max_nijenhuis, &tol))
    } else {
        notes.push(if cfg.dim < 4 {
            "no verdict: the obstruction needs dimension at least 4".to_string()
        } else {
            "no verdict: the obstruction needs non-zero constant curvature".to_string()
        });
        None
    };
    if let Some(v) = &verdict {
        if !v.consistent {
            notes.push(format!(
                "inconsistent verdict: contraction {:e} is non-zero while max |N_A| = {:e} and max |d^∇A| = {:e}",
                v.max_contraction, v.max_nijenhuis, v.max_dnabla
            ));
        }
    }
    if !identities.all_within() {
        notes.push("identity residual above tolerance".to_string());
    }

    let mut ranked: Vec<&ContractionRecord> = records
        .iter()
        .filter(|r| r.closed_form.abs() > tol.obstruction_threshold())
        .collect();
    ranked.sort_by(|a, b| b.closed_form.abs().total_cmp(&a.closed_form.abs()));
    let witnesses = ranked
        .into_iter()
        .take(MAX_WITNESSES)
        .map(Witness::from_record)
        .collect();

    Ok(RunReport {
        scenario: cfg.name.clone(),
        config: cfg.clone(),
        sampling: Sampling {
            generator: GENERATOR,
            seed: cfg.seed,
            half_width: SAMPLE_HALF_WIDTH,
            points: cfg.points,
        },
        tolerances: tol,
        sign,
        points: outcomes.into_iter().map(|o| o.report).collect(),
        max_dnabla,
        max_nijenhuis,
        identities,
        max_contraction,
        max_contraction_discrepancy,
        witnesses,
        verdict,
        notes,
        wall_time: start.elapsed(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "csv" | "csv-summary" => Ok(Self::Csv),
            other => Err(Error::config(
                "format",
                format!("expected json or csv, got '{other}'"),
            )),
        }
    }
}

pub const CSV_HEADER: &str =
    "scenario,dim,c0,sign,max_dnabla,max_nijenhuis,max_contraction,verdict";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_row(r: &RunReport) -> String {
    format!(
        "{},{},{},{},{:e},{:e},{:e},{}",
        csv_field(&r.scenario),
        r.config.dim,
        r.config.c0,
        r.sign,
        r.max_dnabla,
        r.max_nijenhuis,
        r.max_contraction,
        r.verdict.as_ref().map_or("NONE", |v| v.status.as_str())
    )
}

/// One JSON object, or a header line plus one CSV row.
pub fn render_report(report: &RunReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report)?;
            s.push('\n');
            Ok(s)
        }
        ReportFormat::Csv => render_reports(std::slice::from_ref(report), format),
    }
}

/// A JSON array of reports, or one CSV header followed by a row per report.
pub fn render_reports(reports: &[RunReport], format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(reports)?;
            s.push('\n');
            Ok(s)
        }
        ReportFormat::Csv => {
            let mut s = String::new();
            writeln!(s, "{CSV_HEADER}").unwrap();
            for r in reports {
                writeln!(s, "{}", csv_row(r)).unwrap();
            }
            Ok(s)
        }
    }
}

pub fn emit_report(report: &RunReport, format: ReportFormat, path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(render_report(report, format)?.as_bytes())?;
    Ok(())
}

/// 0 healthy, 2 identity residual violation, 3 inconsistent verdict.
/// Configuration and IO failures never produce a report and map to 1 at the caller.
pub fn exit_code(report: &RunReport) -> i32 {
    if !report.identities.all_within() {
        2
    } else if report.verdict.as_ref().is_some_and(|v| !v.consistent) {
        3
    } else {
        0
    }
}

pub const CONFIG_EXIT_CODE: i32 = 1;
