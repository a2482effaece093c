//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
//!
//! Run with `cargo test -p curvobstruct-core --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use curvobstruct_core::complex::{make_ac_field, StructureAtPoint, VectorFieldSpec, VectorJet};
use curvobstruct_core::fields::{perturbed_metric, random_vector_components};
use curvobstruct_core::geometry::{
    calibrate_sign, model_metric, orthonormal_frame_from, riemann, sectional_curvature, Frame,
    MetricField, ModelMetricSpec,
};
use curvobstruct_core::jet::{jet_array, jet_fd_array, Order, DEFAULT_FD_STEP};
use curvobstruct_core::obstruction::{
    contract_in_frame, distinct_triples, symmetric_spectral_check, ObstructionFrame,
};
use curvobstruct_core::scenario::{render_reports, ReportFormat};
use curvobstruct_core::{
    catalog, exit_code, run_scenario, ACStructureField, ChartPoint, VerdictStatus,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn points(n: usize, count: usize, rng: &mut impl Rng) -> Vec<ChartPoint> {
    (0..count)
        .map(|_| ChartPoint::new((0..n).map(|_| rng.gen_range(-0.5..0.5)).collect()).unwrap())
        .collect()
}

fn models() -> Vec<ModelMetricSpec> {
    let mut out = Vec::new();
    for c0 in [1.0, -1.0, 2.0] {
        for n in [4, 6] {
            out.push(ModelMetricSpec::new(c0, n).unwrap());
        }
    }
    out
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn component_table() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst, mut worst_distinct) = (0.0f64, 0.0f64);
    for spec in models() {
        let g = model_metric(spec);
        let pts = points(spec.dim, 5, &mut rng);
        let sigma = calibrate_sign(&spec, &pts).map_err(|e| e.to_string())?;
        let n = spec.dim;
        for p in &pts {
            let r = riemann(&g, p).map_err(|e| e.to_string())?;
            let e = orthonormal_frame_from(&r.metric).map_err(|e| e.to_string())?;
            let on = r
                .in_frame(&e, Frame::Orthonormal)
                .map_err(|e| e.to_string())?;
            for (i, j, k, l) in ndarray::indices((n, n, n, n)).into_iter() {
                let d = |a: usize, b: usize| f64::from(u8::from(a == b));
                let expect = sigma * spec.c0 * (d(i, l) * d(j, k) - d(i, k) * d(j, l));
                let err = (on.rm[[i, j, k, l]] - expect).abs();
                worst = worst.max(err);
                let distinct = [i, j, k, l];
                let mut u = distinct.to_vec();
                u.sort_unstable();
                u.dedup();
                if u.len() >= 3 {
                    worst_distinct = worst_distinct.max(on.rm[[i, j, k, l]].abs());
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst < 1e-6 && worst_distinct < 1e-8 && secs < 5.0,
        format!(
            "max entry error {worst:.2e}, three-distinct max {worst_distinct:.2e}, {secs:.2} s"
        ),
    )
}

fn sectional_constancy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_spread = 0.0f64;
    let mut worst_abs = 0.0f64;
    for spec in models() {
        let g = model_metric(spec);
        let n = spec.dim;
        let mut values = Vec::new();
        for p in points(n, 20, &mut rng) {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            values.push(sectional_curvature(&g, &p, &x, &y).map_err(|e| e.to_string())?);
        }
        let k0 = values[0];
        worst_spread = values
            .iter()
            .fold(worst_spread, |m, v| m.max((v - k0).abs()));
        worst_abs = worst_abs.max((k0.abs() - spec.c0.abs()).abs());
    }
    check(
        worst_spread < 1e-6 && worst_abs < 1e-6,
        format!("spread {worst_spread:.2e}, ||K| - |c0|| {worst_abs:.2e}"),
    )
}

fn identity_suite() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let names = ["eq1", "eq2", "anticommute", "cyclic"];
    let mut worst = [0.0f64; 4];
    let mut samples = 0;
    for n in [2, 4, 6] {
        for t in 0..50 {
            let a =
                make_ac_field(n, rng.gen(), rng.gen_range(0.0..0.2)).map_err(|e| e.to_string())?;
            let g: MetricField = if t % 2 == 0 {
                perturbed_metric(n, rng.gen(), 0.3).map_err(|e| e.to_string())?
            } else {
                model_metric(ModelMetricSpec::new(rng.gen_range(-2.0..2.0), n).unwrap())
            };
            let p = points(n, 1, &mut rng).remove(0);
            let xf = VectorFieldSpec::new(random_vector_components(n, &mut rng));
            let yf = VectorFieldSpec::new(random_vector_components(n, &mut rng));
            let s = StructureAtPoint::new(&a, &g, &p).map_err(|e| e.to_string())?;
            let x = VectorJet::of(&xf, &p).map_err(|e| e.to_string())?;
            let y = VectorJet::of(&yf, &p).map_err(|e| e.to_string())?;
            let r = [
                s.eq1(&x, &y),
                s.eq2(&x, &y),
                s.anticommute(x.value.as_slice(), y.value.as_slice()),
                s.cyclic_all(),
            ];
            for (w, r) in worst.iter_mut().zip(r) {
                *w = w.max(r.normalized());
            }
            samples += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let detail = names
        .iter()
        .zip(worst)
        .map(|(n, w)| format!("{n} {w:.2e}"))
        .collect::<Vec<_>>()
        .join(", ");
    check(
        worst.iter().all(|&w| w < 1e-6) && secs < 30.0,
        format!("{samples} samples: {detail}, {secs:.2} s"),
    )
}

fn integrability_control() -> Outcome {
    let mut failures = Vec::new();
    let mut summary = Vec::new();
    for cfg in catalog() {
        let r = run_scenario(&cfg).map_err(|e| e.to_string())?;
        let (nij, dn) = (r.max_nijenhuis, r.max_dnabla);
        summary.push(format!("{} N={nij:.1e} dA={dn:.1e}", cfg.name));
        if cfg.name == "surface-control" && !(nij < 1e-8 && dn < 1e-8) {
            failures.push(format!("{}: expected both < 1e-8", cfg.name));
        }
        if cfg.name.starts_with("perturbed") && !(nij > 1e-2 && dn > 1e-2) {
            failures.push(format!("{}: expected both > 1e-2", cfg.name));
        }
        // two-sided: N_A vanishes exactly when d^∇A does
        if (nij < 1e-8) != (dn < 1e-8) {
            failures.push(format!("{}: N and d^∇A disagree on vanishing", cfg.name));
        }
    }
    let detail = summary.join("; ");
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{}; {detail}", failures.join("; ")))
    }
}

fn contraction_rederivation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst, mut worst_i) = (0.0f64, 0.0f64);
    let mut records = 0;
    for spec in models() {
        let n = spec.dim;
        let g = model_metric(spec);
        let pts = points(n, 5, &mut rng);
        let sigma = calibrate_sign(&spec, &pts).map_err(|e| e.to_string())?;
        let structures = [
            ACStructureField::standard(n).unwrap(),
            make_ac_field(n, rng.gen(), 0.1).map_err(|e| e.to_string())?,
        ];
        for a in &structures {
            for p in &pts {
                let f = ObstructionFrame::new(a, &g, p).map_err(|e| e.to_string())?;
                let mut closed = vec![vec![Vec::new(); n]; n];
                for t in distinct_triples(n) {
                    let r = contract_in_frame(&f, spec.c0, sigma, t).map_err(|e| e.to_string())?;
                    worst = worst.max(r.discrepancy() / r.scale);
                    closed[t.1][t.2].push(r.closed_form);
                    records += 1;
                }
                for v in closed.iter().flatten() {
                    let (lo, hi) = v
                        .iter()
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
                            (a.min(x), b.max(x))
                        });
                    if !v.is_empty() {
                        worst_i = worst_i.max(hi - lo);
                    }
                }
            }
        }
    }
    check(
        worst < 1e-6 && worst_i < 1e-9,
        format!("{records} records: discrepancy/scale {worst:.2e}, i-spread {worst_i:.2e}"),
    )
}

fn curved_obstruction_instances() -> Outcome {
    let mut failures = Vec::new();
    let mut summary = Vec::new();
    for name in [
        "round-6-standard",
        "round-4-standard",
        "hyperbolic-4",
        "flat-4",
    ] {
        let cfg = catalog().into_iter().find(|c| c.name == name).unwrap();
        let r = run_scenario(&cfg).map_err(|e| e.to_string())?;
        let code = exit_code(&r);
        match (&r.verdict, name) {
            (None, "flat-4") => summary.push(format!("{name} no verdict, exit {code}")),
            (Some(v), n) if n != "flat-4" => {
                let w = v.witness.as_ref().map(|w| w.indices);
                summary.push(format!(
                    "{name} {} witness {w:?}, exit {code}",
                    v.status.as_str()
                ));
                if v.status != VerdictStatus::Obstructed || w.is_none() {
                    failures.push(format!("{name}: expected OBSTRUCTED with witness"));
                }
            }
            _ => failures.push(format!("{name}: unexpected verdict presence")),
        }
        if code != 0 {
            failures.push(format!("{name}: exit code {code}"));
        }
    }
    let detail = summary.join("; ");
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{}; {detail}", failures.join("; ")))
    }
}

fn spectral_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut lowest = f64::INFINITY;
    for t in 0..200 {
        let n = [2, 4, 6][t % 3];
        let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-5.0..5.0));
        let s = (&b + b.transpose()) * 0.5;
        lowest = lowest.min(symmetric_spectral_check(&s).map_err(|e| e.to_string())?);
    }
    check(
        lowest >= 1.0 - 1e-10,
        format!("min λ_min(S² + I) = {lowest:.12}"),
    )
}

fn engine_cross_oracle() -> Outcome {
    let (mut wg, mut wh) = (0.0f64, 0.0f64);
    let mut fields = 0;
    for cfg in catalog() {
        let r = run_scenario(&cfg).map_err(|e| e.to_string())?;
        let g = model_metric(cfg.spec().unwrap());
        let a = cfg.structure().map_err(|e| e.to_string())?;
        for pr in &r.points {
            let p = ChartPoint::new(pr.coords.clone()).unwrap();
            for arr in [g.components(), a.operator_field()] {
                let hd = jet_array(arr, &p, Order::Second).map_err(|e| e.to_string())?;
                let fd = jet_fd_array(arr, &p, DEFAULT_FD_STEP).map_err(|e| e.to_string())?;
                for (x, y) in hd.iter().zip(&fd) {
                    let (_, dg, dh) = x.max_relative_diff(y);
                    wg = wg.max(dg);
                    wh = wh.max(dh);
                    fields += 1;
                }
            }
        }
    }
    check(
        wg < 1e-4 && wh < 1e-3,
        format!("{fields} component jets: grad {wg:.2e}, hess {wh:.2e}"),
    )
}

fn determinism() -> Outcome {
    let start = Instant::now();
    let once = || -> Result<String, String> {
        let reports = catalog()
            .iter()
            .map(run_scenario)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        render_reports(&reports, ReportFormat::Json).map_err(|e| e.to_string())
    };
    let a = once()?;
    let single = start.elapsed().as_secs_f64();
    let b = once()?;
    check(
        a == b && single < 60.0,
        format!(
            "{} bytes identical: {}, catalog {single:.2} s",
            a.len(),
            a == b
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("constant-curvature component table", component_table),
        ("sectional-curvature constancy", sectional_constancy),
        (
            "Nijenhuis, sandwich, anticommutation and cyclic identities",
            identity_suite,
        ),
        ("two-sided integrability control", integrability_control),
        ("contraction re-derivation", contraction_rederivation),
        (
            "round and hyperbolic obstruction instances",
            curved_obstruction_instances,
        ),
        ("spectral check", spectral_check),
        ("hyper-dual vs finite-difference jets", engine_cross_oracle),
        ("determinism and catalog runtime", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(d) => println!("PASS criterion {}: {name} ({d})", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {}: {name} ({d})", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
