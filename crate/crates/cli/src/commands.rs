use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::thread;

use anyhow::{bail, ensure, Context, Result};
use serde::Deserialize;
use serde_json::{json, Value};

use pcurve::curve::{sample_curve, Arc, Curve, Parabola, Segment};
use pcurve::domain::{Domain, Shape};
use pcurve::dynamics::prism::{principal_axis_start, solve_parallel_bases};
use pcurve::dynamics::quadrant::{compose_square, solve_to_crossing, symmetry_defect, ComposeTolerance};
use pcurve::dynamics::{integrate, vertical_angles, CurveState, CurveTrace, SolverConfig};
use pcurve::helix::{principal_pitch_search, HelixCurve, HelixParams, PitchOutcome};
use pcurve::io::{self, HelixRow, ReportFile, TraceSidecar};
use pcurve::validate::{self, admissibility_check, self_consistency_residual, ValidationConfig};
use pcurve::Execution;

use crate::{CurveArgs, CurveKind, HelixArgs, SolveArgs, SolverFlags, SquareArgs, Status, ValidateArgs};

fn solver_config(f: &SolverFlags) -> SolverConfig {
    SolverConfig { max_length: f.length, rel_tol: f.rtol, abs_tol: f.atol, max_step: f.max_step, ..Default::default() }
}

fn write_trace_files(
    out: &Path,
    name: &str,
    trace: &CurveTrace,
    cfg: Option<&SolverConfig>,
    dom: Option<&Domain>,
    extra: Value,
) -> Result<()> {
    let csv = out.join(format!("{name}.csv"));
    io::write_trace(&csv, trace).with_context(|| format!("writing {}", csv.display()))?;
    let mut side = TraceSidecar::new(trace, cfg, dom);
    side.extra = extra;
    let json = out.join(format!("{name}.json"));
    io::write_json(&json, &side).with_context(|| format!("writing {}", json.display()))?;
    Ok(())
}

fn create_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

/// Start of one solver run.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Start {
    #[serde(default)]
    name: String,
    x0: Option<Vec<f64>>,
    zeta0: Option<Vec<f64>>,
    tangent: Option<Vec<f64>>,
}

struct Run<'a> {
    dom: &'a Domain,
    cfg: &'a SolverConfig,
    until_vertical: bool,
    out: &'a Path,
}

pub fn solve(a: &SolveArgs) -> Result<Status> {
    let dom = io::read_domain(&a.domain).with_context(|| format!("reading {}", a.domain.display()))?;
    let cfg = solver_config(&a.solver);
    if a.until_vertical && !matches!(dom.shape(), Shape::Prism { .. }) {
        bail!("--until-vertical needs a prism domain");
    }
    let mut x0 = a.x0.clone();
    if let Some(offset) = a.prism_axis_offset {
        let Shape::Prism { base, .. } = dom.shape() else {
            bail!("--prism-axis-offset needs a prism domain");
        };
        ensure!(dom.rotation().is_none(), "--prism-axis-offset needs an unrotated prism");
        ensure!(x0.is_none(), "--prism-axis-offset replaces --x0");
        let p = principal_axis_start(base, offset)?;
        x0 = Some(vec![p[0], p[1], 0.0]);
    }
    create_out(&a.out)?;
    let run = Run { dom: &dom, cfg: &cfg, until_vertical: a.until_vertical, out: &a.out };
    let Some(path) = &a.sweep else {
        let start = Start { name: a.name.clone(), x0, zeta0: a.zeta0.clone(), tangent: a.tangent.clone() };
        return run_one(&run, &start);
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let starts: Vec<Start> = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let mut names = HashSet::new();
    for (i, s) in starts.iter().enumerate() {
        ensure!(!s.name.is_empty(), "sweep entry {i} has no name");
        ensure!(names.insert(s.name.as_str()), "duplicate sweep name {:?}", s.name);
    }
    let results: Vec<Result<Status>> = thread::scope(|scope| {
        let handles: Vec<_> = starts.iter().map(|s| scope.spawn(|| run_one(&run, s))).collect();
        handles.into_iter().map(|h| h.join().unwrap_or_else(|_| bail!("worker panicked"))).collect()
    });
    let mut status = Status::Ok;
    for (s, r) in starts.iter().zip(results) {
        match r.with_context(|| format!("sweep entry {:?}", s.name))? {
            Status::Ok => {}
            other => status = other,
        }
    }
    Ok(status)
}

fn run_one(run: &Run, start: &Start) -> Result<Status> {
    let x0 = start.x0.clone().context("missing start point (--x0)")?;
    if run.until_vertical {
        ensure!(start.zeta0.is_none() && start.tangent.is_none(), "--until-vertical starts vertically");
        ensure!(x0.len() == 2 || (x0.len() == 3 && x0[2] == 0.0), "prism start must lie on the bottom base");
        let Shape::Prism { base, .. } = run.dom.shape() else { unreachable!() };
        let sol = solve_parallel_bases(base, [x0[0], x0[1]], run.cfg)?;
        let extra = json!({ "height": sol.height, "start": [x0[0], x0[1], 0.0] });
        write_trace_files(run.out, &start.name, &sol.trace, Some(run.cfg), Some(&sol.domain), extra)?;
        io::write_domain(&run.out.join(format!("{}.domain.json", start.name)), &sol.domain)?;
        return Ok(Status::Ok);
    }
    let init = match (&start.zeta0, &start.tangent) {
        (Some(z), None) => CurveState::new(x0, z.clone())?,
        (None, Some(t)) => CurveState::from_tangent(x0, t.clone())?,
        (None, None) if run.dom.dim() == 3 && matches!(run.dom.shape(), Shape::Prism { .. }) => {
            CurveState::new(x0, vertical_angles(3))?
        }
        _ => bail!("give exactly one of --zeta0 and --tangent"),
    };
    let trace = integrate(run.dom, &init, run.cfg)?;
    write_trace_files(run.out, &start.name, &trace, Some(run.cfg), Some(run.dom), Value::Null)?;
    if trace.meta.stop.is_clean() {
        Ok(Status::Ok)
    } else {
        eprintln!(
            "{}: stopped at s = {} ({:?}{})",
            start.name,
            trace.meta.stop_s,
            trace.meta.stop,
            trace.meta.stop_detail.as_deref().map(|d| format!(": {d}")).unwrap_or_default()
        );
        Ok(Status::InadmissibleStop)
    }
}

fn pair_hint(extra: &Value, key: &str) -> Option<(f64, f64)> {
    let v = extra.get(key)?.as_array()?;
    Some((v.first()?.as_f64()?, v.get(1)?.as_f64()?))
}

pub fn validate(a: &ValidateArgs) -> Result<Status> {
    let dom = io::read_domain(&a.domain).with_context(|| format!("reading {}", a.domain.display()))?;
    let trace = io::read_trace(&a.trace).with_context(|| format!("reading {}", a.trace.display()))?;
    let side_path = a.trace.with_extension("json");
    let extra = if side_path.exists() {
        let text = fs::read_to_string(&side_path)?;
        let side: TraceSidecar =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", side_path.display()))?;
        side.extra
    } else {
        Value::Null
    };
    let cfg = ValidationConfig {
        n_s: a.n_s,
        n_nodes: a.nodes,
        n_samples: a.samples,
        seed: a.seed,
        residual_tol: a.residual_tol,
        barycenter_tol: a.barycenter_tol,
        report_range: a.range.or_else(|| pair_hint(&extra, "report_range")),
        truncation: a.truncation.or_else(|| pair_hint(&extra, "truncation")),
        exec: if a.sequential { Execution::Sequential } else { Execution::Parallel },
        ..Default::default()
    };
    let curve = trace.dense()?;
    let report = validate::validate(&dom, &curve, &cfg)?;
    create_out(&a.out)?;
    let path = a.out.join(format!("{}.json", a.name));
    io::write_json(&path, &ReportFile::new(&report, &cfg))?;
    println!(
        "max residual {:.3e}, max barycenter distance {:.3e}, energy {:.6} ± {:.1e}, admissible {}: {}",
        report.max_residual,
        report.barycenters.max_distance,
        report.energy.mean,
        report.energy.stderr,
        report.admissible.ok,
        if report.passed { "PASS" } else { "FAIL" }
    );
    if let Some(e) = &report.residual_error {
        println!("residual error: {e}");
    }
    Ok(if report.passed { Status::Ok } else { Status::ValidationFailed })
}

/// Middle turn of a helix written with `turns` turns.
fn middle_turn(p: &HelixParams, turns: f64) -> (f64, f64) {
    let t = p.period();
    ((turns - 1.0) / 2.0 * t, (turns + 1.0) / 2.0 * t)
}

fn helix_extra(p: &HelixParams, curve: &HelixCurve, turns: f64) -> Value {
    let z = p.b * p.k() * curve.length();
    let (lo, hi) = middle_turn(p, turns);
    json!({ "a": p.a, "b": p.b, "r": p.r, "truncation": [0.0, z], "report_range": [lo, hi] })
}

struct HelixResult {
    row: HelixRow,
    outcome: Option<PitchOutcome>,
    error: Option<String>,
}

fn helix_row(a: f64, r: f64, turns: f64, pieces: usize, out: &Path, name: &str) -> Result<HelixResult> {
    let outcome = match principal_pitch_search(a, r) {
        Ok(o) => o,
        Err(e) => {
            let row = HelixRow { a, b: None, r, residual: None, admissible: None };
            return Ok(HelixResult { row, outcome: None, error: Some(e.to_string()) });
        }
    };
    let Some(b) = outcome.pitch() else {
        let row = HelixRow { a, b: None, r, residual: None, admissible: None };
        return Ok(HelixResult { row, outcome: Some(outcome), error: None });
    };
    let p = HelixParams::new(a, b, r)?;
    let curve = HelixCurve::periods(p, turns)?;
    let cyl = Domain::cylinder(r)?;
    let range = middle_turn(&p, turns);
    let residual = match &outcome {
        PitchOutcome::Root { residual, .. } => *residual,
        _ => self_consistency_residual(&cyl, &curve, 8, Some(range))?
            .iter()
            .map(|v| v.value)
            .fold(0.0, f64::max),
    };
    let admissible = admissibility_check(&cyl, &curve, 64, Some(range)).ok;
    let trace = sample_curve(&curve, pieces)?;
    write_trace_files(out, name, &trace, None, Some(&cyl), helix_extra(&p, &curve, turns))?;
    let row = HelixRow { a, b: Some(b), r, residual: Some(residual), admissible: Some(admissible) };
    Ok(HelixResult { row, outcome: Some(outcome), error: None })
}

pub fn helix(a: &HelixArgs) -> Result<Status> {
    ensure!(a.turns >= 1.0, "need at least one turn");
    create_out(&a.out)?;
    let pieces = (a.turns * 256.0).ceil() as usize;
    let results: Vec<Result<HelixResult>> = thread::scope(|scope| {
        let handles: Vec<_> = a
            .a
            .iter()
            .enumerate()
            .map(|(i, &ai)| scope.spawn(move || helix_row(ai, a.r, a.turns, pieces, &a.out, &format!("helix_{i}"))))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap_or_else(|_| bail!("worker panicked"))).collect()
    });
    let results: Vec<HelixResult> = results.into_iter().collect::<Result<_>>()?;
    let rows: Vec<HelixRow> = results.iter().map(|r| r.row.clone()).collect();
    fs::write(a.out.join("helix.csv"), io::helix_csv(&rows))?;
    let detail: Vec<Value> = results
        .iter()
        .enumerate()
        .map(|(i, r)| {
            json!({
                "trace": r.row.b.map(|_| format!("helix_{i}.csv")),
                "row": r.row,
                "outcome": r.outcome,
                "error": r.error,
            })
        })
        .collect();
    io::write_json(&a.out.join("helix.json"), &json!({ "format_version": io::FORMAT_VERSION, "r": a.r, "runs": detail }))?;
    for r in &rows {
        let b = r.b.map(|b| format!("{b:.6}")).unwrap_or_else(|| "none".into());
        println!("a = {:<6} b = {b:<10} admissible = {:?}", r.a, r.admissible);
    }
    Ok(Status::Ok)
}

pub fn square_compose(a: &SquareArgs) -> Result<Status> {
    let cfg = solver_config(&a.solver);
    let trace = solve_to_crossing(a.x0, a.crossing, &cfg)?;
    let sq = compose_square(&trace, ComposeTolerance::default())?;
    create_out(&a.out)?;
    let extra = json!({ "truncation": sq.truncation, "crossing": a.crossing });
    write_trace_files(&a.out, "quadrant", &trace, Some(&cfg), Some(&Domain::quadrant()), extra)?;
    fs::write(a.out.join("square.csv"), io::square_csv(&sq))?;
    let summary = json!({
        "format_version": io::FORMAT_VERSION,
        "x0": a.x0,
        "crossing": a.crossing,
        "truncation": sq.truncation,
        "half_side": sq.half_side,
        "max_gap": sq.max_gap,
        "symmetry_defect": symmetry_defect(&sq.points),
    });
    io::write_json(&a.out.join("square.json"), &summary)?;
    println!("truncation s = {:.10}, joint gap {:.2e}", sq.truncation, sq.max_gap);
    Ok(Status::Ok)
}

pub fn curve(a: &CurveArgs) -> Result<Status> {
    let out = a.out.as_deref().context("--out is required")?;
    let (curve, extra): (Box<dyn Curve>, Value) = match &a.kind {
        CurveKind::Arc { radius } => (Box::new(Arc::quarter(*radius)), json!({ "radius": radius })),
        CurveKind::Parabola { c, from, to } => (Box::new(Parabola::new(*c, *from, *to)?), json!({ "c": c })),
        CurveKind::Segment { from, to } => (Box::new(Segment::new(from.clone(), to.clone())?), Value::Null),
        CurveKind::Helix { a: ha, b, r, turns } => {
            let p = HelixParams::new(*ha, *b, *r)?;
            let h = HelixCurve::periods(p, *turns)?;
            let extra = helix_extra(&p, &h, *turns);
            (Box::new(h), extra)
        }
    };
    create_out(out)?;
    let trace = sample_curve(curve.as_ref(), a.pieces)?;
    write_trace_files(out, &a.name, &trace, None, None, extra)?;
    Ok(Status::Ok)
}
