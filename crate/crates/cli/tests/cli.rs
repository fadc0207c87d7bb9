use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn pcurve(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcurve")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const PRISM_OPEN: &str = r#"{"type": "prism", "base": [[0, 1, 0], [0.8660254037844386, -0.5, 0], [-2, -0.5, 0]]}"#;

#[test]
fn quadrant_solve_writes_trace_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let dom = write(dir.path(), "q.json", r#"{"type": "quadrant2d"}"#);
    let out = dir.path().to_str().unwrap();
    let o = pcurve(&["solve", "--domain", &dom, "--x0", "1,0", "--zeta0", "pi/2", "--length", "5", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(csv.starts_with("# format_version=1\ns,x1,x2,zeta1,kappa1\n"));
    let side = json(&dir.path().join("trace.json"));
    assert_eq!(side["format_version"], 1);
    assert_eq!(side["meta"]["stop"], "length_reached");
    assert_eq!(side["solver"]["rel_tol"], 1e-8);
    assert_eq!(side["rows"].as_u64().unwrap() as usize, csv.lines().count() - 2);
}

#[test]
fn ball_diameter_is_straight_and_validates() {
    let dir = tempfile::tempdir().unwrap();
    let dom = write(dir.path(), "b.json", r#"{"type": "ball", "r": 1.0}"#);
    let out = dir.path().to_str().unwrap();
    let o = pcurve(&["solve", "--domain", &dom, "--x0", "-1,0,0", "--tangent", "1,0,0", "--length", "5", "--out", out]);
    assert_eq!(code(&o), 0);
    let side = json(&dir.path().join("trace.json"));
    assert_eq!(side["meta"]["stop"], "left_domain");
    assert!((side["meta"]["stop_s"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    let trace = dir.path().join("trace.csv");
    let o = pcurve(&[
        "validate", "--domain", &dom, "--trace", trace.to_str().unwrap(), "--samples", "100000", "--nodes", "8", "--out", out,
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let rep = json(&dir.path().join("report.json"));
    assert_eq!(rep["passed"], true);
    assert_eq!(rep["admissible"]["ok"], true);
    assert!(rep["residuals"].as_array().unwrap().iter().all(|r| r[1].as_f64().unwrap() <= 1e-10));
}

#[test]
fn parabola_fails_validation_with_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let dom = write(dir.path(), "sq.json", r#"{"type": "cuboid", "min": [0, 0], "max": [1, 1]}"#);
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&pcurve(&["curve", "parabola", "--c", "1", "--out", out, "--name", "par"])), 0);
    let trace = dir.path().join("par.csv");
    let o = pcurve(&["validate", "--domain", &dom, "--trace", trace.to_str().unwrap(), "--samples", "50000", "--out", out]);
    assert_eq!(code(&o), 3);
    let rep = json(&dir.path().join("report.json"));
    assert_eq!(rep["passed"], false);
    assert!(rep["max_residual"].as_f64().unwrap() > 0.01);
}

#[test]
fn short_prism_stops_inadmissibly_with_partial_trace() {
    let dir = tempfile::tempdir().unwrap();
    let dom = write(
        dir.path(),
        "p.json",
        r#"{"type": "prism", "base": [[0, 1], [0.8660254037844386, -0.5], [-2, -0.5]], "height": 1.0}"#,
    );
    let out = dir.path().to_str().unwrap();
    let o = pcurve(&["solve", "--domain", &dom, "--prism-axis-offset", "0.2", "--out", out]);
    assert_eq!(code(&o), 2);
    let side = json(&dir.path().join("trace.json"));
    assert_eq!(side["meta"]["stop"], "slice_hits_base");
    assert!(side["rows"].as_u64().unwrap() > 2);
}

#[test]
fn prism_closes_at_the_vertical_tangent() {
    let dir = tempfile::tempdir().unwrap();
    let dom = write(dir.path(), "p.json", PRISM_OPEN);
    let out = dir.path().to_str().unwrap();
    let o = pcurve(&["solve", "--domain", &dom, "--until-vertical", "--prism-axis-offset", "0.2", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let closed = json(&dir.path().join("trace.domain.json"));
    let h = closed["height"].as_f64().unwrap();
    assert!(h > 1.5 && h < 2.5, "{h}");
    assert_eq!(json(&dir.path().join("trace.json"))["extra"]["height"].as_f64().unwrap(), h);
}

#[test]
fn sweep_runs_every_entry() {
    let dir = tempfile::tempdir().unwrap();
    let dom = write(dir.path(), "q.json", r#"{"type": "quadrant2d"}"#);
    let sweep = write(
        dir.path(),
        "sweep.json",
        r#"[{"name": "one", "x0": [1, 0], "zeta0": [1.5707963267948966]},
            {"name": "two", "x0": [2, 0], "tangent": [0, 1]}]"#,
    );
    let out = dir.path().to_str().unwrap();
    let o = pcurve(&["solve", "--domain", &dom, "--sweep", &sweep, "--length", "3", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("one.csv").exists() && dir.path().join("two.csv").exists());
    let dup = write(dir.path(), "dup.json", r#"[{"name": "a", "x0": [1, 0], "zeta0": [1.5]}, {"name": "a", "x0": [1, 0], "zeta0": [1.5]}]"#);
    assert_eq!(code(&pcurve(&["solve", "--domain", &dom, "--sweep", &dup, "--out", out])), 1);
}

#[test]
fn square_compose_and_helix_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&pcurve(&["square-compose", "--out", out])), 0);
    let sq = fs::read_to_string(dir.path().join("square.csv")).unwrap();
    assert!(sq.starts_with("# format_version=1\npiece,x,y,tx,ty\n"));
    let summary = json(&dir.path().join("square.json"));
    assert!(summary["max_gap"].as_f64().unwrap() <= 1e-8);
    assert!(summary["symmetry_defect"].as_f64().unwrap() <= 1e-8);
    let o = pcurve(&["helix", "--a", "0.1,0.66", "--out", out]);
    assert_eq!(code(&o), 0);
    let table = fs::read_to_string(dir.path().join("helix.csv")).unwrap();
    let rows: Vec<Vec<&str>> = table.lines().skip(2).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), 0.5);
    assert_eq!(rows[0][4], "true");
    assert!(rows[1][1].parse::<f64>().unwrap() < 0.5);
    assert_eq!(rows[1][4], "false");
}

#[test]
fn principal_helix_trace_validates_with_sidecar_hints() {
    let dir = tempfile::tempdir().unwrap();
    let dom = write(dir.path(), "cyl.json", r#"{"type": "cylinder", "r": 1.0}"#);
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&pcurve(&["curve", "helix", "--a", "0.2", "--b", "0.5", "--out", out, "--name", "h"])), 0);
    let trace = dir.path().join("h.csv");
    let o = pcurve(&["validate", "--domain", &dom, "--trace", trace.to_str().unwrap(), "--samples", "200000", "--barycenter-tol", "0.05", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let rep = json(&dir.path().join("report.json"));
    let range = rep["config"]["report_range"].as_array().unwrap();
    assert!(range[0].as_f64().unwrap() > 0.0);
    assert!(rep["max_residual"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn bad_inputs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let missing = dir.path().join("none.json");
    let o = pcurve(&["solve", "--domain", missing.to_str().unwrap(), "--x0", "1,0", "--zeta0", "1", "--out", out]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    let dom = write(dir.path(), "torus.json", r#"{"type": "torus"}"#);
    assert_eq!(code(&pcurve(&["solve", "--domain", &dom, "--x0", "1,0", "--zeta0", "1", "--out", out])), 1);
    let q = write(dir.path(), "q.json", r#"{"type": "quadrant2d"}"#);
    assert_eq!(code(&pcurve(&["solve", "--domain", &q, "--x0", "1,0", "--out", out])), 1);
    assert_eq!(code(&pcurve(&["solve", "--domain", &q, "--x0", "-1,0", "--zeta0", "1", "--out", out])), 1);
    let trace = write(dir.path(), "t.csv", "s,x1,x2,zeta1,kappa1\n0,0,0,1\n");
    assert_eq!(code(&pcurve(&["validate", "--domain", &q, "--trace", &trace, "--out", out])), 1);
}
