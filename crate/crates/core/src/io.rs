//! File formats: domain JSON, trace CSV with a JSON sidecar, report JSON and
//! the helix and square tables. Every file carries `format_version`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::domain::{Domain, Shape};
use crate::dynamics::quadrant::SquareCurve;
use crate::dynamics::{CurveState, CurveTrace, Restart, SolverConfig, SolverMeta, StopReason};
use crate::error::{Error, Result};
use crate::frame::{Curvatures, SphericalAngles};
use crate::validate::{ValidationConfig, ValidationReport};

pub const FORMAT_VERSION: u32 = 1;

/// Domain file contents, tagged by `"type"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DomainSpec {
    #[serde(rename = "quadrant2d")]
    Quadrant2d,
    #[serde(rename = "polygon2d")]
    Polygon2d { vertices: Vec<[f64; 2]> },
    /// Base points may carry a zero third coordinate.
    Prism {
        base: Vec<Vec<f64>>,
        #[serde(default)]
        height: Option<f64>,
    },
    Cylinder { r: f64 },
    Ball {
        r: f64,
        #[serde(default = "three")]
        dim: usize,
    },
    Cuboid { min: Vec<f64>, max: Vec<f64> },
    QuarterDisk { r: f64 },
}

fn three() -> usize {
    3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainFile {
    #[serde(default = "version")]
    pub format_version: u32,
    #[serde(flatten)]
    pub spec: DomainSpec,
    /// Row-major `x_world = R x_local`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<Vec<Vec<f64>>>,
}

fn version() -> u32 {
    FORMAT_VERSION
}

impl DomainFile {
    pub fn to_domain(&self) -> Result<Domain> {
        let shape = match &self.spec {
            DomainSpec::Quadrant2d => Shape::Quadrant2D,
            DomainSpec::Polygon2d { vertices } => Shape::Polygon2D { vertices: vertices.clone() },
            DomainSpec::Prism { base, height } => {
                let mut pts = Vec::with_capacity(base.len());
                for p in base {
                    match p.as_slice() {
                        [x, y] | [x, y, 0.0] => pts.push([*x, *y]),
                        _ => return Err(Error::Format(format!("prism base point {p:?} is not in the plane x₃ = 0"))),
                    }
                }
                Shape::Prism { base: pts, height: *height }
            }
            DomainSpec::Cylinder { r } => Shape::Cylinder { r: *r },
            DomainSpec::Ball { r, dim } => Shape::Ball { r: *r, dim: *dim },
            DomainSpec::Cuboid { min, max } => Shape::Cuboid { min: min.clone(), max: max.clone() },
            DomainSpec::QuarterDisk { r } => Shape::QuarterDisk { r: *r },
        };
        let dom = Domain::new(shape)?;
        match &self.rotation {
            None => Ok(dom),
            Some(rows) => dom.with_rotation(Some(matrix_from_rows(rows)?)),
        }
    }

    pub fn from_domain(dom: &Domain) -> DomainFile {
        let spec = match dom.shape() {
            Shape::Quadrant2D => DomainSpec::Quadrant2d,
            Shape::Polygon2D { vertices } => DomainSpec::Polygon2d { vertices: vertices.clone() },
            Shape::Prism { base, height } => {
                DomainSpec::Prism { base: base.iter().map(|p| p.to_vec()).collect(), height: *height }
            }
            Shape::Cylinder { r } => DomainSpec::Cylinder { r: *r },
            Shape::Ball { r, dim } => DomainSpec::Ball { r: *r, dim: *dim },
            Shape::Cuboid { min, max } => DomainSpec::Cuboid { min: min.clone(), max: max.clone() },
            Shape::QuarterDisk { r } => DomainSpec::QuarterDisk { r: *r },
        };
        DomainFile { format_version: FORMAT_VERSION, spec, rotation: dom.rotation().map(matrix_rows) }
    }
}

pub fn read_domain(path: &Path) -> Result<Domain> {
    parse_domain(&fs::read_to_string(path)?)
}

pub fn parse_domain(text: &str) -> Result<Domain> {
    let file: DomainFile = serde_json::from_str(text)?;
    check_version(file.format_version)?;
    file.to_domain()
}

pub fn write_domain(path: &Path, dom: &Domain) -> Result<()> {
    write_json(path, &DomainFile::from_domain(dom))
}

fn check_version(v: u32) -> Result<()> {
    if v != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported format_version {v}")));
    }
    Ok(())
}

pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Format("rotation must be a square matrix".into()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Header `s,x1..xd,zeta1..zeta{d-1},kappa1..kappa{d-1}`.
pub fn trace_header(d: usize) -> String {
    let mut cols = vec!["s".to_string()];
    cols.extend((1..=d).map(|i| format!("x{i}")));
    cols.extend((1..d).map(|i| format!("zeta{i}")));
    cols.extend((1..d).map(|i| format!("kappa{i}")));
    cols.join(",")
}

/// 17 significant digits, so values round-trip exactly.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn trace_csv(trace: &CurveTrace) -> String {
    let d = trace.dim();
    let mut out = format!("# format_version={FORMAT_VERSION}\n{}\n", trace_header(d));
    for (st, k) in trace.states.iter().zip(&trace.kappas) {
        let mut row = vec![num(st.s)];
        row.extend(st.position.iter().map(|v| num(*v)));
        row.extend(st.angles.as_slice().iter().map(|v| num(*v)));
        row.extend(k.as_slice().iter().map(|v| num(*v)));
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

/// Parse a trace CSV. Restarts and solver statistics live in the sidecar;
/// the returned meta only records the final arclength.
pub fn parse_trace_csv(text: &str) -> Result<CurveTrace> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let mut first = lines.next().ok_or_else(|| Error::Format("empty trace file".into()))?;
    if let Some(rest) = first.strip_prefix('#') {
        let v = rest.trim().strip_prefix("format_version=").ok_or_else(|| Error::Format("bad comment line".into()))?;
        check_version(v.trim().parse().map_err(|_| Error::Format(format!("bad format_version {v}")))?)?;
        first = lines.next().ok_or_else(|| Error::Format("missing header".into()))?;
    }
    let cols = first.split(',').count();
    if cols < 4 || (cols - 1) % 3 != 1 {
        return Err(Error::Format(format!("unexpected trace header {first:?}")));
    }
    let d = (cols - 1).div_ceil(3);
    if first.trim() != trace_header(d) {
        return Err(Error::Format(format!("unexpected trace header {first:?}")));
    }
    let mut states = Vec::new();
    let mut kappas = Vec::new();
    for (n, line) in lines.enumerate() {
        let vals: Vec<f64> = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Format(format!("row {}: {e}", n + 1)))?;
        if vals.len() != cols {
            return Err(Error::Format(format!("row {} has {} fields, expected {cols}", n + 1, vals.len())));
        }
        let angles = SphericalAngles::new(vals[1 + d..2 * d].to_vec())?;
        states.push(CurveState { s: vals[0], position: DVector::from_column_slice(&vals[1..1 + d]), angles });
        kappas.push(Curvatures::new(vals[2 * d..].to_vec()));
    }
    if states.windows(2).any(|w| !(w[1].s > w[0].s)) {
        return Err(Error::Format("arclength must increase strictly".into()));
    }
    let last = states.last().map_or(0.0, |s| s.s);
    Ok(CurveTrace { states, kappas, restarts: vec![], meta: SolverMeta::finished(StopReason::LengthReached, last) })
}

pub fn read_trace(path: &Path) -> Result<CurveTrace> {
    parse_trace_csv(&fs::read_to_string(path)?)
}

pub fn write_trace(path: &Path, trace: &CurveTrace) -> Result<()> {
    fs::write(path, trace_csv(trace))?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub s: f64,
    pub rotation: Vec<Vec<f64>>,
}

/// JSON companion of a trace CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSidecar {
    pub format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainFile>,
    pub restarts: Vec<RestartRecord>,
    pub meta: SolverMeta,
    pub rows: usize,
    /// Command-specific extras (event heights, crossings, parameters).
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub extra: Value,
}

impl TraceSidecar {
    pub fn new(trace: &CurveTrace, solver: Option<&SolverConfig>, dom: Option<&Domain>) -> TraceSidecar {
        TraceSidecar {
            format_version: FORMAT_VERSION,
            solver: solver.cloned(),
            domain: dom.map(DomainFile::from_domain),
            restarts: trace.restarts.iter().map(|r| RestartRecord { s: r.s, rotation: matrix_rows(&r.rotation) }).collect(),
            meta: trace.meta.clone(),
            rows: trace.states.len(),
            extra: Value::Null,
        }
    }

    pub fn restarts(&self) -> Result<Vec<Restart>> {
        self.restarts.iter().map(|r| Ok(Restart { s: r.s, rotation: matrix_from_rows(&r.rotation)? })).collect()
    }
}

/// Report JSON with the residual profile as `[s, value]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub format_version: u32,
    pub passed: bool,
    pub residuals: Vec<[f64; 2]>,
    pub residual_error: Option<String>,
    pub max_residual: f64,
    pub barycenters: Vec<crate::validate::BarycenterCell>,
    pub max_barycenter_distance: f64,
    pub max_barycenter_z: f64,
    pub empty_cells: Vec<usize>,
    pub energy: crate::validate::EnergyEstimate,
    pub ambiguity: f64,
    pub admissible: crate::validate::Admissibility,
    pub config: ValidationConfig,
}

impl ReportFile {
    pub fn new(report: &ValidationReport, cfg: &ValidationConfig) -> ReportFile {
        ReportFile {
            format_version: FORMAT_VERSION,
            passed: report.passed,
            residuals: report.residuals.iter().map(|r| [r.s, r.value]).collect(),
            residual_error: report.residual_error.clone(),
            max_residual: report.max_residual,
            barycenters: report.barycenters.cells.clone(),
            max_barycenter_distance: report.barycenters.max_distance,
            max_barycenter_z: report.barycenters.max_z,
            empty_cells: report.barycenters.empty.clone(),
            energy: report.energy,
            ambiguity: report.ambiguity,
            admissible: report.admissible.clone(),
            config: cfg.clone(),
        }
    }
}

/// One row of the helix table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HelixRow {
    pub a: f64,
    pub b: Option<f64>,
    pub r: f64,
    pub residual: Option<f64>,
    pub admissible: Option<bool>,
}

pub fn helix_csv(rows: &[HelixRow]) -> String {
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    let mut out = format!("# format_version={FORMAT_VERSION}\na,b,r,residual,admissible\n");
    for r in rows {
        let adm = r.admissible.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{},{}", num(r.a), opt(r.b), num(r.r), opt(r.residual), adm);
    }
    out
}

pub fn square_csv(sq: &SquareCurve) -> String {
    let mut out = format!("# format_version={FORMAT_VERSION}\npiece,x,y,tx,ty\n");
    for ((piece, p), t) in sq.piece.iter().zip(&sq.points).zip(&sq.tangents) {
        let _ = writeln!(out, "{piece},{},{},{},{}", num(p[0]), num(p[1]), num(t[0]), num(t[1]));
    }
    out
}
