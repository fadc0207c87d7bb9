//! Empirical checks that a curve is principal for a uniform distribution.

mod projection;

pub use projection::{Projection, Projector, TIE_TOL};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::curve::{Curve, Jet};
use crate::domain::{cross_section, sample_uniform, CrossSection, Domain, PointCloud};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, shards, Execution};
use crate::frame::Frame;
use crate::linalg::dist2;
use crate::moments::section_moments;

/// `‖μ − Gκ‖` at one arclength.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualPoint {
    pub s: f64,
    pub value: f64,
}

/// Cell midpoints of `n` equal pieces of `[lo, hi]`.
fn midpoints(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|j| lo + (hi - lo) * (j as f64 + 0.5) / n as f64).collect()
}

fn section_at(dom: &Domain, curve: &dyn Curve, s: f64) -> Result<(Vec<f64>, Frame, Vec<f64>, CrossSection)> {
    let (p, f, k) = curve.frame_and_curvatures(s)?;
    let sec = cross_section(dom, &p, &f).map_err(|e| e.at(s))?;
    Ok((p, f, k.kappa, sec))
}

/// Norm of the weighted first transverse moment `∫ u (1 − κ·u) du` at
/// `n_s` interior arclengths of `range` (default: the whole curve).
pub fn self_consistency_residual(
    dom: &Domain,
    curve: &dyn Curve,
    n_s: usize,
    range: Option<(f64, f64)>,
) -> Result<Vec<ResidualPoint>> {
    let (lo, hi) = range.unwrap_or((0.0, curve.length()));
    midpoints(lo, hi, n_s.max(1))
        .into_iter()
        .map(|s| {
            let (_, _, k, sec) = section_at(dom, curve, s)?;
            let m = section_moments(&sec).map_err(|e| e.at(s))?;
            let value = m.residual(&crate::frame::Curvatures::new(k)).norm();
            Ok(ResidualPoint { s, value })
        })
        .collect()
}

/// One Voronoi cell of a curve node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarycenterCell {
    pub node: usize,
    pub s: f64,
    pub count: usize,
    pub barycenter: Vec<f64>,
    /// Distance from the barycenter to the node's own piece of the curve.
    pub distance: f64,
    /// Distance from the barycenter to the node point.
    pub node_distance: f64,
    /// Standard error of the barycenter, `sqrt(tr cov / count)`.
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarycenterReport {
    pub cells: Vec<BarycenterCell>,
    pub empty: Vec<usize>,
    pub max_distance: f64,
    /// Largest `distance / stderr` over the reported cells.
    pub max_z: f64,
}

/// Samples drawn for Monte-Carlo checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub n: usize,
    pub seed: u64,
    /// Cut for unbounded axes.
    pub truncation: Option<(f64, f64)>,
    #[serde(skip)]
    pub exec: Execution,
}

impl SampleSpec {
    pub fn new(n: usize, seed: u64) -> SampleSpec {
        SampleSpec { n, seed, truncation: None, exec: Execution::default() }
    }

    pub fn draw(&self, dom: &Domain) -> Result<PointCloud> {
        sample_uniform(dom, self.n, self.seed, self.truncation, self.exec)
    }
}

/// Nodes at the midpoints of `n_nodes` equal pieces; each sample goes to its
/// nearest node (ties to the larger index). Only nodes whose arclength lies
/// in `report` count towards the maxima.
pub fn voronoi_barycenters(
    dom: &Domain,
    curve: &dyn Curve,
    n_nodes: usize,
    samples: &SampleSpec,
    report: Option<(f64, f64)>,
) -> Result<BarycenterReport> {
    if n_nodes < 2 {
        return Err(Error::InvalidInput("need at least two nodes".into()));
    }
    let cloud = samples.draw(dom)?;
    voronoi_barycenters_of(curve, n_nodes, &cloud, report, samples.exec)
}

/// As `voronoi_barycenters` on a given point cloud.
pub fn voronoi_barycenters_of(
    curve: &dyn Curve,
    n_nodes: usize,
    cloud: &PointCloud,
    report: Option<(f64, f64)>,
    exec: Execution,
) -> Result<BarycenterReport> {
    let d = curve.dim();
    if cloud.dim != d {
        return Err(Error::DimensionMismatch { expected: d, found: cloud.dim });
    }
    let len = curve.length();
    let piece = len / n_nodes as f64;
    let node_s: Vec<f64> = midpoints(0.0, len, n_nodes);
    let nodes: Vec<Vec<f64>> = node_s.iter().map(|&s| curve.jet(s).point).collect();
    // Per node: count, Σx, Σ‖x‖².
    let parts = map_indexed(exec, shards(cloud.len()).len(), |i| {
        let (start, count) = shards(cloud.len())[i];
        let mut acc = vec![(0usize, vec![0.0; d], 0.0f64); n_nodes];
        for x in cloud.range(start, count).chunks_exact(d) {
            let mut best = (f64::INFINITY, 0);
            for (j, p) in nodes.iter().enumerate() {
                let v = dist2(p, x);
                if v <= best.0 {
                    best = (v, j);
                }
            }
            let cell = &mut acc[best.1];
            cell.0 += 1;
            for (c, v) in cell.1.iter_mut().zip(x) {
                *c += v;
            }
            cell.2 += x.iter().map(|v| v * v).sum::<f64>();
        }
        acc
    });
    let mut total = vec![(0usize, vec![0.0; d], 0.0f64); n_nodes];
    for part in parts {
        for (t, p) in total.iter_mut().zip(part) {
            t.0 += p.0;
            for k in 0..d {
                t.1[k] += p.1[k];
            }
            t.2 += p.2;
        }
    }
    let (rlo, rhi) = report.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    let mut cells = Vec::new();
    let mut empty = Vec::new();
    let (mut max_distance, mut max_z) = (0.0f64, 0.0f64);
    for (j, (count, sum, sq)) in total.into_iter().enumerate() {
        if count == 0 {
            empty.push(j);
            continue;
        }
        let n = count as f64;
        let bary: Vec<f64> = sum.iter().map(|v| v / n).collect();
        let var = (sq / n - bary.iter().map(|v| v * v).sum::<f64>()).max(0.0);
        let stderr = (var / n).sqrt();
        let (a, b) = (node_s[j] - piece / 2.0, node_s[j] + piece / 2.0);
        let distance = distance_to_piece(curve, &bary, a, b);
        let node_distance = dist2(&bary, &nodes[j]).sqrt();
        if node_s[j] >= rlo && node_s[j] <= rhi {
            max_distance = max_distance.max(distance);
            if stderr > 0.0 {
                max_z = max_z.max(distance / stderr);
            }
        }
        cells.push(BarycenterCell { node: j, s: node_s[j], count, barycenter: bary, distance, node_distance, stderr });
    }
    Ok(BarycenterReport { cells, empty, max_distance, max_z })
}

/// Distance from `x` to `Γ([a, b])` by a fine scan and golden refinement.
fn distance_to_piece(curve: &dyn Curve, x: &[f64], a: f64, b: f64) -> f64 {
    let mut jet = Jet::new(curve.dim());
    let mut f = |s: f64| {
        curve.eval(s, &mut jet);
        dist2(&jet.point, x)
    };
    let n = 64;
    let h = (b - a) / n as f64;
    let (mut best_i, mut best) = (0, f64::INFINITY);
    for i in 0..=n {
        let v = f(a + i as f64 * h);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let (mut lo, mut hi) = ((a + (best_i as f64 - 1.0) * h).max(a), (a + (best_i as f64 + 1.0) * h).min(b));
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        if hi - lo < 1e-14 {
            break;
        }
        let (c, d) = (hi - r * (hi - lo), lo + r * (hi - lo));
        if f(c) < f(d) {
            hi = d;
        } else {
            lo = c;
        }
    }
    best.min(f(0.5 * (lo + hi))).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

/// Monte-Carlo mean squared distance `E‖X − Γ(λ(X))‖²`.
pub fn energy(dom: &Domain, curve: &dyn Curve, samples: &SampleSpec) -> Result<EnergyEstimate> {
    let cloud = samples.draw(dom)?;
    Ok(energy_of(curve, &cloud, samples.exec))
}

pub fn energy_of(curve: &dyn Curve, cloud: &PointCloud, exec: Execution) -> EnergyEstimate {
    let proj = Projector::new(curve);
    let d = cloud.dim;
    let parts = map_indexed(exec, shards(cloud.len()).len(), |i| {
        let (start, count) = shards(cloud.len())[i];
        let (mut s1, mut s2) = (0.0, 0.0);
        for x in cloud.range(start, count).chunks_exact(d) {
            let v = proj.project(x).distance.powi(2);
            s1 += v;
            s2 += v * v;
        }
        (s1, s2)
    });
    let (s1, s2) = parts.into_iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = cloud.len() as f64;
    let mean = s1 / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
    EnergyEstimate { mean, stderr: (var / n).sqrt(), n: cloud.len() }
}

/// Fraction of samples whose best two distinct local projections differ in
/// distance by less than `tie_tol`.
pub fn ambiguity_fraction(dom: &Domain, curve: &dyn Curve, samples: &SampleSpec, tie_tol: f64) -> Result<f64> {
    let cloud = samples.draw(dom)?;
    Ok(ambiguity_fraction_of(curve, &cloud, tie_tol, samples.exec))
}

pub fn ambiguity_fraction_of(curve: &dyn Curve, cloud: &PointCloud, tie_tol: f64, exec: Execution) -> f64 {
    if !(tie_tol > 0.0) {
        return 0.0;
    }
    let proj = Projector::new(curve);
    let d = cloud.dim;
    let counts = map_indexed(exec, shards(cloud.len()).len(), |i| {
        let (start, count) = shards(cloud.len())[i];
        cloud
            .range(start, count)
            .chunks_exact(d)
            .filter(|x| {
                let p = proj.project(x);
                p.runner_up.is_some_and(|r| r - p.distance < tie_tol)
            })
            .count()
    });
    counts.into_iter().sum::<usize>() as f64 / cloud.len() as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub ok: bool,
    pub reason: Option<String>,
    pub s: Option<f64>,
    /// Smallest `1 − κ·u` over the checked sections.
    pub min_jacobian: f64,
}

/// Jacobian positivity on each sampled section, disjointness of consecutive
/// sampled sections, and existence of every section. Stops at the first
/// violation.
pub fn admissibility_check(dom: &Domain, curve: &dyn Curve, n_s: usize, range: Option<(f64, f64)>) -> Admissibility {
    let (lo, hi) = range.unwrap_or((0.0, curve.length()));
    let mut min_jacobian = f64::INFINITY;
    let fail = |reason: String, s: f64, min_jacobian: f64| Admissibility {
        ok: false,
        reason: Some(reason),
        s: Some(s),
        min_jacobian,
    };
    let mut prev: Option<(f64, Vec<f64>, Frame, CrossSection)> = None;
    for s in midpoints(lo, hi, n_s.max(1)) {
        let (p, f, k, sec) = match section_at(dom, curve, s) {
            Ok(v) => v,
            Err(e) => return fail(format!("section: {}", e.root()), s, min_jacobian),
        };
        let jac = sec.min_jacobian(&k);
        min_jacobian = min_jacobian.min(jac);
        if jac < -1e-12 {
            return fail(format!("negative Jacobian {jac:.3e}"), s, min_jacobian);
        }
        if let Some((ps, pp, pf, psec)) = &prev {
            // Signed offset of the previous section from the current normal plane.
            let offset: f64 = pp.iter().zip(&p).zip(f.tangent.iter()).map(|((a, b), t)| (a - b) * t).sum();
            let beta: Vec<f64> = pf.normals.iter().map(|n| n.dot(&f.tangent)).collect();
            let (_, top) = psec.linear_range(&beta);
            // Sections meeting in a single boundary point (radial sections) are fine.
            if offset + top > 1e-12 * (1.0 + offset.abs()) {
                return fail(format!("sections at s = {ps:.6} and s = {s:.6} intersect"), s, min_jacobian);
            }
        }
        prev = Some((s, p, f, sec));
    }
    Admissibility { ok: true, reason: None, s: None, min_jacobian }
}

/// Thresholds and sample sizes for `validate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ValidationConfig {
    pub n_s: usize,
    pub n_nodes: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub tie_tol: f64,
    pub residual_tol: f64,
    pub barycenter_tol: f64,
    /// Arclength window used for residuals, admissibility and reported cells.
    pub report_range: Option<(f64, f64)>,
    pub truncation: Option<(f64, f64)>,
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            n_s: 64,
            n_nodes: 32,
            n_samples: 1_000_000,
            seed: 1,
            tie_tol: TIE_TOL,
            residual_tol: 1e-5,
            barycenter_tol: 0.01,
            report_range: None,
            truncation: None,
            exec: Execution::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub residuals: Vec<ResidualPoint>,
    pub residual_error: Option<String>,
    pub max_residual: f64,
    pub barycenters: BarycenterReport,
    pub energy: EnergyEstimate,
    pub ambiguity: f64,
    pub admissible: Admissibility,
    pub passed: bool,
}

/// Run every check; `passed` needs residuals and barycenter distances within
/// their tolerances.
pub fn validate(dom: &Domain, curve: &dyn Curve, cfg: &ValidationConfig) -> Result<ValidationReport> {
    let spec = SampleSpec { n: cfg.n_samples, seed: cfg.seed, truncation: cfg.truncation, exec: cfg.exec };
    let cloud = spec.draw(dom)?;
    let (residuals, residual_error) = match self_consistency_residual(dom, curve, cfg.n_s, cfg.report_range) {
        Ok(r) => (r, None),
        Err(e) => (vec![], Some(e.to_string())),
    };
    let max_residual = residuals.iter().map(|r| r.value).fold(0.0, f64::max);
    let barycenters = voronoi_barycenters_of(curve, cfg.n_nodes, &cloud, cfg.report_range, cfg.exec)?;
    let energy = energy_of(curve, &cloud, cfg.exec);
    let ambiguity = ambiguity_fraction_of(curve, &cloud, cfg.tie_tol, cfg.exec);
    let admissible = admissibility_check(dom, curve, cfg.n_s, cfg.report_range);
    let passed = residual_error.is_none()
        && max_residual <= cfg.residual_tol
        && barycenters.max_distance <= cfg.barycenter_tol;
    Ok(ValidationReport { residuals, residual_error, max_residual, barycenters, energy, ambiguity, admissible, passed })
}

/// Rigid motion `x ↦ Rx` of a point cloud (for equivariance checks).
pub fn rotate_cloud(cloud: &PointCloud, r: &nalgebra::DMatrix<f64>) -> PointCloud {
    let coords = cloud
        .iter()
        .flat_map(|x| (r * DVector::from_column_slice(x)).as_slice().to_vec())
        .collect();
    PointCloud { dim: cloud.dim, coords }
}
