//! The curvature dynamics of self-consistent curves and its integration.

pub mod prism;
pub mod quadrant;
mod rk;

pub use quadrant::rhs_quadrant;

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::domain::{cross_section, Domain, Shape};
use crate::error::{Error, Result};
use crate::frame::{
    angles_from_tangent, frame_from_angles_with, frame_unchecked, tangent_from_angles, tangent_partial_norms,
    Curvatures, SphericalAngles, SINGULARITY_THRESHOLD,
};
use crate::linalg::{check_rotation, rotation_to_last_axis};
use crate::moments::{gram_condition, section_curvatures};
use rk::{hermite, try_step, Controller};

/// Slack used when testing whether the curve is still inside the domain.
const BOUNDARY_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct CurveState {
    pub s: f64,
    pub position: DVector<f64>,
    pub angles: SphericalAngles,
}

impl CurveState {
    /// State at `s = 0`.
    pub fn new(position: Vec<f64>, angles: Vec<f64>) -> Result<CurveState> {
        let angles = SphericalAngles::new(angles)?;
        if angles.dim() != position.len() {
            return Err(Error::DimensionMismatch { expected: position.len(), found: angles.dim() });
        }
        Ok(CurveState { s: 0.0, position: DVector::from_vec(position), angles })
    }

    pub fn from_tangent(position: Vec<f64>, tangent: Vec<f64>) -> Result<CurveState> {
        if tangent.len() != position.len() {
            return Err(Error::DimensionMismatch { expected: position.len(), found: tangent.len() });
        }
        let angles = angles_from_tangent(&DVector::from_vec(tangent))?;
        Ok(CurveState { s: 0.0, position: DVector::from_vec(position), angles })
    }

    pub fn dim(&self) -> usize {
        self.position.len()
    }

    pub fn tangent(&self) -> DVector<f64> {
        tangent_from_angles(&self.angles)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    LengthReached,
    Event,
    LeftDomain,
    SliceHitsBase,
    SectionFailure,
    StepUnderflow,
    StepLimit,
}

impl StopReason {
    /// Clean stops end a run normally; the others mark an inadmissible continuation.
    pub fn is_clean(self) -> bool {
        matches!(self, StopReason::LengthReached | StopReason::Event | StopReason::LeftDomain)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverMeta {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    pub stop: StopReason,
    pub stop_s: f64,
    pub stop_detail: Option<String>,
    pub max_gram_condition: f64,
}

impl SolverMeta {
    pub fn finished(stop: StopReason, s: f64) -> SolverMeta {
        SolverMeta {
            accepted: 0,
            rejected: 0,
            rhs_evals: 0,
            stop,
            stop_s: s,
            stop_detail: None,
            max_gram_condition: 0.0,
        }
    }
}

/// A scene rotation applied at arclength `s`: working coordinates are
/// `rotation · original`.
#[derive(Clone, Debug, PartialEq)]
pub struct Restart {
    pub s: f64,
    pub rotation: DMatrix<f64>,
}

/// Sampled solution. Positions, angles and curvatures are in the original
/// coordinates; curvatures refer to the normalized-partial frame of the
/// stored angles.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveTrace {
    pub states: Vec<CurveState>,
    pub kappas: Vec<Curvatures>,
    pub restarts: Vec<Restart>,
    pub meta: SolverMeta,
}

impl CurveTrace {
    pub fn length(&self) -> f64 {
        self.states.last().map_or(0.0, |s| s.s)
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, |s| s.dim())
    }

    pub fn dense(&self) -> Result<crate::curve::DenseCurve> {
        crate::curve::DenseCurve::from_trace(self)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub max_length: f64,
    /// `|sin ζ_k|` below which the frame is refused.
    pub singularity_threshold: f64,
    /// `|sin ζ_k|` below which the scene is rotated before continuing.
    pub restart_sine: f64,
    pub min_step: f64,
    pub max_steps: usize,
    pub stop_on_boundary: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            initial_step: 1e-3,
            max_step: 0.05,
            max_length: 10.0,
            singularity_threshold: SINGULARITY_THRESHOLD,
            restart_sine: 1e-2,
            min_step: 1e-12,
            max_steps: 2_000_000,
            stop_on_boundary: true,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        let positive = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("initial_step", self.initial_step),
            ("max_step", self.max_step),
            ("max_length", self.max_length),
            ("min_step", self.min_step),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive and finite")));
            }
        }
        if !(self.restart_sine >= self.singularity_threshold) {
            return Err(Error::InvalidInput("restart_sine must not be below singularity_threshold".into()));
        }
        Ok(())
    }
}

/// Right-hand side `(Γ′, ζ′)` with the curvatures it implies.
#[derive(Clone, Debug, PartialEq)]
pub struct Derivative {
    pub position: DVector<f64>,
    pub angles: Vec<f64>,
    pub kappa: Curvatures,
}

/// `Γ′ = T(ζ)`, `ζ′_j = (G⁻¹μ)_j / ‖T_{ζ_j}‖` from the normal slice.
pub fn rhs_general(dom: &Domain, state: &CurveState) -> Result<Derivative> {
    let (dy, kappa, _) = rhs_raw(dom, state.position.as_slice(), &state.angles, SINGULARITY_THRESHOLD)?;
    let d = state.dim();
    Ok(Derivative { position: DVector::from_column_slice(&dy[..d]), angles: dy[d..].to_vec(), kappa })
}

fn rhs_raw(dom: &Domain, x: &[f64], z: &SphericalAngles, threshold: f64) -> Result<(Vec<f64>, Curvatures, f64)> {
    let f = frame_from_angles_with(z, threshold)?;
    let section = cross_section(dom, x, &f)?;
    let (kappa, m) = section_curvatures(&section)?;
    let cond = if m.mu0 > 0.0 && m.dim() > 1 { gram_condition(&m.second) } else { 1.0 };
    let norms = tangent_partial_norms(z);
    let mut dy: Vec<f64> = f.tangent.as_slice().to_vec();
    dy.extend(kappa.as_slice().iter().zip(&norms).map(|(k, n)| k / n));
    Ok((dy, kappa, cond))
}

/// A scalar function of the curve whose sign change stops the integration.
pub struct StopEvent {
    pub name: String,
    pub crossing: Crossing,
    func: Box<dyn Fn(&EventPoint) -> f64 + Send + Sync>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Crossing {
    Rising,
    Falling,
    Either,
}

/// Curve data in original coordinates handed to event functions.
pub struct EventPoint<'a> {
    pub s: f64,
    pub position: &'a [f64],
    pub tangent: &'a [f64],
    pub curvature: &'a [f64],
}

impl StopEvent {
    pub fn new<F>(name: impl Into<String>, crossing: Crossing, f: F) -> StopEvent
    where
        F: Fn(&EventPoint) -> f64 + Send + Sync + 'static,
    {
        StopEvent { name: name.into(), crossing, func: Box::new(f) }
    }

    /// The tangent component along `axis` passes a maximum.
    pub fn tangent_turn(axis: usize) -> StopEvent {
        StopEvent::new(format!("tangent_turn_{axis}"), Crossing::Falling, move |p| p.curvature[axis])
    }

    /// Angle `ζ_index` (1-based) of the tangent crosses `level`.
    pub fn angle_level(index: usize, level: f64, crossing: Crossing) -> StopEvent {
        StopEvent::new(format!("angle_{index}_level"), crossing, move |p| {
            let z = angles_from_tangent(&DVector::from_column_slice(p.tangent)).expect("unit tangent");
            z.as_slice()[index - 1] - level
        })
    }

    fn value(&self, p: &EventPoint) -> f64 {
        (self.func)(p)
    }

    fn triggered(&self, before: f64, after: f64) -> bool {
        let rising = before < 0.0 && after >= 0.0;
        let falling = before > 0.0 && after <= 0.0;
        match self.crossing {
            Crossing::Rising => rising,
            Crossing::Falling => falling,
            Crossing::Either => rising || falling,
        }
    }
}

/// The system in working coordinates `w = R x`.
struct Working<'a> {
    original: &'a Domain,
    domain: Domain,
    rotation: Option<DMatrix<f64>>,
    quadrant: bool,
    dim: usize,
    threshold: f64,
    evals: usize,
    max_condition: f64,
}

/// Original-coordinate view of a working state.
struct Snapshot {
    position: Vec<f64>,
    tangent: Vec<f64>,
    curvature: Vec<f64>,
}

impl<'a> Working<'a> {
    fn eval(&mut self, y: &[f64]) -> Result<Vec<f64>> {
        self.evals += 1;
        let d = self.dim;
        if self.quadrant {
            return Ok(rhs_quadrant([y[0], y[1], y[2]])?.to_vec());
        }
        let z = SphericalAngles::wrapped(y[d..].to_vec());
        let (dy, _, cond) = rhs_raw(&self.domain, &y[..d], &z, self.threshold)?;
        self.max_condition = self.max_condition.max(cond);
        Ok(dy)
    }

    fn to_original(&self, v: &[f64]) -> Vec<f64> {
        match &self.rotation {
            Some(r) => r.tr_mul(&DVector::from_column_slice(v)).as_slice().to_vec(),
            None => v.to_vec(),
        }
    }

    /// Working curvatures from `ζ′ = D⁻¹κ`.
    fn kappa(&self, y: &[f64], dy: &[f64]) -> (SphericalAngles, Curvatures) {
        let d = self.dim;
        let z = SphericalAngles::wrapped(y[d..].to_vec());
        let norms = tangent_partial_norms(&z);
        let k = dy[d..].iter().zip(&norms).map(|(a, n)| a * n).collect();
        (z, Curvatures::new(k))
    }

    fn snapshot(&self, y: &[f64], dy: &[f64]) -> Snapshot {
        let (z, k) = self.kappa(y, dy);
        let f = frame_unchecked(&z);
        Snapshot {
            position: self.to_original(&y[..self.dim]),
            tangent: self.to_original(f.tangent.as_slice()),
            curvature: self.to_original(f.normal_combination(k.as_slice()).as_slice()),
        }
    }

    fn record(&self, s: f64, snap: &Snapshot) -> Result<(CurveState, Curvatures)> {
        let t = DVector::from_column_slice(&snap.tangent);
        let angles = angles_from_tangent(&t)?;
        let f = frame_unchecked(&angles);
        let k = f.normal_coordinates(&DVector::from_column_slice(&snap.curvature));
        Ok((CurveState { s, position: DVector::from_column_slice(&snap.position), angles }, Curvatures::new(k)))
    }

    fn needs_restart(&self, y: &[f64], limit: f64) -> bool {
        let d = self.dim;
        !self.quadrant && y[d..2 * d - 2].iter().any(|z| z.sin().abs() < limit)
    }

    /// Rotate the scene so the current tangent becomes `e_d`.
    fn restart(&mut self, snap: &Snapshot) -> Result<(DMatrix<f64>, Vec<f64>)> {
        let t = DVector::from_column_slice(&snap.tangent);
        let r = rotation_to_last_axis(&t.normalize());
        self.domain = self.original.rotated(&r)?;
        self.rotation = Some(r.clone());
        let w = &r * DVector::from_column_slice(&snap.position);
        let mut y = w.as_slice().to_vec();
        let z = angles_from_tangent(&(&r * t))?;
        y.extend_from_slice(z.as_slice());
        Ok((r, y))
    }

    fn event_value(&self, ev: &StopEvent, s: f64, snap: &Snapshot) -> f64 {
        ev.value(&EventPoint { s, position: &snap.position, tangent: &snap.tangent, curvature: &snap.curvature })
    }
}

pub fn integrate(dom: &Domain, init: &CurveState, cfg: &SolverConfig) -> Result<CurveTrace> {
    integrate_with(dom, init, cfg, None)
}

/// Adaptive Dormand–Prince integration with scene restarts near singular
/// frames and an optional stop event.
pub fn integrate_with(dom: &Domain, init: &CurveState, cfg: &SolverConfig, event: Option<&StopEvent>) -> Result<CurveTrace> {
    cfg.validate()?;
    let d = dom.dim();
    if init.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: init.dim() });
    }
    if !dom.contains_with_tol(init.position.as_slice(), BOUNDARY_SLACK) {
        return Err(Error::InadmissibleStart("initial point is outside the domain".into()));
    }
    let quadrant = matches!(dom.shape(), Shape::Quadrant2D) && dom.rotation().is_none();
    let mut sys = Working {
        original: dom,
        domain: dom.clone(),
        rotation: None,
        quadrant,
        dim: d,
        threshold: cfg.singularity_threshold,
        evals: 0,
        max_condition: 0.0,
    };
    let mut y: Vec<f64> = init.position.as_slice().to_vec();
    y.extend_from_slice(init.angles.as_slice());
    let mut s = init.s;
    let s_end = init.s + cfg.max_length;
    let mut restarts = Vec::new();
    if sys.needs_restart(&y, cfg.restart_sine) {
        let snap = Snapshot {
            position: init.position.as_slice().to_vec(),
            tangent: init.tangent().as_slice().to_vec(),
            curvature: vec![0.0; d],
        };
        let (r, y0) = sys.restart(&snap)?;
        restarts.push(Restart { s, rotation: r });
        y = y0;
    }
    let mut dy = sys.eval(&y).map_err(|e| Error::InadmissibleStart(e.to_string()))?;
    let mut snap = sys.snapshot(&y, &dy);
    let (st, k) = sys.record(s, &snap)?;
    let mut states = vec![st];
    let mut kappas = vec![k];
    let mut g_prev = event.map(|ev| sys.event_value(ev, s, &snap));

    let mut ctl = Controller::new();
    let mut h = cfg.initial_step.min(cfg.max_step);
    let (mut accepted, mut rejected) = (0usize, 0usize);
    let mut detail = None;

    let stop = loop {
        if s_end - s <= 1e-12 * s_end.abs().max(1.0) {
            break StopReason::LengthReached;
        }
        if accepted + rejected >= cfg.max_steps {
            break StopReason::StepLimit;
        }
        let last = h >= s_end - s;
        let step_h = if last { s_end - s } else { h.min(cfg.max_step) };
        let mut f = |v: &[f64]| sys.eval(v);
        let trial = try_step(&mut f, &y, &dy, step_h, cfg.rel_tol, cfg.abs_tol);
        let step = match trial {
            Err(e) => {
                rejected += 1;
                h = step_h * 0.25;
                if h < cfg.min_step {
                    // Stages just past the boundary see no section.
                    let ahead = sys.snapshot(&y, &dy);
                    let reach = 8.0 * step_h + 1e-12;
                    let probe: Vec<f64> = ahead.position.iter().zip(&ahead.tangent).map(|(p, t)| p + reach * t).collect();
                    if !dom.contains_with_tol(&probe, 0.0) {
                        if !cfg.stop_on_boundary {
                            return Err(Error::OutOfDomain(format!("curve reached the boundary at s = {s}")).at(s));
                        }
                        break StopReason::LeftDomain;
                    }
                    if !cfg.stop_on_boundary {
                        return Err(e.at(s));
                    }
                    detail = Some(e.to_string());
                    break match e.root() {
                        Error::SliceHitsBase => StopReason::SliceHitsBase,
                        _ => StopReason::SectionFailure,
                    };
                }
                continue;
            }
            Ok(st) if !(st.err <= 1.0) => {
                rejected += 1;
                h = step_h * if st.err.is_finite() { ctl.reject(st.err) } else { 0.1 };
                if h < cfg.min_step {
                    if !cfg.stop_on_boundary {
                        return Err(Error::StepSizeUnderflow { s, h }.at(s));
                    }
                    break StopReason::StepUnderflow;
                }
                continue;
            }
            Ok(st) => st,
        };
        let s_new = if last { s_end } else { s + step_h };
        let snap_new = sys.snapshot(&step.y, &step.dy);
        if !dom.contains_with_tol(&snap_new.position, BOUNDARY_SLACK) {
            if !cfg.stop_on_boundary {
                return Err(Error::OutOfDomain(format!("curve left the domain after s = {s}")).at(s_new));
            }
            break StopReason::LeftDomain;
        }
        if let (Some(ev), Some(gp)) = (event, g_prev) {
            let g_new = sys.event_value(ev, s_new, &snap_new);
            if ev.triggered(gp, g_new) {
                let (y_ev, dy_ev, s_ev) = locate_event(&mut sys, ev, &y, &dy, &step.y, &step.dy, s, step_h, gp, cfg)?;
                let snap_ev = sys.snapshot(&y_ev, &dy_ev);
                let (st, k) = sys.record(s_ev, &snap_ev)?;
                if s_ev > s {
                    states.push(st);
                    kappas.push(k);
                }
                accepted += 1;
                detail = Some(ev.name.clone());
                break StopReason::Event;
            }
            g_prev = Some(g_new);
        }
        accepted += 1;
        let (st, k) = sys.record(s_new, &snap_new)?;
        states.push(st);
        kappas.push(k);
        s = s_new;
        y = step.y;
        dy = step.dy;
        snap = snap_new;
        h = step_h * ctl.accept(step.err);
        if sys.needs_restart(&y, cfg.restart_sine) {
            let (r, y0) = sys.restart(&snap)?;
            restarts.push(Restart { s, rotation: r });
            y = y0;
            dy = match sys.eval(&y) {
                Ok(v) => v,
                Err(e) => {
                    if !cfg.stop_on_boundary {
                        return Err(e.at(s));
                    }
                    detail = Some(e.to_string());
                    break StopReason::SectionFailure;
                }
            };
        }
    };
    let stop_s = states.last().map_or(s, |st| st.s);
    Ok(CurveTrace {
        states,
        kappas,
        restarts,
        meta: SolverMeta {
            accepted,
            rejected,
            rhs_evals: sys.evals,
            stop,
            stop_s,
            stop_detail: detail,
            max_gram_condition: sys.max_condition,
        },
    })
}

/// Bisection on the cubic Hermite interpolant, then one exact step to the root.
#[allow(clippy::too_many_arguments)]
fn locate_event(
    sys: &mut Working,
    ev: &StopEvent,
    y0: &[f64],
    d0: &[f64],
    y1: &[f64],
    d1: &[f64],
    s0: f64,
    h: f64,
    g0: f64,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut g_lo = g0;
    for _ in 0..60 {
        if (hi - lo) * h < 1e-14 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let ym = hermite(y0, d0, y1, d1, h, mid);
        let g_mid = match sys.eval(&ym) {
            Ok(dm) => {
                let snap = sys.snapshot(&ym, &dm);
                sys.event_value(ev, s0 + mid * h, &snap)
            }
            Err(_) => break,
        };
        if ev.triggered(g_lo, g_mid) {
            hi = mid;
        } else {
            lo = mid;
            g_lo = g_mid;
        }
    }
    let hs = hi * h;
    let mut f = |v: &[f64]| sys.eval(v);
    let step = try_step(&mut f, y0, d0, hs, cfg.rel_tol, cfg.abs_tol)?;
    Ok((step.y, step.dy, s0 + hs))
}

/// Rigidly rotate a trace and its domain: positions and tangents are
/// mapped, angles and curvatures recomputed, restarts re-expressed.
pub fn rotate_scene(trace: &CurveTrace, dom: &Domain, rotation: &DMatrix<f64>) -> Result<(CurveTrace, Domain)> {
    let d = dom.dim();
    check_rotation(rotation, d, 1e-12)?;
    let mut states = Vec::with_capacity(trace.states.len());
    let mut kappas = Vec::with_capacity(trace.kappas.len());
    for (st, k) in trace.states.iter().zip(&trace.kappas) {
        let f = frame_unchecked(&st.angles);
        let curvature = rotation * f.normal_combination(k.as_slice());
        let t = rotation * &f.tangent;
        let angles = angles_from_tangent(&t)?;
        let g = frame_unchecked(&angles);
        kappas.push(Curvatures::new(g.normal_coordinates(&curvature)));
        states.push(CurveState { s: st.s, position: rotation * &st.position, angles });
    }
    let restarts = trace
        .restarts
        .iter()
        .map(|r| Restart { s: r.s, rotation: &r.rotation * rotation.transpose() })
        .collect();
    Ok((CurveTrace { states, kappas, restarts, meta: trace.meta.clone() }, dom.rotated(rotation)?))
}

/// Tangent `e_d` at the regular angles `(π/2, …, π/2)`.
pub fn vertical_angles(dim: usize) -> Vec<f64> {
    vec![FRAC_PI_2; dim - 1]
}
