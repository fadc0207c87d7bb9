//! Helices in the infinite cylinder `x₁² + x₂² ≤ r²`.

use std::f64::consts::{PI, TAU};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::curve::{Curve, Jet};
use crate::domain::CrossSection;
use crate::error::{Error, Result};
use crate::frame::Curvatures;
use crate::moments::{gauss_legendre, moments_quadrature};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HelixParams {
    pub a: f64,
    pub b: f64,
    pub r: f64,
}

impl HelixParams {
    pub fn new(a: f64, b: f64, r: f64) -> Result<HelixParams> {
        if !(a >= 0.0 && b >= 0.0 && a.is_finite() && b.is_finite()) || a == 0.0 && b == 0.0 {
            return Err(Error::InvalidInput(format!("helix needs a, b ≥ 0 not both zero, got ({a}, {b})")));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidInput(format!("cylinder radius must be positive, got {r}")));
        }
        Ok(HelixParams { a, b, r })
    }

    pub fn k(&self) -> f64 {
        1.0 / self.a.hypot(self.b)
    }

    pub fn curvature(&self) -> f64 {
        let k = self.k();
        self.a * k * k
    }

    pub fn torsion(&self) -> f64 {
        let k = self.k();
        self.b * k * k
    }

    /// Arclength of one turn.
    pub fn period(&self) -> f64 {
        TAU / self.k()
    }

    /// `1 − κ(a + r)`, the smallest Jacobian over the normal ellipse.
    pub fn min_jacobian(&self) -> f64 {
        1.0 - self.curvature() * (self.a + self.r)
    }
}

/// Point and Frenet frame `(T, N, B)` at arclength `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct HelixState {
    pub point: [f64; 3],
    pub tangent: [f64; 3],
    pub normal: [f64; 3],
    pub binormal: [f64; 3],
}

pub fn helix_state(p: &HelixParams, s: f64) -> HelixState {
    let k = p.k();
    let (sn, cs) = (k * s).sin_cos();
    HelixState {
        point: [p.a * cs, p.a * sn, p.b * k * s],
        tangent: [-p.a * k * sn, p.a * k * cs, p.b * k],
        normal: [-cs, -sn, 0.0],
        binormal: [p.b * k * sn, -p.b * k * cs, p.a * k],
    }
}

/// A helix piece `s ↦ H(start + s)` for `s ∈ [0, length]`.
#[derive(Clone, Debug, PartialEq)]
pub struct HelixCurve {
    pub params: HelixParams,
    pub start: f64,
    pub length: f64,
}

impl HelixCurve {
    pub fn new(params: HelixParams, start: f64, length: f64) -> Result<HelixCurve> {
        if !(length > 0.0) {
            return Err(Error::InvalidInput("helix length must be positive".into()));
        }
        Ok(HelixCurve { params, start, length })
    }

    /// Whole turns, starting at phase zero.
    pub fn periods(params: HelixParams, turns: f64) -> Result<HelixCurve> {
        HelixCurve::new(params, 0.0, turns * params.period())
    }
}

impl Curve for HelixCurve {
    fn dim(&self) -> usize {
        3
    }

    fn length(&self) -> f64 {
        self.length
    }

    fn eval(&self, s: f64, jet: &mut Jet) {
        let st = helix_state(&self.params, self.start + s.clamp(0.0, self.length));
        let kappa = self.params.curvature();
        jet.point.copy_from_slice(&st.point);
        jet.tangent.copy_from_slice(&st.tangent);
        for i in 0..3 {
            jet.curvature[i] = kappa * st.normal[i];
        }
    }
}

/// Mean offset `(ū₁, ū₂)` of the normal ellipse in `(N, B)` coordinates.
pub fn mean_offset_closed_form(p: &HelixParams) -> Result<(f64, f64)> {
    if p.a == 0.0 {
        return Ok((0.0, 0.0));
    }
    if p.b == 0.0 {
        return Err(Error::ZeroPitch);
    }
    Ok((p.a * (1.0 - p.r * p.r / (4.0 * p.b * p.b)), 0.0))
}

/// The normal section at `H(0)` in Frenet coordinates:
/// `(a − u₁)² + (bk u₂)² ≤ r²`.
pub fn normal_ellipse(p: &HelixParams) -> Result<CrossSection> {
    if p.b == 0.0 {
        return Err(Error::UnboundedSection);
    }
    Ok(CrossSection::aligned_ellipse([p.a, 0.0], [p.r, p.r / (p.b * p.k())]))
}

/// `(ū₁, ū₂)` by adaptive quadrature of the Jacobian-weighted ellipse.
pub fn mean_offset_quadrature(p: &HelixParams) -> Result<(f64, f64)> {
    let min = p.min_jacobian();
    if min < -1e-12 {
        return Err(Error::JacobianSignViolation { min });
    }
    let section = normal_ellipse(p)?;
    let m = moments_quadrature(&section, |_| 1.0, Some(&Curvatures::new(vec![p.curvature(), 0.0])))?;
    Ok((m.first[0] / m.mu0, m.first[1] / m.mu0))
}

/// Squared distance to `H` in the turn angle `θ = ks`, minus `ρ² + a²`.
struct TurnDistance {
    a: f64,
    b: f64,
    rho: f64,
    phi: f64,
    z: f64,
}

impl TurnDistance {
    fn new(p: &HelixParams, x: [f64; 3]) -> Self {
        TurnDistance { a: p.a, b: p.b, rho: x[0].hypot(x[1]), phi: x[1].atan2(x[0]), z: x[2] }
    }

    fn g(&self, th: f64) -> f64 {
        let dz = self.z - self.b * th;
        -2.0 * self.a * self.rho * (th - self.phi).cos() + dz * dz
    }

    /// Whether `θ = 0` attains the global minimum.
    fn zero_is_nearest(&self) -> bool {
        let g0 = self.g(0.0);
        let reach = (g0 + 2.0 * self.a * self.rho).max(0.0).sqrt();
        let (lo, hi) = if self.b > 0.0 {
            ((self.z - reach) / self.b, (self.z + reach) / self.b)
        } else {
            (-PI, PI)
        };
        let (lo, hi) = (lo.min(-0.5), hi.max(0.5));
        let n = (((hi - lo) / (TAU / 48.0)).ceil() as usize).max(8);
        let h = (hi - lo) / n as f64;
        let tol = 1e-12 * (1.0 + g0.abs());
        let vals: Vec<f64> = (0..=n).map(|i| self.g(lo + i as f64 * h)).collect();
        for i in 0..=n {
            let left = if i > 0 { vals[i - 1] } else { f64::INFINITY };
            let right = if i < n { vals[i + 1] } else { f64::INFINITY };
            if vals[i] > left || vals[i] > right {
                continue;
            }
            let c = lo + i as f64 * h;
            let (m, gm) = golden_min(|t| self.g(t), c - h, c + h);
            if gm < g0 - tol && (m.abs() > 1e-7 || gm < g0 - 1e-9 * (1.0 + g0.abs())) {
                return false;
            }
        }
        true
    }
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if b - a < 1e-13 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let m = 0.5 * (a + b);
    (m, f(m))
}

/// Quadrature sizes for `mean_offset_projection_region`.
#[derive(Clone, Copy, Debug)]
pub struct RegionQuadrature {
    pub panels: usize,
    pub order: usize,
    pub probes: usize,
}

impl Default for RegionQuadrature {
    fn default() -> Self {
        RegionQuadrature { panels: 24, order: 8, probes: 48 }
    }
}

/// `(ū₁, ū₂)` over the part of the normal ellipse whose nearest point on the
/// whole helix is `H(0)`. Agrees with `mean_offset_quadrature` when the
/// ellipse lies inside that region.
pub fn mean_offset_projection_region(p: &HelixParams, q: RegionQuadrature) -> Result<(f64, f64)> {
    if p.b == 0.0 {
        return Err(Error::ZeroPitch);
    }
    let k = p.k();
    let kappa = p.curvature();
    let beta = p.r / (p.b * k);
    // Ambient point of Frenet coordinates (u₁, u₂) at H(0).
    let inside = |u1: f64, u2: f64| {
        let x = [p.a - u1, -p.b * k * u2, p.a * k * u2];
        TurnDistance::new(p, x).zero_is_nearest()
    };
    // The region can be a thin band of the ellipse; locate it before integrating.
    let runs_at = |phi: f64| {
        let width = p.r * phi.cos();
        region_runs(|u1| inside(u1, beta * phi.sin()), p.a - width, p.a + width, q.probes)
    };
    let scan = 8 * q.panels;
    let step = PI / scan as f64;
    let hit: Vec<bool> = (0..=scan).map(|i| !runs_at(-PI / 2.0 + i as f64 * step).is_empty()).collect();
    let (Some(first), Some(last)) = (hit.iter().position(|&h| h), hit.iter().rposition(|&h| h)) else {
        return Err(Error::ZeroMass);
    };
    let edge = |inner: f64, outer: f64| {
        let (mut a, mut b) = (inner, outer);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if runs_at(m).is_empty() {
                b = m;
            } else {
                a = m;
            }
        }
        0.5 * (a + b)
    };
    let at = |i: usize| -PI / 2.0 + i as f64 * step;
    let lo = if first == 0 { -PI / 2.0 } else { edge(at(first), at(first - 1)) };
    let hi = if last == scan { PI / 2.0 } else { edge(at(last), at(last + 1)) };
    let rule = gauss_legendre(q.order);
    let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for panel in 0..q.panels {
        let pa = lo + (hi - lo) * panel as f64 / q.panels as f64;
        let pb = lo + (hi - lo) * (panel + 1) as f64 / q.panels as f64;
        let (mid, half) = (0.5 * (pa + pb), 0.5 * (pb - pa));
        for &(x, w) in &rule {
            let phi = mid + half * x;
            let u2 = beta * phi.sin();
            let jac = beta * phi.cos() * half * w;
            for (s, e) in runs_at(phi) {
                let mass = (e - s) - kappa * (e * e - s * s) / 2.0;
                let first = (e * e - s * s) / 2.0 - kappa * (e * e * e - s * s * s) / 3.0;
                m0 += jac * mass;
                m1 += jac * first;
                m2 += jac * u2 * mass;
            }
        }
    }
    if !(m0 > 0.0) {
        return Err(Error::ZeroMass);
    }
    Ok((m1 / m0, m2 / m0))
}

/// Maximal subintervals of `[lo, hi]` where `pred` holds, located on a probe
/// grid and refined by bisection.
fn region_runs<P: Fn(f64) -> bool>(pred: P, lo: f64, hi: f64, probes: usize) -> Vec<(f64, f64)> {
    if !(hi > lo) {
        return vec![];
    }
    let h = (hi - lo) / probes as f64;
    let flags: Vec<bool> = (0..=probes).map(|i| pred(lo + i as f64 * h)).collect();
    let edge = |a: f64, b: f64, fa: bool| {
        let (mut a, mut b) = (a, b);
        while b - a > 1e-12 * (1.0 + a.abs()) {
            let m = 0.5 * (a + b);
            if pred(m) == fa {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    };
    let mut runs = Vec::new();
    let mut start = if flags[0] { Some(lo) } else { None };
    for i in 0..probes {
        let (a, b) = (lo + i as f64 * h, lo + (i + 1) as f64 * h);
        if flags[i] != flags[i + 1] {
            let x = edge(a, b, flags[i]);
            if flags[i] {
                runs.push((start.take().unwrap(), x));
            } else {
                start = Some(x);
            }
        }
    }
    if let Some(s) = start {
        runs.push((s, hi));
    }
    runs
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PitchOutcome {
    /// `a ≤ r/4`: the closed form fixes `b = r/2`.
    ClosedForm { b: f64 },
    Root { b: f64, residual: f64, evaluations: usize },
    NoSolution { scanned: Vec<(f64, f64)> },
}

impl PitchOutcome {
    pub fn pitch(&self) -> Option<f64> {
        match self {
            PitchOutcome::ClosedForm { b } | PitchOutcome::Root { b, .. } => Some(*b),
            PitchOutcome::NoSolution { .. } => None,
        }
    }
}

/// Pitch `b` making `H(0)` the mean of its projection region. Scans down
/// from `r/2` for the first sign change of `ū₁` and refines it.
pub fn principal_pitch_search(a: f64, r: f64) -> Result<PitchOutcome> {
    if !(r > 0.0) || !(a >= 0.0) {
        return Err(Error::InvalidInput(format!("need a ≥ 0 and r > 0, got ({a}, {r})")));
    }
    if a >= 2.0 * r / 3.0 {
        return Err(Error::OutOfRegime { a, limit: 2.0 * r / 3.0 });
    }
    if a <= r / 4.0 {
        return Ok(PitchOutcome::ClosedForm { b: r / 2.0 });
    }
    let q = RegionQuadrature::default();
    let mut evals = 0usize;
    let mut f = |b: f64| -> Result<f64> {
        evals += 1;
        Ok(mean_offset_projection_region(&HelixParams::new(a, b, r)?, q)?.0)
    };
    let grid: Vec<f64> = (0..=18).map(|i| r / 2.0 * (0.02f64).powf(i as f64 / 18.0)).collect();
    let mut scanned = Vec::with_capacity(grid.len());
    let mut prev: Option<(f64, f64)> = None;
    let mut bracket = None;
    for &b in &grid {
        let v = f(b)?;
        scanned.push((b, v));
        if v == 0.0 {
            bracket = Some((b, v, b, v));
            break;
        }
        if let Some((pb, pv)) = prev {
            if pv * v < 0.0 {
                bracket = Some((b, v, pb, pv));
                break;
            }
        }
        prev = Some((b, v));
    }
    let Some((mut lo, mut flo, mut hi, mut fhi)) = bracket else {
        return Ok(PitchOutcome::NoSolution { scanned });
    };
    // Illinois variant of regula falsi.
    let mut side = 0i8;
    for _ in 0..100 {
        if hi - lo <= 1e-10 * r || flo == 0.0 {
            break;
        }
        let m = (lo * fhi - hi * flo) / (fhi - flo);
        let fm = f(m)?;
        if fm == 0.0 {
            lo = m;
            hi = m;
            break;
        }
        if fm * flo < 0.0 {
            hi = m;
            fhi = fm;
            if side == -1 {
                flo *= 0.5;
            }
            side = -1;
        } else {
            lo = m;
            flo = fm;
            if side == 1 {
                fhi *= 0.5;
            }
            side = 1;
        }
    }
    let b = 0.5 * (lo + hi);
    let residual = f(b)?.abs();
    Ok(PitchOutcome::Root { b, residual, evaluations: evals })
}

/// Frenet offset of a point in the normal plane at `H(0)`.
pub fn frenet_point(p: &HelixParams, u1: f64, u2: f64) -> DVector<f64> {
    let st = helix_state(p, 0.0);
    DVector::from_fn(3, |i, _| st.point[i] + u1 * st.normal[i] + u2 * st.binormal[i])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    #[test]
    fn frame_at_zero() {
        let p = HelixParams::new(0.2, 0.5, 1.0).unwrap();
        let k = p.k();
        let st = helix_state(&p, 0.0);
        assert_eq!(st.point, [0.2, 0.0, 0.0]);
        assert_eq!(st.normal, [-1.0, -0.0, 0.0]);
        assert_abs_diff_eq!(st.binormal[1], -0.5 * k, epsilon = 1e-16);
        assert_abs_diff_eq!(st.binormal[2], 0.2 * k, epsilon = 1e-16);
    }

    #[test]
    fn zero_pitch_is_a_circle() {
        let p = HelixParams::new(2.0 / 3.0, 0.0, 1.0).unwrap();
        for s in [0.0, 0.3, 1.7] {
            let st = helix_state(&p, s);
            assert_abs_diff_eq!(st.point[0].hypot(st.point[1]), 2.0 / 3.0, epsilon = 1e-15);
            assert_eq!(st.point[2], 0.0);
        }
        assert!(matches!(mean_offset_closed_form(&p), Err(Error::ZeroPitch)));
    }

    #[test]
    fn closed_form_examples() {
        let (u1, u2) = mean_offset_closed_form(&HelixParams::new(0.2, 0.5, 1.0).unwrap()).unwrap();
        assert_eq!((u1, u2), (0.0, 0.0));
        let (u1, _) = mean_offset_closed_form(&HelixParams::new(0.2, 1.0, 1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(u1, 0.15, epsilon = 1e-15);
        assert_eq!(mean_offset_closed_form(&HelixParams::new(0.0, 0.7, 1.0).unwrap()).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn quadrature_examples() {
        let (u1, u2) = mean_offset_quadrature(&HelixParams::new(0.2, 0.5, 1.0).unwrap()).unwrap();
        assert!(u1.abs() <= 1e-8 && u2.abs() <= 1e-8);
        let (u1, _) = mean_offset_quadrature(&HelixParams::new(0.2, 1.0, 1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(u1, 0.15, epsilon = 1e-8);
        let p = HelixParams::new(0.1, 0.5, 1.0).unwrap();
        let (u1, _) = mean_offset_quadrature(&p).unwrap();
        assert_abs_diff_eq!(u1, 0.0, epsilon = 1e-8);
        // H̄(0) = H(0) + ū₁N = (a r²/(4b²), 0, 0).
        assert_abs_diff_eq!(frenet_point(&p, u1, 0.0)[0], 0.1, epsilon = 1e-8);
        let bad = HelixParams::new(0.66, 0.1, 1.0).unwrap();
        assert!(matches!(mean_offset_quadrature(&bad), Err(Error::JacobianSignViolation { .. })));
    }

    #[test]
    fn region_mean_matches_ellipse_when_the_ellipse_projects_to_h0() {
        let p = HelixParams::new(0.2, 1.0, 1.0).unwrap();
        let (u1, _) = mean_offset_projection_region(&p, RegionQuadrature::default()).unwrap();
        assert_abs_diff_eq!(u1, 0.15, epsilon = 1e-6);
    }

    #[test]
    fn pitch_search_regimes() {
        assert_eq!(principal_pitch_search(0.1, 1.0).unwrap(), PitchOutcome::ClosedForm { b: 0.5 });
        assert!(matches!(principal_pitch_search(0.7, 1.0), Err(Error::OutOfRegime { .. })));
    }

    #[test]
    fn pitch_search_interior_root() {
        match principal_pitch_search(0.6, 1.0).unwrap() {
            PitchOutcome::Root { b, residual, .. } => {
                assert!(b < 0.5 && b > 0.05, "b = {b}");
                assert!(residual <= 1e-8, "residual {residual}");
            }
            other => panic!("{other:?}"),
        }
    }

    proptest! {
        #[test]
        fn frenet_frame_is_orthonormal(a in 0.0f64..2.0, b in 0.01f64..2.0, s in -20.0f64..20.0) {
            let p = HelixParams::new(a, b, 3.0).unwrap();
            let st = helix_state(&p, s);
            prop_assert!((dot(&st.tangent, &st.tangent) - 1.0).abs() < 1e-14);
            prop_assert!(dot(&st.tangent, &st.normal).abs() < 1e-14);
            prop_assert!(dot(&st.tangent, &st.binormal).abs() < 1e-14);
            prop_assert!(dot(&st.normal, &st.binormal).abs() < 1e-14);
            let (ka, ta, k) = (p.curvature(), p.torsion(), p.k());
            prop_assert!((ka * ka + ta * ta - k * k).abs() < 1e-14 * k * k);
        }

        #[test]
        fn curve_is_unit_speed(a in 0.0f64..2.0, b in 0.01f64..2.0, s in 0.0f64..10.0) {
            let c = HelixCurve::new(HelixParams::new(a, b, 3.0).unwrap(), 0.0, 10.0).unwrap();
            let h = 1e-5;
            let (p0, p1) = (c.point((s - h).max(0.0)), c.point((s + h).min(10.0)));
            let ds = (s + h).min(10.0) - (s - h).max(0.0);
            prop_assert!(((p1 - p0).norm() / ds - 1.0).abs() < 1e-6);
        }
    }
}
