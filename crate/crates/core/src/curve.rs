//! Arclength-parameterized curves: dense output of solver traces and a few
//! analytic reference curves.

use nalgebra::DVector;

use crate::dynamics::{CurveState, CurveTrace, SolverMeta, StopReason};
use crate::error::{Error, Result};
use crate::frame::{angles_from_tangent, frame_unchecked, tangent_from_angles, Curvatures, Frame};

/// Position, unit tangent and curvature vector `T′` at one arclength.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub point: Vec<f64>,
    pub tangent: Vec<f64>,
    pub curvature: Vec<f64>,
}

impl Jet {
    pub fn new(dim: usize) -> Jet {
        Jet { point: vec![0.0; dim], tangent: vec![0.0; dim], curvature: vec![0.0; dim] }
    }
}

pub trait Curve: Sync {
    fn dim(&self) -> usize;

    /// Total arclength `ℓ`.
    fn length(&self) -> f64;

    /// Evaluate at `s`, clamped into `[0, ℓ]`.
    fn eval(&self, s: f64, jet: &mut Jet);

    /// Arclengths where the curve has natural knots, including both ends.
    fn knots(&self) -> Vec<f64> {
        vec![0.0, self.length()]
    }

    fn jet(&self, s: f64) -> Jet {
        let mut j = Jet::new(self.dim());
        self.eval(s, &mut j);
        j
    }

    fn point(&self, s: f64) -> DVector<f64> {
        DVector::from_vec(self.jet(s).point)
    }

    /// Canonical frame of the tangent and the curvatures in it.
    fn frame_and_curvatures(&self, s: f64) -> Result<(Vec<f64>, Frame, Curvatures)> {
        let j = self.jet(s);
        let f = Frame::for_tangent(&DVector::from_vec(j.tangent))?;
        let k = f.normal_coordinates(&DVector::from_vec(j.curvature));
        Ok((j.point, f, Curvatures::new(k)))
    }
}

/// Quintic Hermite interpolation of `(p, T, T′)` at the nodes of a trace.
#[derive(Clone, Debug)]
pub struct DenseCurve {
    dim: usize,
    s: Vec<f64>,
    p: Vec<f64>,
    t: Vec<f64>,
    k: Vec<f64>,
}

impl DenseCurve {
    /// From node arclengths and jets; `s` must be strictly increasing.
    pub fn from_jets(s: Vec<f64>, jets: Vec<Jet>) -> Result<DenseCurve> {
        if s.len() < 2 || jets.len() != s.len() {
            return Err(Error::InvalidInput("dense curve needs at least two nodes with jets".into()));
        }
        if s.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("node arclengths must increase strictly".into()));
        }
        let dim = jets[0].point.len();
        let mut out = DenseCurve { dim, s: s.clone(), p: vec![], t: vec![], k: vec![] };
        let s0 = s[0];
        out.s.iter_mut().for_each(|v| *v -= s0);
        for j in jets {
            out.p.extend(j.point);
            out.t.extend(j.tangent);
            out.k.extend(j.curvature);
        }
        Ok(out)
    }

    pub fn from_trace(trace: &CurveTrace) -> Result<DenseCurve> {
        let jets = trace
            .states
            .iter()
            .zip(&trace.kappas)
            .map(|(st, k)| {
                let f = frame_unchecked(&st.angles);
                Jet {
                    point: st.position.as_slice().to_vec(),
                    tangent: f.tangent.as_slice().to_vec(),
                    curvature: f.normal_combination(k.as_slice()).as_slice().to_vec(),
                }
            })
            .collect();
        DenseCurve::from_jets(trace.states.iter().map(|st| st.s).collect(), jets)
    }
}

impl Curve for DenseCurve {
    fn dim(&self) -> usize {
        self.dim
    }

    fn length(&self) -> f64 {
        *self.s.last().unwrap()
    }

    fn knots(&self) -> Vec<f64> {
        self.s.clone()
    }

    fn eval(&self, s: f64, jet: &mut Jet) {
        let s = s.clamp(0.0, self.length());
        let i = self.s.partition_point(|&v| v <= s).clamp(1, self.s.len() - 1) - 1;
        let (s0, s1) = (self.s[i], self.s[i + 1]);
        let h = s1 - s0;
        let x = (s - s0) / h;
        let (x2, x3, x4, x5) = (x * x, x * x * x, x.powi(4), x.powi(5));
        // Basis for p0, h·T0, h²·K0, h²·K1, h·T1, p1.
        let b = [
            1.0 - 10.0 * x3 + 15.0 * x4 - 6.0 * x5,
            x - 6.0 * x3 + 8.0 * x4 - 3.0 * x5,
            0.5 * x2 - 1.5 * x3 + 1.5 * x4 - 0.5 * x5,
            0.5 * x3 - x4 + 0.5 * x5,
            -4.0 * x3 + 7.0 * x4 - 3.0 * x5,
            10.0 * x3 - 15.0 * x4 + 6.0 * x5,
        ];
        let db = [
            -30.0 * x2 + 60.0 * x3 - 30.0 * x4,
            1.0 - 18.0 * x2 + 32.0 * x3 - 15.0 * x4,
            x - 4.5 * x2 + 6.0 * x3 - 2.5 * x4,
            1.5 * x2 - 4.0 * x3 + 2.5 * x4,
            -12.0 * x2 + 28.0 * x3 - 15.0 * x4,
            30.0 * x2 - 60.0 * x3 + 30.0 * x4,
        ];
        let ddb = [
            -60.0 * x + 180.0 * x2 - 120.0 * x3,
            -36.0 * x + 96.0 * x2 - 60.0 * x3,
            1.0 - 9.0 * x + 18.0 * x2 - 10.0 * x3,
            3.0 * x - 12.0 * x2 + 10.0 * x3,
            -24.0 * x + 84.0 * x2 - 60.0 * x3,
            60.0 * x - 180.0 * x2 + 120.0 * x3,
        ];
        let d = self.dim;
        let (a, c) = (i * d, (i + 1) * d);
        for j in 0..d {
            let coef = [
                self.p[a + j],
                h * self.t[a + j],
                h * h * self.k[a + j],
                h * h * self.k[c + j],
                h * self.t[c + j],
                self.p[c + j],
            ];
            jet.point[j] = (0..6).map(|m| b[m] * coef[m]).sum();
            jet.tangent[j] = (0..6).map(|m| db[m] * coef[m]).sum::<f64>() / h;
            jet.curvature[j] = (0..6).map(|m| ddb[m] * coef[m]).sum::<f64>() / (h * h);
        }
        // Unit tangent and curvature orthogonal to it.
        let n = jet.tangent.iter().map(|v| v * v).sum::<f64>().sqrt();
        jet.tangent.iter_mut().for_each(|v| *v /= n);
        let kt: f64 = jet.curvature.iter().zip(&jet.tangent).map(|(a, b)| a * b).sum();
        for j in 0..d {
            jet.curvature[j] -= kt * jet.tangent[j];
        }
    }
}

/// Straight segment from `a` to `b`.
#[derive(Clone, Debug)]
pub struct Segment {
    a: Vec<f64>,
    dir: Vec<f64>,
    len: f64,
}

impl Segment {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Segment> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
        }
        let len = a.iter().zip(&b).map(|(x, y)| (y - x) * (y - x)).sum::<f64>().sqrt();
        if !(len > 0.0) {
            return Err(Error::ZeroVector);
        }
        let dir = a.iter().zip(&b).map(|(x, y)| (y - x) / len).collect();
        Ok(Segment { a, dir, len })
    }
}

impl Curve for Segment {
    fn dim(&self) -> usize {
        self.a.len()
    }
    fn length(&self) -> f64 {
        self.len
    }
    fn eval(&self, s: f64, jet: &mut Jet) {
        let s = s.clamp(0.0, self.len);
        for j in 0..self.a.len() {
            jet.point[j] = self.a[j] + s * self.dir[j];
            jet.tangent[j] = self.dir[j];
            jet.curvature[j] = 0.0;
        }
    }
}

/// Planar circular arc, counterclockwise from `start` (angle) through `sweep` radians.
#[derive(Clone, Debug)]
pub struct Arc {
    pub center: [f64; 2],
    pub radius: f64,
    pub start: f64,
    pub sweep: f64,
}

impl Arc {
    /// The arc of radius `radius` about the origin inside the first quadrant.
    pub fn quarter(radius: f64) -> Arc {
        Arc { center: [0.0, 0.0], radius, start: 0.0, sweep: std::f64::consts::FRAC_PI_2 }
    }
}

impl Curve for Arc {
    fn dim(&self) -> usize {
        2
    }
    fn length(&self) -> f64 {
        self.radius * self.sweep.abs()
    }
    fn eval(&self, s: f64, jet: &mut Jet) {
        let s = s.clamp(0.0, self.length());
        let sg = self.sweep.signum();
        let th = self.start + sg * s / self.radius;
        let (sn, cs) = th.sin_cos();
        jet.point[0] = self.center[0] + self.radius * cs;
        jet.point[1] = self.center[1] + self.radius * sn;
        jet.tangent[0] = -sg * sn;
        jet.tangent[1] = sg * cs;
        jet.curvature[0] = -cs / self.radius;
        jet.curvature[1] = -sn / self.radius;
    }
}

/// `x₂ = c·x₁²` for `x₁ ∈ [from, to]`, by arclength.
#[derive(Clone, Debug)]
pub struct Parabola {
    c: f64,
    from: f64,
    to: f64,
    s_from: f64,
    len: f64,
}

impl Parabola {
    pub fn new(c: f64, from: f64, to: f64) -> Result<Parabola> {
        if !(to > from) || c == 0.0 {
            return Err(Error::InvalidInput("parabola needs c ≠ 0 and from < to".into()));
        }
        let s_from = Self::primitive(c, from);
        Ok(Parabola { c, from, to, s_from, len: Self::primitive(c, to) - s_from })
    }

    /// `∫₀ˣ √(1 + 4c²t²) dt`.
    fn primitive(c: f64, x: f64) -> f64 {
        let q = 2.0 * c * x;
        x * (1.0 + q * q).sqrt() / 2.0 + q.asinh() / (4.0 * c)
    }

    fn abscissa(&self, s: f64) -> f64 {
        let target = self.s_from + s;
        let mut x = self.from + (self.to - self.from) * s / self.len;
        for _ in 0..60 {
            let f = Self::primitive(self.c, x) - target;
            let dx = f / (1.0 + 4.0 * self.c * self.c * x * x).sqrt();
            x = (x - dx).clamp(self.from, self.to);
            if dx.abs() < 1e-15 * (1.0 + x.abs()) {
                break;
            }
        }
        x
    }
}

impl Curve for Parabola {
    fn dim(&self) -> usize {
        2
    }
    fn length(&self) -> f64 {
        self.len
    }
    fn eval(&self, s: f64, jet: &mut Jet) {
        let x = self.abscissa(s.clamp(0.0, self.len));
        let slope = 2.0 * self.c * x;
        let w = (1.0 + slope * slope).sqrt();
        jet.point[0] = x;
        jet.point[1] = self.c * x * x;
        jet.tangent[0] = 1.0 / w;
        jet.tangent[1] = slope / w;
        let kappa = 2.0 * self.c / (w * w * w);
        jet.curvature[0] = -kappa * slope / w;
        jet.curvature[1] = kappa / w;
    }
}

/// Sample a curve at `n + 1` uniform arclengths as a trace.
pub fn sample_curve<C: Curve + ?Sized>(curve: &C, n: usize) -> Result<CurveTrace> {
    let n = n.max(1);
    let len = curve.length();
    let mut states = Vec::with_capacity(n + 1);
    let mut kappas = Vec::with_capacity(n + 1);
    let mut jet = Jet::new(curve.dim());
    for i in 0..=n {
        let s = len * i as f64 / n as f64;
        curve.eval(s, &mut jet);
        let t = DVector::from_column_slice(&jet.tangent);
        let angles = angles_from_tangent(&t)?;
        let f = frame_unchecked(&angles);
        kappas.push(Curvatures::new(f.normal_coordinates(&DVector::from_column_slice(&jet.curvature))));
        states.push(CurveState { s, position: DVector::from_column_slice(&jet.point), angles });
    }
    Ok(CurveTrace { states, kappas, restarts: vec![], meta: SolverMeta::finished(StopReason::LengthReached, len) })
}

/// Check `tangent_from_angles` against the jet tangent (used in tests).
pub fn tangent_defect(trace: &CurveTrace, curve: &dyn Curve) -> f64 {
    trace
        .states
        .iter()
        .map(|st| {
            let t = tangent_from_angles(&st.angles);
            let j = curve.jet(st.s);
            t.iter().zip(&j.tangent).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hermite_reproduces_the_arc() {
        let arc = Arc::quarter(2.0 / 3.0);
        let trace = sample_curve(&arc, 64).unwrap();
        let dense = DenseCurve::from_trace(&trace).unwrap();
        assert_abs_diff_eq!(dense.length(), arc.length(), epsilon = 1e-14);
        assert!(tangent_defect(&trace, &arc) < 1e-14);
        for i in 0..=200 {
            let s = arc.length() * i as f64 / 200.0;
            let (a, b) = (arc.jet(s), dense.jet(s));
            for j in 0..2 {
                assert_abs_diff_eq!(a.point[j], b.point[j], epsilon = 1e-11);
                assert_abs_diff_eq!(a.tangent[j], b.tangent[j], epsilon = 1e-9);
                assert_abs_diff_eq!(a.curvature[j], b.curvature[j], epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn parabola_is_unit_speed() {
        let p = Parabola::new(1.0, 0.0, 1.0).unwrap();
        let exact = (5f64.sqrt() / 2.0) + 2f64.asinh() / 4.0;
        assert_abs_diff_eq!(p.length(), exact, epsilon = 1e-14);
        let j = p.jet(p.length());
        assert_abs_diff_eq!(j.point[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(j.point[1], 1.0, epsilon = 1e-12);
        let h = 1e-5;
        for s in [0.1, 0.7, 1.3] {
            let d = (p.point(s + h) - p.point(s - h)) / (2.0 * h);
            assert_abs_diff_eq!(d.norm(), 1.0, epsilon = 1e-9);
            let j = p.jet(s);
            let dt = (DVector::from_vec(p.jet(s + h).tangent) - DVector::from_vec(p.jet(s - h).tangent)) / (2.0 * h);
            assert_abs_diff_eq!(dt[0], j.curvature[0], epsilon = 1e-7);
            assert_abs_diff_eq!(dt[1], j.curvature[1], epsilon = 1e-7);
        }
    }

    #[test]
    fn segment_clamps() {
        let seg = Segment::new(vec![0.0, 0.0], vec![1.0, 0.0]).unwrap();
        assert_eq!(seg.jet(2.0).point, vec![1.0, 0.0]);
        assert!(Segment::new(vec![1.0], vec![1.0]).is_err());
    }
}
