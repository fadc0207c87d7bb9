//! Projection index `λ(x)`: the largest arclength of a nearest curve point.

use crate::curve::{Curve, Jet};
use crate::linalg::{dist2, dot};

/// Relative distance slack under which two minima count as tied.
pub const TIE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projection {
    pub s: f64,
    pub distance: f64,
    /// Distance of the best local minimum away from `s`, if any.
    pub runner_up: Option<f64>,
}

/// Node table over a curve for repeated projections.
pub struct Projector<'a> {
    curve: &'a dyn Curve,
    dim: usize,
    s: Vec<f64>,
    points: Vec<f64>,
    tangents: Vec<f64>,
    spacing: f64,
}

impl<'a> Projector<'a> {
    /// Nodes no further apart than `min(ℓ/512, 0.01)` and at every knot.
    pub fn new(curve: &'a dyn Curve) -> Projector<'a> {
        let len = curve.length();
        let target = (len / 512.0).clamp(1e-12, 0.01);
        let mut s: Vec<f64> = Vec::new();
        let knots = curve.knots();
        for w in knots.windows(2) {
            let n = ((w[1] - w[0]) / target).ceil().max(1.0) as usize;
            for i in 0..n {
                s.push(w[0] + (w[1] - w[0]) * i as f64 / n as f64);
            }
        }
        s.push(len);
        s.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        let dim = curve.dim();
        let mut points = Vec::with_capacity(s.len() * dim);
        let mut tangents = Vec::with_capacity(s.len() * dim);
        let mut jet = Jet::new(dim);
        let mut spacing: f64 = 0.0;
        for (i, &si) in s.iter().enumerate() {
            curve.eval(si, &mut jet);
            points.extend_from_slice(&jet.point);
            tangents.extend_from_slice(&jet.tangent);
            if i > 0 {
                spacing = spacing.max(si - s[i - 1]);
            }
        }
        Projector { curve, dim, s, points, tangents, spacing }
    }

    pub fn nodes(&self) -> usize {
        self.s.len()
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    fn tangent(&self, i: usize) -> &[f64] {
        &self.tangents[i * self.dim..(i + 1) * self.dim]
    }

    /// Global nearest point with the sup convention on ties.
    pub fn project(&self, x: &[f64]) -> Projection {
        let n = self.s.len();
        let mut d = Vec::with_capacity(n);
        let mut best = f64::INFINITY;
        for i in 0..n {
            let v = dist2(self.point(i), x).sqrt();
            best = best.min(v);
            d.push(v);
        }
        let mut jet = Jet::new(self.dim);
        // (s, distance) of local minima.
        let mut minima: Vec<(f64, f64)> = Vec::new();
        let slack = 0.5 * self.spacing;
        let g_at = |i: usize| -> f64 {
            let p = self.point(i);
            let t = self.tangent(i);
            p.iter().zip(x).zip(t).map(|((a, b), c)| (a - b) * c).sum()
        };
        for i in 0..n.saturating_sub(1) {
            if d[i].min(d[i + 1]) - slack > best {
                continue;
            }
            let (a, b) = (self.s[i], self.s[i + 1]);
            let (ga, gb) = (g_at(i), g_at(i + 1));
            if ga < 0.0 && gb >= 0.0 {
                let s = self.root(x, a, b, &mut jet);
                self.curve.eval(s, &mut jet);
                minima.push((s, dist2(&jet.point, x).sqrt()));
            }
            // Endpoints with `g` at roundoff level still count as minima.
            if i == 0 && ga >= -1e-12 * (1.0 + d[i]) {
                minima.push((a, d[i]));
            }
            if i + 2 == n && gb <= 1e-12 * (1.0 + d[i + 1]) {
                minima.push((b, d[i + 1]));
            }
        }
        if minima.is_empty() {
            // Degenerate: fall back to the best node.
            let i = (0..n).rev().min_by(|&p, &q| d[p].total_cmp(&d[q])).unwrap();
            return Projection { s: self.s[i], distance: d[i], runner_up: None };
        }
        let dmin = minima.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
        let tie = TIE_TOL * (1.0 + dmin);
        let chosen = minima
            .iter()
            .filter(|m| m.1 <= dmin + tie)
            .map(|m| m.0)
            .fold(f64::NEG_INFINITY, f64::max);
        let far = 2.0 * self.spacing;
        let runner_up = minima
            .iter()
            .filter(|m| (m.0 - chosen).abs() > far)
            .map(|m| m.1)
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))));
        Projection { s: chosen, distance: dmin, runner_up }
    }

    /// Root of `⟨Γ(s) − x, T(s)⟩` in `[a, b]`, Newton safeguarded by bisection.
    fn root(&self, x: &[f64], mut a: f64, mut b: f64, jet: &mut Jet) -> f64 {
        let mut s = 0.5 * (a + b);
        for _ in 0..60 {
            self.curve.eval(s, jet);
            let diff: Vec<f64> = jet.point.iter().zip(x).map(|(p, q)| p - q).collect();
            let g = dot(&diff, &jet.tangent);
            let dg = 1.0 + dot(&diff, &jet.curvature);
            if g < 0.0 {
                a = s;
            } else {
                b = s;
            }
            let newton = s - g / dg;
            let next = if dg > 0.0 && newton > a && newton < b { newton } else { 0.5 * (a + b) };
            if (next - s).abs() <= 1e-14 * (1.0 + s.abs()) || b - a <= 1e-14 * (1.0 + s.abs()) {
                return next;
            }
            s = next;
        }
        s
    }
}
