use std::f64::consts::FRAC_PI_2;

use nalgebra::{DVector, Matrix2, Vector2};

use super::{signed_area, Domain, Shape};
use crate::error::{Error, Result};
use crate::frame::Frame;

/// Band around the quadrant corner state `(x₂, ζ) = (0, π/2)` where the
/// continued section is used.
pub(crate) const CORNER_X2_BAND: f64 = 1e-10;
pub(crate) const CORNER_ZETA_BAND: f64 = 1e-8;

/// A normal-plane slice `{u : Γ + Σ u_i N_i ∈ 𝕏}` in normal coordinates.
#[derive(Clone, Debug, PartialEq)]
pub enum CrossSection {
    /// `lo ≤ u ≤ hi` (d = 2).
    Interval { lo: f64, hi: f64 },
    /// Counterclockwise polygon in `(u₁, u₂)` (d = 3).
    Polygon { vertices: Vec<[f64; 2]> },
    /// `{c + A w : ‖w‖ ≤ 1}` (d = 3).
    Ellipse { center: [f64; 2], axes: [[f64; 2]; 2] },
    /// `‖u − c‖ ≤ radius` in `R^{d−1}`.
    Ball { center: Vec<f64>, radius: f64 },
}

impl CrossSection {
    /// Axis-aligned ellipse with the given semi-axes.
    pub fn aligned_ellipse(center: [f64; 2], semi_axes: [f64; 2]) -> CrossSection {
        CrossSection::Ellipse { center, axes: [[semi_axes[0], 0.0], [0.0, semi_axes[1]]] }
    }

    /// Number of normal coordinates.
    pub fn dim(&self) -> usize {
        match self {
            CrossSection::Interval { .. } => 1,
            CrossSection::Polygon { .. } | CrossSection::Ellipse { .. } => 2,
            CrossSection::Ball { center, .. } => center.len(),
        }
    }

    /// `(min, max)` of `βᵀu` over the section.
    pub fn linear_range(&self, beta: &[f64]) -> (f64, f64) {
        match self {
            CrossSection::Interval { lo, hi } => {
                let (a, b) = (beta[0] * lo, beta[0] * hi);
                (a.min(b), a.max(b))
            }
            CrossSection::Polygon { vertices } => vertices.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                let x = beta[0] * v[0] + beta[1] * v[1];
                (lo.min(x), hi.max(x))
            }),
            CrossSection::Ellipse { center, axes } => {
                let c = beta[0] * center[0] + beta[1] * center[1];
                // ‖Aᵀβ‖
                let w0 = axes[0][0] * beta[0] + axes[1][0] * beta[1];
                let w1 = axes[0][1] * beta[0] + axes[1][1] * beta[1];
                let r = w0.hypot(w1);
                (c - r, c + r)
            }
            CrossSection::Ball { center, radius } => {
                let c: f64 = center.iter().zip(beta).map(|(a, b)| a * b).sum();
                let r = radius * beta.iter().map(|b| b * b).sum::<f64>().sqrt();
                (c - r, c + r)
            }
        }
    }

    /// Smallest value of the Jacobian factor `1 − Σ κ_i u_i` on the section.
    pub fn min_jacobian(&self, kappa: &[f64]) -> f64 {
        1.0 - self.linear_range(kappa).1
    }

    /// Membership with an absolute slack.
    pub fn contains(&self, u: &[f64], tol: f64) -> bool {
        match self {
            CrossSection::Interval { lo, hi } => u[0] >= lo - tol && u[0] <= hi + tol,
            CrossSection::Polygon { vertices } => super::polygon_contains(vertices, [u[0], u[1]], tol),
            CrossSection::Ellipse { center, axes } => {
                let a = Matrix2::new(axes[0][0], axes[0][1], axes[1][0], axes[1][1]);
                match a.try_inverse() {
                    Some(inv) => {
                        let w = inv * Vector2::new(u[0] - center[0], u[1] - center[1]);
                        // Slack measured in u-units along the smaller axis.
                        let smin = a.singular_values().min();
                        w.norm() <= 1.0 + tol / smin.max(1e-300)
                    }
                    None => false,
                }
            }
            CrossSection::Ball { center, radius } => {
                let d2: f64 = center.iter().zip(u).map(|(c, x)| (c - x) * (c - x)).sum();
                d2.sqrt() <= radius + tol
            }
        }
    }
}

/// The slice of `dom` by the normal hyperplane of `f` through `position`.
pub fn cross_section(dom: &Domain, position: &[f64], f: &Frame) -> Result<CrossSection> {
    let d = dom.dim();
    if position.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: position.len() });
    }
    if f.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: f.dim() });
    }
    let p = dom.to_local(&DVector::from_column_slice(position));
    let frame = match dom.rotation() {
        Some(r) => f.transformed(&r.transpose()),
        None => f.clone(),
    };
    let p = p.as_slice();
    match dom.shape() {
        Shape::Quadrant2D => quadrant_section(p, &frame),
        Shape::Polygon2D { vertices } => polygon_line_section(vertices, p, &frame.normals[0]),
        Shape::QuarterDisk { r } => {
            let n = &frame.normals[0];
            let mut iv = LineInterval::new();
            iv.halfplane([-1.0, 0.0], 0.0, p, n);
            iv.halfplane([0.0, -1.0], 0.0, p, n);
            iv.disk(*r, p, n);
            iv.finish()
        }
        Shape::Prism { base, height } => prism_section(base, *height, p, &frame),
        Shape::Cylinder { r } => cylinder_section(*r, p, &frame),
        Shape::Ball { r, .. } => ball_section(*r, p, &frame),
        Shape::Cuboid { min, max } => match d {
            2 => {
                let n = &frame.normals[0];
                let mut iv = LineInterval::new();
                for i in 0..2 {
                    let mut a = [0.0; 2];
                    a[i] = 1.0;
                    iv.halfplane(a, max[i], p, n);
                    a[i] = -1.0;
                    iv.halfplane(a, -min[i], p, n);
                }
                iv.finish()
            }
            3 => cuboid_section_3d(min, max, p, &frame),
            _ => Err(Error::Unsupported(format!("cuboid cross-sections in dimension {d}"))),
        },
    }
}

fn quadrant_section(p: &[f64], f: &Frame) -> Result<CrossSection> {
    let t = &f.tangent;
    let zeta = t[1].atan2(t[0]);
    // Orientation of the supplied normal relative to (−sin ζ, cos ζ).
    let flip = f.normals[0][0] * (-zeta.sin()) + f.normals[0][1] * zeta.cos() < 0.0;
    let (x1, x2) = (p[0], p[1]);
    let (lo, hi) = if x2.abs() < CORNER_X2_BAND && (zeta - FRAC_PI_2).abs() < CORNER_ZETA_BAND && x1 > 0.0 {
        // Continuation of the interior formulas through the corner state.
        (-2.0 * x1, x1)
    } else {
        if !(zeta > 0.0 && zeta < FRAC_PI_2) {
            return Err(Error::UnboundedSection);
        }
        if x1 < 0.0 || x2 < 0.0 {
            return Err(Error::EmptySection);
        }
        (-x2 / zeta.cos(), x1 / zeta.sin())
    };
    if !(hi > lo) {
        return Err(Error::EmptySection);
    }
    Ok(if flip { CrossSection::Interval { lo: -hi, hi: -lo } } else { CrossSection::Interval { lo, hi } })
}

/// Intersection of half-line constraints along `p + u n`.
struct LineInterval {
    lo: f64,
    hi: f64,
    empty: bool,
}

impl LineInterval {
    fn new() -> Self {
        LineInterval { lo: f64::NEG_INFINITY, hi: f64::INFINITY, empty: false }
    }

    /// `a · x ≤ b`.
    fn halfplane(&mut self, a: [f64; 2], b: f64, p: &[f64], n: &DVector<f64>) {
        let an = a[0] * n[0] + a[1] * n[1];
        let slack = b - (a[0] * p[0] + a[1] * p[1]);
        if an.abs() < 1e-15 {
            if slack < -1e-12 {
                self.empty = true;
            }
        } else if an > 0.0 {
            self.hi = self.hi.min(slack / an);
        } else {
            self.lo = self.lo.max(slack / an);
        }
    }

    fn disk(&mut self, r: f64, p: &[f64], n: &DVector<f64>) {
        // |p + u n|² ≤ r², with |n| = 1.
        let b = p[0] * n[0] + p[1] * n[1];
        let c = p[0] * p[0] + p[1] * p[1] - r * r;
        let disc = b * b - c;
        if disc <= 0.0 {
            self.empty = true;
            return;
        }
        let s = disc.sqrt();
        self.lo = self.lo.max(-b - s);
        self.hi = self.hi.min(-b + s);
    }

    fn finish(self) -> Result<CrossSection> {
        if self.empty {
            return Err(Error::EmptySection);
        }
        if !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::UnboundedSection);
        }
        if !(self.hi > self.lo) {
            return Err(Error::EmptySection);
        }
        Ok(CrossSection::Interval { lo: self.lo, hi: self.hi })
    }
}

fn polygon_line_section(v: &[[f64; 2]], p: &[f64], n: &DVector<f64>) -> Result<CrossSection> {
    // Signed distance of each vertex to the line through p along n, and
    // the line parameter of each proper crossing.
    let m = v.len();
    let side: Vec<f64> = v.iter().map(|q| (q[0] - p[0]) * n[1] - (q[1] - p[1]) * n[0]).collect();
    let along: Vec<f64> = v.iter().map(|q| (q[0] - p[0]) * n[0] + (q[1] - p[1]) * n[1]).collect();
    let mut ts = Vec::new();
    for i in 0..m {
        let j = (i + 1) % m;
        if (side[i] > 0.0) != (side[j] > 0.0) {
            let w = side[i] / (side[i] - side[j]);
            ts.push(along[i] + w * (along[j] - along[i]));
        }
    }
    ts.sort_by(f64::total_cmp);
    let scale = v.iter().flatten().fold(1.0f64, |a, c| a.max(c.abs()));
    let eps = 1e-12 * scale;
    ts.chunks_exact(2)
        .map(|c| (c[0], c[1]))
        .filter(|(lo, hi)| hi > lo)
        .find(|(lo, hi)| *lo <= eps && *hi >= -eps)
        .map(|(lo, hi)| CrossSection::Interval { lo, hi })
        .ok_or(Error::EmptySection)
}

fn prism_section(base: &[[f64; 2]], height: Option<f64>, p: &[f64], f: &Frame) -> Result<CrossSection> {
    let t = &f.tangent;
    if t[2].abs() < 1e-12 {
        // A vertical normal plane meets the bottom base.
        return Err(Error::SliceHitsBase);
    }
    let (n1, n2) = (&f.normals[0], &f.normals[1]);
    let tol = 1e-9 * height.unwrap_or(1.0).max(1.0);
    let triangular = n2[0] == 0.0 && n1[0].abs() > 1e-12 && n2[1].abs() > 1e-12;
    let mut verts = Vec::with_capacity(base.len());
    for e in base {
        let rhs = [e[0] - p[0], e[1] - p[1], -p[2]];
        let (u1, u2, v) = if triangular {
            // [N₁ N₂ −e₃] is lower triangular: forward substitution.
            let u1 = rhs[0] / n1[0];
            let u2 = (rhs[1] - n1[1] * u1) / n2[1];
            let v = n1[2] * u1 + n2[2] * u2 - rhs[2];
            (u1, u2, v)
        } else {
            let v = -(rhs[0] * t[0] + rhs[1] * t[1] + rhs[2] * t[2]) / t[2];
            let w = [rhs[0], rhs[1], rhs[2] + v];
            let u1 = w[0] * n1[0] + w[1] * n1[1] + w[2] * n1[2];
            let u2 = w[0] * n2[0] + w[1] * n2[1] + w[2] * n2[2];
            (u1, u2, v)
        };
        if v < -tol || height.is_some_and(|h| v > h + tol) {
            return Err(Error::SliceHitsBase);
        }
        verts.push([u1, u2]);
    }
    clean_polygon(verts)
}

/// Orient counterclockwise and drop collinear or repeated vertices.
pub(crate) fn clean_polygon(mut v: Vec<[f64; 2]>) -> Result<CrossSection> {
    let area = signed_area(&v);
    if area.abs() < 1e-14 {
        return Err(Error::EmptySection);
    }
    if area < 0.0 {
        v.reverse();
    }
    let scale = v.iter().flatten().fold(0.0f64, |a, c| a.max(c.abs())).max(1e-300);
    let mut changed = true;
    while changed && v.len() > 3 {
        changed = false;
        let n = v.len();
        for i in 0..n {
            let a = v[(i + n - 1) % n];
            let b = v[i];
            let c = v[(i + 1) % n];
            let cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
            if cross.abs() <= 1e-12 * scale * scale {
                v.remove(i);
                changed = true;
                break;
            }
        }
    }
    Ok(CrossSection::Polygon { vertices: v })
}

fn cylinder_section(r: f64, p: &[f64], f: &Frame) -> Result<CrossSection> {
    let (n1, n2) = (&f.normals[0], &f.normals[1]);
    let m = Matrix2::new(n1[0], n2[0], n1[1], n2[1]);
    let minv = match m.try_inverse() {
        Some(inv) if m.determinant().abs() > 1e-12 => inv,
        _ => return Err(Error::UnboundedSection),
    };
    if p[0].hypot(p[1]) > r * (1.0 + 1e-12) {
        return Err(Error::EmptySection);
    }
    // |p_xy + M u| ≤ r  ⇔  u = −M⁻¹ p_xy + r M⁻¹ w, ‖w‖ ≤ 1.
    let c = -(minv * Vector2::new(p[0], p[1]));
    let a = minv * r;
    Ok(CrossSection::Ellipse { center: [c[0], c[1]], axes: [[a[(0, 0)], a[(0, 1)]], [a[(1, 0)], a[(1, 1)]]] })
}

fn ball_section(r: f64, p: &[f64], f: &Frame) -> Result<CrossSection> {
    let pv = DVector::from_column_slice(p);
    let delta = -pv.dot(&f.tangent);
    let rho2 = r * r - delta * delta;
    if rho2 < -1e-12 * r * r {
        return Err(Error::EmptySection);
    }
    let rho = rho2.max(0.0).sqrt();
    let center: Vec<f64> = f.normals.iter().map(|n| -pv.dot(n)).collect();
    if center.len() == 1 {
        if !(rho > 0.0) {
            return Err(Error::EmptySection);
        }
        return Ok(CrossSection::Interval { lo: center[0] - rho, hi: center[0] + rho });
    }
    Ok(CrossSection::Ball { center, radius: rho })
}

fn cuboid_section_3d(min: &[f64], max: &[f64], p: &[f64], f: &Frame) -> Result<CrossSection> {
    let (n1, n2) = (&f.normals[0], &f.normals[1]);
    let mut far = 0.0f64;
    for corner in 0..8 {
        let mut d2 = 0.0;
        for i in 0..3 {
            let c = if corner >> i & 1 == 1 { max[i] } else { min[i] };
            d2 += (c - p[i]) * (c - p[i]);
        }
        far = far.max(d2.sqrt());
    }
    let big = 2.0 * far + 1.0;
    let mut poly = vec![[-big, -big], [big, -big], [big, big], [-big, big]];
    for i in 0..3 {
        // min_i ≤ p_i + u₁N₁_i + u₂N₂_i ≤ max_i
        poly = clip(&poly, [n1[i], n2[i]], max[i] - p[i]);
        poly = clip(&poly, [-n1[i], -n2[i]], p[i] - min[i]);
        if poly.len() < 3 {
            return Err(Error::EmptySection);
        }
    }
    clean_polygon(poly)
}

/// Sutherland–Hodgman clip of a convex polygon by `a·u ≤ b`.
fn clip(poly: &[[f64; 2]], a: [f64; 2], b: f64) -> Vec<[f64; 2]> {
    let g = |q: &[f64; 2]| a[0] * q[0] + a[1] * q[1] - b;
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let cur = poly[i];
        let next = poly[(i + 1) % poly.len()];
        let (gc, gn) = (g(&cur), g(&next));
        if gc <= 0.0 {
            out.push(cur);
        }
        if (gc < 0.0 && gn > 0.0) || (gc > 0.0 && gn < 0.0) {
            let w = gc / (gc - gn);
            out.push([cur[0] + w * (next[0] - cur[0]), cur[1] + w * (next[1] - cur[1])]);
        }
    }
    out
}
