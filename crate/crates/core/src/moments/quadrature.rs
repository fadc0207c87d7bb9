//! Gauss–Legendre rules and the adaptive oracle for section moments.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use super::MomentSet;
use crate::domain::CrossSection;
use crate::error::{Error, Result};
use crate::frame::Curvatures;
use nalgebra::{DMatrix, DVector};

/// Maximum subdivision depth of the adaptive rules.
pub const MAX_LEVELS: usize = 12;
const ORDER: usize = 10;
const REL_TOL: f64 = 1e-13;

/// Nodes and weights of the `n`-point rule on `[-1, 1]`, by Newton's
/// method on `P_n` from the Chebyshev-like initial guesses.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut out = vec![(0.0, 0.0); n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out[i] = (-x, w);
        out[n - 1 - i] = (x, w);
    }
    out
}

/// `(P_n(x), P_n′(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

fn rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

/// Adaptive Gauss–Legendre on `[a, b]` for a scalar integrand.
pub fn integrate_1d<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    let g = |x: &[f64], out: &mut [f64]| out[0] = f(x[0]);
    Ok(adaptive(&g, Cell::Segment(a, b), 1, rel_tol)?[0])
}

#[derive(Clone, Copy, Debug)]
enum Cell {
    Segment(f64, f64),
    Triangle([[f64; 2]; 3]),
    /// `(ρ, θ)` rectangle of a polar map of the unit disk.
    Polar { r0: f64, r1: f64, t0: f64, t1: f64 },
}

impl Cell {
    /// Apply the tensor rule; `g(point, out)` is called with point in cell
    /// coordinates (for `Polar`, `[ρ cos θ, ρ sin θ]`) and must already include
    /// any outer Jacobian. The polar `ρ` factor is applied here.
    fn estimate<G: Fn(&[f64], &mut [f64])>(&self, g: &G, k: usize, acc: &mut [f64], tmp: &mut [f64]) {
        acc.iter_mut().for_each(|v| *v = 0.0);
        let r = rule();
        match *self {
            Cell::Segment(a, b) => {
                let (m, h) = ((a + b) / 2.0, (b - a) / 2.0);
                for &(x, w) in r {
                    g(&[m + h * x], tmp);
                    for i in 0..k {
                        acc[i] += w * h * tmp[i];
                    }
                }
            }
            Cell::Triangle([p, q, s]) => {
                // Collapsed square: x = p + ξ((1−η)(q−p) + η(s−p)), |J| = 2·area·ξ.
                let area2 = ((q[0] - p[0]) * (s[1] - p[1]) - (q[1] - p[1]) * (s[0] - p[0])).abs();
                for &(xa, wa) in r {
                    let xi = 0.5 * (xa + 1.0);
                    for &(xb, wb) in r {
                        let eta = 0.5 * (xb + 1.0);
                        let pt = [
                            p[0] + xi * ((1.0 - eta) * (q[0] - p[0]) + eta * (s[0] - p[0])),
                            p[1] + xi * ((1.0 - eta) * (q[1] - p[1]) + eta * (s[1] - p[1])),
                        ];
                        g(&pt, tmp);
                        let w = 0.25 * wa * wb * area2 * xi;
                        for i in 0..k {
                            acc[i] += w * tmp[i];
                        }
                    }
                }
            }
            Cell::Polar { r0, r1, t0, t1 } => {
                let (rm, rh) = ((r0 + r1) / 2.0, (r1 - r0) / 2.0);
                let (tm, th) = ((t0 + t1) / 2.0, (t1 - t0) / 2.0);
                for &(xa, wa) in r {
                    let rho = rm + rh * xa;
                    for &(xb, wb) in r {
                        let t = tm + th * xb;
                        g(&[rho * t.cos(), rho * t.sin()], tmp);
                        let w = wa * wb * rh * th * rho;
                        for i in 0..k {
                            acc[i] += w * tmp[i];
                        }
                    }
                }
            }
        }
    }

    fn split(&self) -> Vec<Cell> {
        match *self {
            Cell::Segment(a, b) => {
                let m = (a + b) / 2.0;
                vec![Cell::Segment(a, m), Cell::Segment(m, b)]
            }
            Cell::Triangle([p, q, s]) => {
                let mid = |a: [f64; 2], b: [f64; 2]| [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
                let (pq, qs, sp) = (mid(p, q), mid(q, s), mid(s, p));
                vec![
                    Cell::Triangle([p, pq, sp]),
                    Cell::Triangle([pq, q, qs]),
                    Cell::Triangle([sp, qs, s]),
                    Cell::Triangle([pq, qs, sp]),
                ]
            }
            Cell::Polar { r0, r1, t0, t1 } => {
                let (rm, tm) = ((r0 + r1) / 2.0, (t0 + t1) / 2.0);
                vec![
                    Cell::Polar { r0, r1: rm, t0, t1: tm },
                    Cell::Polar { r0: rm, r1, t0, t1: tm },
                    Cell::Polar { r0, r1: rm, t0: tm, t1 },
                    Cell::Polar { r0: rm, r1, t0: tm, t1 },
                ]
            }
        }
    }
}

fn adaptive<G: Fn(&[f64], &mut [f64])>(g: &G, root: Cell, k: usize, rel_tol: f64) -> Result<Vec<f64>> {
    adaptive_many(g, &[root], k, rel_tol)
}

fn adaptive_many<G: Fn(&[f64], &mut [f64])>(g: &G, roots: &[Cell], k: usize, rel_tol: f64) -> Result<Vec<f64>> {
    let mut tmp = vec![0.0; k];
    let mut coarse: Vec<Vec<f64>> = Vec::with_capacity(roots.len());
    let mut scale = 0.0f64;
    for c in roots {
        let mut acc = vec![0.0; k];
        c.estimate(g, k, &mut acc, &mut tmp);
        scale = scale.max(acc.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        coarse.push(acc);
    }
    let abs_tol = rel_tol * scale.max(1e-300) / roots.len() as f64;
    let mut total = vec![0.0; k];
    // Depth-first worklist of (cell, its estimate, depth).
    let mut stack: Vec<(Cell, Vec<f64>, usize)> = roots.iter().copied().zip(coarse).map(|(c, e)| (c, e, 0)).collect();
    while let Some((cell, est, depth)) = stack.pop() {
        let kids = cell.split();
        let mut ests = Vec::with_capacity(kids.len());
        let mut sum = vec![0.0; k];
        for kid in &kids {
            let mut acc = vec![0.0; k];
            kid.estimate(g, k, &mut acc, &mut tmp);
            for i in 0..k {
                sum[i] += acc[i];
            }
            ests.push(acc);
        }
        let err = sum.iter().zip(&est).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let local = abs_tol * 0.5f64.powi(depth as i32);
        if err <= local.max(1e-300) || err <= 1e-15 * scale {
            for i in 0..k {
                total[i] += sum[i];
            }
        } else if depth + 1 >= MAX_LEVELS {
            return Err(Error::NonConvergence { levels: MAX_LEVELS });
        } else {
            for (kid, e) in kids.into_iter().zip(ests) {
                stack.push((kid, e, depth + 1));
            }
        }
    }
    Ok(total)
}

/// Ear-clipping triangulation of a simple counterclockwise polygon.
pub fn triangulate(poly: &[[f64; 2]]) -> Vec<[[f64; 2]; 3]> {
    let mut idx: Vec<usize> = (0..poly.len()).collect();
    let mut out = Vec::with_capacity(poly.len().saturating_sub(2));
    let cross = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    while idx.len() > 3 {
        let n = idx.len();
        let mut best: Option<(usize, f64)> = None;
        let mut ear = None;
        for i in 0..n {
            let (a, b, c) = (poly[idx[(i + n - 1) % n]], poly[idx[i]], poly[idx[(i + 1) % n]]);
            let turn = cross(a, b, c);
            if turn <= 0.0 {
                continue;
            }
            if best.is_none_or(|(_, t)| turn > t) {
                best = Some((i, turn));
            }
            let blocked = idx.iter().enumerate().any(|(j, &v)| {
                if j == i || j == (i + 1) % n || j == (i + n - 1) % n {
                    return false;
                }
                let p = poly[v];
                cross(a, b, p) >= 0.0 && cross(b, c, p) >= 0.0 && cross(c, a, p) >= 0.0
            });
            if !blocked {
                ear = Some(i);
                break;
            }
        }
        let i = match ear.or(best.map(|b| b.0)) {
            Some(i) => i,
            None => break,
        };
        let n = idx.len();
        out.push([poly[idx[(i + n - 1) % n]], poly[idx[i]], poly[idx[(i + 1) % n]]]);
        idx.remove(i);
    }
    if idx.len() == 3 {
        out.push([poly[idx[0]], poly[idx[1]], poly[idx[2]]]);
    }
    out
}

/// Moments of `density(u)·(1 − Σ κ_i u_i)` over a bounded section by
/// adaptive tensor quadrature; no weight factor when `weight` is `None`.
pub fn moments_quadrature<D>(section: &CrossSection, density: D, weight: Option<&Curvatures>) -> Result<MomentSet>
where
    D: Fn(&[f64]) -> f64,
{
    let m = section.dim();
    if m > 2 {
        return Err(Error::Unsupported(format!("quadrature over {m}-dimensional sections")));
    }
    let k = 1 + m + m * m;
    let kappa: Vec<f64> = weight.map(|w| w.kappa.clone()).unwrap_or_default();
    let integrand = |u: &[f64], out: &mut [f64], map: &dyn Fn(&[f64], &mut [f64]) -> f64| {
        let mut x = [0.0; 2];
        let jac = map(u, &mut x[..m]);
        let x = &x[..m];
        let mut w = density(x) * jac;
        if !kappa.is_empty() {
            w *= 1.0 - kappa.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        }
        out[0] = w;
        for i in 0..m {
            out[1 + i] = w * x[i];
            for j in 0..m {
                out[1 + m + i * m + j] = w * x[i] * x[j];
            }
        }
    };
    let identity = |u: &[f64], x: &mut [f64]| {
        x.copy_from_slice(&u[..x.len()]);
        1.0
    };
    let raw = match section {
        CrossSection::Interval { lo, hi } => {
            if !(lo < hi) {
                return Err(Error::DegenerateInterval { lo: *lo, hi: *hi });
            }
            adaptive(&|u: &[f64], o: &mut [f64]| integrand(u, o, &identity), Cell::Segment(*lo, *hi), k, REL_TOL)?
        }
        CrossSection::Polygon { vertices } => {
            let tris: Vec<Cell> = triangulate(vertices).into_iter().map(Cell::Triangle).collect();
            adaptive_many(&|u: &[f64], o: &mut [f64]| integrand(u, o, &identity), &tris, k, REL_TOL)?
        }
        CrossSection::Ellipse { center, axes } => {
            let det = (axes[0][0] * axes[1][1] - axes[0][1] * axes[1][0]).abs();
            let map = |w: &[f64], x: &mut [f64]| {
                x[0] = center[0] + axes[0][0] * w[0] + axes[0][1] * w[1];
                x[1] = center[1] + axes[1][0] * w[0] + axes[1][1] * w[1];
                det
            };
            let cells: Vec<Cell> = (0..4)
                .map(|q| Cell::Polar { r0: 0.0, r1: 1.0, t0: q as f64 * TAU / 4.0, t1: (q + 1) as f64 * TAU / 4.0 })
                .collect();
            adaptive_many(&|u: &[f64], o: &mut [f64]| integrand(u, o, &map), &cells, k, REL_TOL)?
        }
        CrossSection::Ball { center, radius } => {
            let as_other = if m == 1 {
                CrossSection::Interval { lo: center[0] - radius, hi: center[0] + radius }
            } else {
                CrossSection::Ellipse { center: [center[0], center[1]], axes: [[*radius, 0.0], [0.0, *radius]] }
            };
            return moments_quadrature(&as_other, density, weight);
        }
    };
    Ok(MomentSet {
        mu0: raw[0],
        first: DVector::from_column_slice(&raw[1..1 + m]),
        second: DMatrix::from_row_slice(m, m, &raw[1 + m..]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let r = gauss_legendre(7);
        let total: f64 = r.iter().map(|(_, w)| w).sum();
        assert_abs_diff_eq!(total, 2.0, epsilon = 1e-14);
        // ∫ x^12 = 2/13 is within degree 13.
        let v: f64 = r.iter().map(|(x, w)| w * x.powi(12)).sum();
        assert_abs_diff_eq!(v, 2.0 / 13.0, epsilon = 1e-14);
    }

    #[test]
    fn kinks_on_and_off_the_split_grid() {
        // A kink on a split point is resolved after one bisection.
        let v = integrate_1d(&|x: f64| (x - 0.5).abs(), 0.0, 1.0, 1e-12).unwrap();
        assert_abs_diff_eq!(v, 0.25, epsilon = 1e-13);
        // Off the dyadic grid it is reported rather than returned inaccurately.
        let off = integrate_1d(&|x: f64| (x - 0.3).abs(), 0.0, 1.0, 1e-12);
        assert!(matches!(off, Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn triangulation_preserves_area() {
        let l = [[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]];
        let tris = triangulate(&l);
        assert_eq!(tris.len(), 4);
        let area: f64 = tris
            .iter()
            .map(|[a, b, c]| ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])) / 2.0)
            .sum();
        assert_abs_diff_eq!(area, 3.0, epsilon = 1e-14);
    }

    #[test]
    fn unit_square_mass() {
        let sq = CrossSection::Polygon { vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]] };
        let m = moments_quadrature(&sq, |_| 1.0, None).unwrap();
        assert_abs_diff_eq!(m.mu0, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(m.second[(0, 1)], 0.25, epsilon = 1e-14);
    }

    #[test]
    fn nonsmooth_density_fails_to_converge() {
        let sq = CrossSection::Polygon { vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]] };
        let wild = |u: &[f64]| (1.0 / (u[0] - 0.5).abs().max(1e-300)).sin();
        assert!(matches!(moments_quadrature(&sq, wild, None), Err(Error::NonConvergence { .. })));
    }
}
