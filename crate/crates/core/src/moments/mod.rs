//! Transverse moments of normal-plane sections and the Gram system for the
//! principal curvatures.

mod quadrature;

pub use quadrature::{gauss_legendre, integrate_1d, moments_quadrature, triangulate, MAX_LEVELS};

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::domain::CrossSection;
use crate::error::{Error, Result};
use crate::frame::Curvatures;

/// Largest accepted condition number of the Gram matrix.
pub const MAX_GRAM_CONDITION: f64 = 1e14;

/// Moments `μ₀ = ∫1`, `μ_i = ∫u_i`, `G_ij = ∫u_i u_j` of a section density.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSet {
    pub mu0: f64,
    pub first: DVector<f64>,
    pub second: DMatrix<f64>,
}

impl MomentSet {
    pub fn zeros(m: usize) -> MomentSet {
        MomentSet { mu0: 0.0, first: DVector::zeros(m), second: DMatrix::zeros(m, m) }
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    /// `μ − Gκ`: the weighted first moment `∫u(1 − κ·u)`.
    pub fn residual(&self, kappa: &Curvatures) -> DVector<f64> {
        &self.first - &self.second * DVector::from_column_slice(kappa.as_slice())
    }
}

/// Mean and covariance of the normalized section density.
#[derive(Clone, Debug, PartialEq)]
pub struct TransverseStats {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl TransverseStats {
    /// `(cov + v vᵀ)⁻¹ v`, the mass-free form of the curvature system.
    pub fn curvatures(&self) -> Result<Curvatures> {
        let g = &self.cov + &self.mean * self.mean.transpose();
        solve_spd(&g, &self.mean)
    }
}

pub fn transverse_stats(m: &MomentSet) -> Result<TransverseStats> {
    if !(m.mu0 > 0.0) {
        return Err(Error::ZeroMass);
    }
    let mean = &m.first / m.mu0;
    let cov = &m.second / m.mu0 - &mean * mean.transpose();
    Ok(TransverseStats { mean, cov })
}

pub fn moments_interval(lo: f64, hi: f64) -> Result<MomentSet> {
    if !(lo < hi) {
        return Err(Error::DegenerateInterval { lo, hi });
    }
    Ok(MomentSet {
        mu0: hi - lo,
        first: DVector::from_element(1, pow_diff(lo, hi, 2) / 2.0),
        second: DMatrix::from_element(1, 1, pow_diff(lo, hi, 3) / 3.0),
    })
}

/// Moments of `1 − κu` over `[lo, hi]`.
pub fn moments_interval_weighted(lo: f64, hi: f64, kappa: f64) -> Result<MomentSet> {
    let m = moments_interval(lo, hi)?;
    let third = pow_diff(lo, hi, 4) / 4.0;
    Ok(MomentSet {
        mu0: m.mu0 - kappa * m.first[0],
        first: DVector::from_element(1, m.first[0] - kappa * m.second[(0, 0)]),
        second: DMatrix::from_element(1, 1, m.second[(0, 0)] - kappa * third),
    })
}

/// `v₂ⁿ − v₁ⁿ`, factored to avoid cancellation on thin strips.
fn pow_diff(v1: f64, v2: f64, n: i32) -> f64 {
    let s: f64 = (0..n).map(|i| v2.powi(i) * v1.powi(n - 1 - i)).sum();
    (v2 - v1) * s
}

/// A line `u₂ = intercept + slope·u₁`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearBound {
    pub intercept: f64,
    pub slope: f64,
}

impl LinearBound {
    pub fn new(intercept: f64, slope: f64) -> Self {
        LinearBound { intercept, slope }
    }

    fn at(&self, u: f64) -> f64 {
        self.intercept + self.slope * u
    }
}

/// Monomial integrals `∫_{v₁}^{v₂} ∫_{a+bu₁}^{c+du₁} u₁^j u₂^k du₂ du₁` of one strip.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PartialMoments {
    pub m00: f64,
    pub m10: f64,
    pub m20: f64,
    pub m11: f64,
    pub m01: f64,
    pub m02: f64,
}

impl std::ops::AddAssign for PartialMoments {
    fn add_assign(&mut self, o: Self) {
        self.m00 += o.m00;
        self.m10 += o.m10;
        self.m20 += o.m20;
        self.m11 += o.m11;
        self.m01 += o.m01;
        self.m02 += o.m02;
    }
}

pub fn partial_moments(lower: LinearBound, upper: LinearBound, v1: f64, v2: f64) -> Result<PartialMoments> {
    if !(v1 < v2) {
        return Err(Error::InvertedBounds);
    }
    let scale = 1.0 + lower.at(v1).abs().max(upper.at(v1).abs()).max(lower.at(v2).abs()).max(upper.at(v2).abs());
    if upper.at(v1) < lower.at(v1) - 1e-12 * scale || upper.at(v2) < lower.at(v2) - 1e-12 * scale {
        return Err(Error::InvertedBounds);
    }
    Ok(strip_moments(lower, upper, v1, v2))
}

fn strip_moments(lower: LinearBound, upper: LinearBound, v1: f64, v2: f64) -> PartialMoments {
    let (a, b, c, d) = (lower.intercept, lower.slope, upper.intercept, upper.slope);
    let d1 = v2 - v1;
    let d2 = pow_diff(v1, v2, 2);
    let d3 = pow_diff(v1, v2, 3);
    let d4 = pow_diff(v1, v2, 4);
    PartialMoments {
        m00: (c - a) * d1 + (d - b) * d2 / 2.0,
        m10: (c - a) * d2 / 2.0 + (d - b) * d3 / 3.0,
        m20: (c - a) * d3 / 3.0 + (d - b) * d4 / 4.0,
        m01: ((c * c - a * a) * d1 + (c * d - a * b) * d2 + (d * d - b * b) * d3 / 3.0) / 2.0,
        m11: ((c * c - a * a) * d2 / 2.0 + 2.0 * (c * d - a * b) * d3 / 3.0 + (d * d - b * b) * d4 / 4.0) / 2.0,
        m02: ((c.powi(3) - a.powi(3)) * d1
            + 1.5 * (c * c * d - a * a * b) * d2
            + (c * d * d - a * b * b) * d3
            + (d.powi(3) - b.powi(3)) * d4 / 4.0)
            / 3.0,
    }
}

/// Exact moments of the constant density over a simple polygon, summed over
/// the vertical strips between consecutive vertex abscissae. Abscissae closer
/// than `1e-12` (relative) are merged, and each strip is integrated about its
/// own midpoint so nearly vertical edges cause no cancellation.
pub fn moments_polygon(section: &CrossSection) -> Result<MomentSet> {
    let CrossSection::Polygon { vertices } = section else {
        return Err(Error::InvalidInput("moments_polygon needs a polygon section".into()));
    };
    if vertices.len() < 3 {
        return Err(Error::DegeneratePolygon { area: 0.0 });
    }
    let n = vertices.len();
    let tol = 1e-12 * (1.0 + vertices.iter().map(|v| v[0].abs()).fold(0.0, f64::max));
    let mut xs: Vec<f64> = vertices.iter().map(|v| v[0]).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|b, a| *b - *a <= tol);
    let mut total = PartialMoments::default();
    let mut lines: Vec<(f64, LinearBound)> = Vec::with_capacity(n);
    for w in xs.windows(2) {
        let (v1, v2) = (w[0], w[1]);
        let xm = 0.5 * (v1 + v2);
        let half = 0.5 * (v2 - v1);
        lines.clear();
        for i in 0..n {
            let (p, q) = (vertices[i], vertices[(i + 1) % n]);
            let (lo, hi) = if p[0] < q[0] { (p, q) } else { (q, p) };
            if hi[0] - lo[0] > tol && lo[0] <= v1 + tol && hi[0] >= v2 - tol {
                let slope = (hi[1] - lo[1]) / (hi[0] - lo[0]);
                // Value at the strip midpoint from the nearer endpoint.
                let mid = if xm - lo[0] <= hi[0] - xm { lo[1] + slope * (xm - lo[0]) } else { hi[1] - slope * (hi[0] - xm) };
                lines.push((mid, LinearBound::new(mid, slope)));
            }
        }
        lines.sort_by(|a, b| a.0.total_cmp(&b.0));
        for pair in lines.chunks_exact(2) {
            let m = strip_moments(pair[0].1, pair[1].1, -half, half);
            // Back from w = u₁ − xm.
            total += PartialMoments {
                m00: m.m00,
                m10: m.m10 + xm * m.m00,
                m20: m.m20 + 2.0 * xm * m.m10 + xm * xm * m.m00,
                m11: m.m11 + xm * m.m01,
                m01: m.m01,
                m02: m.m02,
            };
        }
    }
    if total.m00.abs() < 1e-14 {
        return Err(Error::DegeneratePolygon { area: total.m00 });
    }
    Ok(MomentSet {
        mu0: total.m00,
        first: DVector::from_vec(vec![total.m10, total.m01]),
        second: DMatrix::from_row_slice(2, 2, &[total.m20, total.m11, total.m11, total.m02]),
    })
}

/// Moments of `{c + A w : ‖w‖ ≤ 1}`, optionally weighted by `1 − κ·u`.
pub fn moments_ellipse(section: &CrossSection, weight: Option<&Curvatures>) -> Result<MomentSet> {
    let CrossSection::Ellipse { center, axes } = section else {
        return Err(Error::InvalidInput("moments_ellipse needs an ellipse section".into()));
    };
    let a = DMatrix::from_row_slice(2, 2, &[axes[0][0], axes[0][1], axes[1][0], axes[1][1]]);
    let det = a.determinant().abs();
    if !(det > 0.0) {
        return Err(Error::InvalidInput("ellipse axes are degenerate".into()));
    }
    // Covariance of the uniform unit disk is I/4.
    let s = &a * a.transpose() / 4.0;
    affine_moments(section, PI * det, DVector::from_column_slice(center), s, weight)
}

/// Moments of the `m`-ball, optionally weighted by `1 − κ·u`.
pub fn moments_ball(section: &CrossSection, weight: Option<&Curvatures>) -> Result<MomentSet> {
    let CrossSection::Ball { center, radius } = section else {
        return Err(Error::InvalidInput("moments_ball needs a ball section".into()));
    };
    let m = center.len();
    let mass = unit_ball_volume(m) * radius.powi(m as i32);
    let s = DMatrix::identity(m, m) * (radius * radius / (m as f64 + 2.0));
    affine_moments(section, mass, DVector::from_column_slice(center), s, weight)
}

/// Volume of the unit ball in `R^m`.
pub fn unit_ball_volume(m: usize) -> f64 {
    match m {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / m as f64 * unit_ball_volume(m - 2),
    }
}

/// Moments of a centrally symmetric body with mass `m0`, center `c` and
/// normalized covariance `s`; central third moments vanish.
fn affine_moments(
    section: &CrossSection,
    m0: f64,
    c: DVector<f64>,
    s: DMatrix<f64>,
    weight: Option<&Curvatures>,
) -> Result<MomentSet> {
    let first = &c * m0;
    let second = (&c * c.transpose() + &s) * m0;
    let Some(w) = weight else {
        return Ok(MomentSet { mu0: m0, first, second });
    };
    let k = DVector::from_column_slice(w.as_slice());
    let min = section.min_jacobian(w.as_slice());
    if min < -1e-12 {
        return Err(Error::JacobianSignViolation { min });
    }
    let kc = k.dot(&c);
    let sk = &s * &k;
    let m = c.len();
    // T_ijk = m0 (c_i c_j c_k + c_i S_jk + c_j S_ik + c_k S_ij); contract with κ_k.
    let mut third = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            third[(i, j)] = m0 * (c[i] * c[j] * kc + c[i] * sk[j] + c[j] * sk[i] + kc * s[(i, j)]);
        }
    }
    Ok(MomentSet {
        mu0: m0 * (1.0 - kc),
        first: &first - &second * &k,
        second: second - third,
    })
}

/// Closed-form moments of any section kind (constant density, no weight).
pub fn section_moments(section: &CrossSection) -> Result<MomentSet> {
    match section {
        CrossSection::Interval { lo, hi } => moments_interval(*lo, *hi),
        CrossSection::Polygon { .. } => moments_polygon(section),
        CrossSection::Ellipse { .. } => moments_ellipse(section, None),
        CrossSection::Ball { .. } => moments_ball(section, None),
    }
}

/// Largest-to-smallest eigenvalue ratio of the Gram matrix.
pub fn gram_condition(g: &DMatrix<f64>) -> f64 {
    let eig = g.clone().symmetric_eigen().eigenvalues;
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &e| (l.min(e), h.max(e.abs())));
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

fn solve_spd(g: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<Curvatures> {
    let condition = gram_condition(g);
    if !(condition <= MAX_GRAM_CONDITION) {
        return Err(Error::SingularGram { condition });
    }
    let chol = g.clone().cholesky().ok_or(Error::SingularGram { condition })?;
    Ok(Curvatures::new(chol.solve(rhs).as_slice().to_vec()))
}

/// Curvatures solving `Gκ = μ`.
pub fn gram_solve(m: &MomentSet) -> Result<Curvatures> {
    solve_spd(&m.second, &m.first)
}

/// Curvatures demanded by a section, with the zero-width ball handled as
/// the limit of symmetric sections.
pub fn section_curvatures(section: &CrossSection) -> Result<(Curvatures, MomentSet)> {
    if let CrossSection::Ball { center, radius } = section {
        let m = center.len();
        let v = DVector::from_column_slice(center);
        let vv = v.norm_squared();
        let sigma2 = radius * radius / (m as f64 + 2.0);
        let moments = moments_ball(section, None)?;
        if vv <= 1e-28 && sigma2 <= 1e-28 {
            return Ok((Curvatures::zeros(m), moments));
        }
        // (σ²I + vvᵀ)⁻¹ v = v / (σ² + ‖v‖²).
        let k = v / (sigma2 + vv);
        return Ok((Curvatures::new(k.as_slice().to_vec()), moments));
    }
    let m = section_moments(section)?;
    let k = gram_solve(&m)?;
    Ok((k, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn square(lo: f64, hi: f64) -> CrossSection {
        CrossSection::Polygon { vertices: vec![[lo, lo], [hi, lo], [hi, hi], [lo, hi]] }
    }

    #[test]
    fn interval_examples() {
        let m = moments_interval(-1.0, 1.0).unwrap();
        assert_eq!((m.mu0, m.first[0]), (2.0, 0.0));
        assert_abs_diff_eq!(m.second[(0, 0)], 2.0 / 3.0, epsilon = 1e-15);
        let s = transverse_stats(&m).unwrap();
        assert_abs_diff_eq!(s.cov[(0, 0)], 1.0 / 3.0, epsilon = 1e-15);

        let m = moments_interval(0.0, 1.0).unwrap();
        assert_abs_diff_eq!(m.first[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m.second[(0, 0)], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(transverse_stats(&m).unwrap().cov[(0, 0)], 1.0 / 12.0, epsilon = 1e-15);
        assert_abs_diff_eq!(gram_solve(&m).unwrap().kappa[0], 1.5, epsilon = 1e-15);

        let s = transverse_stats(&moments_interval(1.0, 3.0).unwrap()).unwrap();
        assert_abs_diff_eq!(s.mean[0], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.cov[(0, 0)], 4.0 / 12.0, epsilon = 1e-14);

        assert!(matches!(moments_interval(1.0, 1.0), Err(Error::DegenerateInterval { .. })));
    }

    #[test]
    fn partial_moment_examples() {
        let z = LinearBound::new(0.0, 0.0);
        let p = partial_moments(z, LinearBound::new(1.0, 0.0), 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(p.m10, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.m20, 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.m11, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(p.m01, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.m02, 1.0 / 3.0, epsilon = 1e-15);

        let t = partial_moments(z, LinearBound::new(1.0, -1.0), 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(t.m10, 1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.m01, 1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.m00, 0.5, epsilon = 1e-15);

        assert_eq!(partial_moments(z, z, 1.0, 0.0).unwrap_err(), Error::InvertedBounds);
        assert_eq!(partial_moments(LinearBound::new(1.0, 0.0), z, 0.0, 1.0).unwrap_err(), Error::InvertedBounds);
    }

    #[test]
    fn polygon_examples() {
        let m = moments_polygon(&square(0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(m.mu0, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.first.as_slice(), [0.5, 0.5].as_slice(), epsilon = 1e-15);
        assert_abs_diff_eq!(m.second.as_slice(), [1.0 / 3.0, 0.25, 0.25, 1.0 / 3.0].as_slice(), epsilon = 1e-15);

        let tri = CrossSection::Polygon { vertices: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]] };
        let m = moments_polygon(&tri).unwrap();
        assert_abs_diff_eq!(m.mu0, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m.first.as_slice(), [1.0 / 6.0, 1.0 / 6.0].as_slice(), epsilon = 1e-15);

        let s0 = transverse_stats(&moments_polygon(&square(0.0, 1.0)).unwrap()).unwrap();
        let s1 = transverse_stats(&moments_polygon(&square(1.0, 2.0)).unwrap()).unwrap();
        assert_abs_diff_eq!(s1.mean.as_slice(), [1.5, 1.5].as_slice(), epsilon = 1e-14);
        assert_abs_diff_eq!(s1.cov.as_slice(), s0.cov.as_slice(), epsilon = 1e-13);
        assert_abs_diff_eq!(s0.cov[(0, 0)], 1.0 / 12.0, epsilon = 1e-15);

        let flat = CrossSection::Polygon { vertices: vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]] };
        assert!(matches!(moments_polygon(&flat), Err(Error::DegeneratePolygon { .. })));
    }

    #[test]
    fn nearly_vertical_edges() {
        let x = 0.6264183905346326;
        let poly = CrossSection::Polygon {
            vertices: vec![[x, -0.5], [x + 1e-16, 0.5], [-0.4176, 0.5], [-0.4176, -0.5]],
        };
        let m = moments_polygon(&poly).unwrap();
        let w = x + 0.4176;
        assert_abs_diff_eq!(m.mu0, w, epsilon = 1e-14);
        assert_abs_diff_eq!(m.first[1], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(m.second[(1, 1)], w / 12.0, epsilon = 1e-14);
        assert_abs_diff_eq!(m.first[0], w * (x - 0.4176) / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn nonconvex_polygon_moments() {
        let l = CrossSection::Polygon { vertices: vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]] };
        let exact = moments_polygon(&l).unwrap();
        let quad = moments_quadrature(&l, |_| 1.0, None).unwrap();
        assert_abs_diff_eq!(exact.mu0, 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(exact.first.as_slice(), quad.first.as_slice(), epsilon = 1e-12);
        assert_abs_diff_eq!(exact.second.as_slice(), quad.second.as_slice(), epsilon = 1e-12);
    }

    #[test]
    fn ellipse_examples() {
        let disk = CrossSection::aligned_ellipse([0.0, 0.0], [1.0, 1.0]);
        let m = moments_ellipse(&disk, None).unwrap();
        assert_abs_diff_eq!(m.mu0, PI, epsilon = 1e-15);
        assert_abs_diff_eq!(m.second.as_slice(), [PI / 4.0, 0.0, 0.0, PI / 4.0].as_slice(), epsilon = 1e-15);

        // Helix section (a−u₁)² + (bku₂)² ≤ r² weighted by 1 − κu₁.
        for (a, b, want) in [(0.2, 0.5, 0.0), (0.2, 1.0, 0.15)] {
            let k = 1.0 / f64::hypot(a, b);
            let e = CrossSection::aligned_ellipse([a, 0.0], [1.0, 1.0 / (b * k)]);
            let w = Curvatures::new(vec![a * k * k, 0.0]);
            let m = moments_ellipse(&e, Some(&w)).unwrap();
            assert_abs_diff_eq!(m.first[0] / m.mu0, want, epsilon = 1e-14);
            assert_abs_diff_eq!(m.first[1], 0.0, epsilon = 1e-15);
        }

        let e = CrossSection::aligned_ellipse([0.7, 0.0], [1.0, 2.0]);
        let w = Curvatures::new(vec![0.9, 0.0]);
        assert!(matches!(moments_ellipse(&e, Some(&w)), Err(Error::JacobianSignViolation { .. })));
    }

    #[test]
    fn weighted_closed_forms_match_quadrature() {
        let e = CrossSection::Ellipse { center: [0.3, -0.2], axes: [[1.0, 0.4], [-0.3, 0.7]] };
        let w = Curvatures::new(vec![0.2, -0.3]);
        let a = moments_ellipse(&e, Some(&w)).unwrap();
        let q = moments_quadrature(&e, |_| 1.0, Some(&w)).unwrap();
        assert_abs_diff_eq!(a.mu0, q.mu0, epsilon = 1e-12);
        assert_abs_diff_eq!(a.first.as_slice(), q.first.as_slice(), epsilon = 1e-12);
        assert_abs_diff_eq!(a.second.as_slice(), q.second.as_slice(), epsilon = 1e-12);

        let b = CrossSection::Ball { center: vec![0.1, 0.2], radius: 0.9 };
        let a = moments_ball(&b, Some(&w)).unwrap();
        let q = moments_quadrature(&b, |_| 1.0, Some(&w)).unwrap();
        assert_abs_diff_eq!(a.second.as_slice(), q.second.as_slice(), epsilon = 1e-12);

        let a = moments_interval_weighted(-0.5, 2.0, 0.3).unwrap();
        let q = moments_quadrature(&CrossSection::Interval { lo: -0.5, hi: 2.0 }, |_| 1.0, Some(&Curvatures::new(vec![0.3]))).unwrap();
        assert_abs_diff_eq!(a.second[(0, 0)], q.second[(0, 0)], epsilon = 1e-13);
    }

    #[test]
    fn gram_examples() {
        let m = moments_polygon(&square(-1.0, 1.0)).unwrap();
        assert_abs_diff_eq!(gram_solve(&m).unwrap().kappa.as_slice(), [0.0, 0.0].as_slice(), epsilon = 1e-15);

        let tri = CrossSection::Polygon { vertices: vec![[-0.3, -0.4], [1.2, 0.1], [0.1, 0.9]] };
        let m = moments_polygon(&tri).unwrap();
        let k = gram_solve(&m).unwrap();
        let r = m.residual(&k);
        assert!(r.norm() <= 1e-10 * m.first.norm());
        let via_stats = transverse_stats(&m).unwrap().curvatures().unwrap();
        assert_abs_diff_eq!(k.kappa.as_slice(), via_stats.kappa.as_slice(), epsilon = 1e-12);

        let singular = MomentSet { mu0: 1.0, first: DVector::zeros(2), second: DMatrix::zeros(2, 2) };
        assert!(matches!(gram_solve(&singular), Err(Error::SingularGram { .. })));
        assert_eq!(transverse_stats(&MomentSet::zeros(1)).unwrap_err(), Error::ZeroMass);
    }

    #[test]
    fn zero_width_ball_has_zero_curvature() {
        let b = CrossSection::Ball { center: vec![0.0, 0.0], radius: 0.0 };
        let (k, m) = section_curvatures(&b).unwrap();
        assert_eq!(k.kappa, vec![0.0, 0.0]);
        assert_eq!(m.mu0, 0.0);
        let b = CrossSection::Ball { center: vec![0.1, 0.0, 0.0], radius: 0.5 };
        let (k, m) = section_curvatures(&b).unwrap();
        assert_abs_diff_eq!(k.kappa.as_slice(), gram_solve(&m).unwrap().kappa.as_slice(), epsilon = 1e-12);
    }

    #[test]
    fn thin_rectangle_reduces_to_interval() {
        let (lo, hi, eps) = (-0.4, 1.3, 1.7e-3);
        let rect = CrossSection::Polygon { vertices: vec![[lo, -eps / 2.0], [hi, -eps / 2.0], [hi, eps / 2.0], [lo, eps / 2.0]] };
        let q = moments_quadrature(&rect, |_| 1.0, None).unwrap();
        let i = moments_interval(lo, hi).unwrap();
        assert_abs_diff_eq!(q.mu0 / eps, i.mu0, epsilon = 1e-10);
        assert_abs_diff_eq!(q.first[0] / eps, i.first[0], epsilon = 1e-10);
        assert_abs_diff_eq!(q.second[(0, 0)] / eps, i.second[(0, 0)], epsilon = 1e-10);
    }

    proptest! {
        #[test]
        fn scaling_law(t in prop_oneof![Just(0.5), Just(2.0)], x in -1.0..1.0f64, y in -1.0..1.0f64) {
            let base = vec![[x, y], [x + 1.0, y + 0.2], [x + 0.3, y + 1.1]];
            let m = moments_polygon(&CrossSection::Polygon { vertices: base.clone() }).unwrap();
            let scaled: Vec<[f64; 2]> = base.iter().map(|v| [t * v[0], t * v[1]]).collect();
            let s = moments_polygon(&CrossSection::Polygon { vertices: scaled }).unwrap();
            prop_assert!((s.mu0 - t.powi(2) * m.mu0).abs() < 1e-12);
            prop_assert!((&s.first - &m.first * t.powi(3)).amax() < 1e-12);
            prop_assert!((&s.second - &m.second * t.powi(4)).amax() < 1e-12);
        }

        #[test]
        fn partial_moments_match_quadrature(a in -1.0..1.0f64, b in -1.0..1.0f64, gap in 0.1..2.0f64, db in -0.5..0.5f64, v1 in -1.0..1.0f64, w in 0.05..2.0f64) {
            let v2 = v1 + w;
            let lower = LinearBound::new(a, b);
            let upper = LinearBound::new(a + gap - db * v1.min(v2).min(0.0) + db.abs() * 3.0, b + db);
            prop_assume!(upper.at(v1) > lower.at(v1) && upper.at(v2) > lower.at(v2));
            let p = partial_moments(lower, upper, v1, v2).unwrap();
            let poly = CrossSection::Polygon { vertices: vec![[v1, lower.at(v1)], [v2, lower.at(v2)], [v2, upper.at(v2)], [v1, upper.at(v1)]] };
            let q = moments_quadrature(&poly, |_| 1.0, None).unwrap();
            let tol = 1e-10 * (1.0 + q.second.amax());
            prop_assert!((p.m00 - q.mu0).abs() < tol);
            prop_assert!((p.m10 - q.first[0]).abs() < tol);
            prop_assert!((p.m01 - q.first[1]).abs() < tol);
            prop_assert!((p.m20 - q.second[(0, 0)]).abs() < tol);
            prop_assert!((p.m11 - q.second[(0, 1)]).abs() < tol);
            prop_assert!((p.m02 - q.second[(1, 1)]).abs() < tol);
        }
    }
}
