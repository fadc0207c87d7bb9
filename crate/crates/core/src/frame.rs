//! Spherical tangent angles, normalized-partial frames and Bishop transport.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::modified_gram_schmidt;

/// `|sin ζ_k|` below this (for `k ≤ d−2`) counts as a singular frame.
pub const SINGULARITY_THRESHOLD: f64 = 1e-6;

/// Tolerance on `⟨T′, T⟩` accepted by [`principal_curvatures`].
pub const ORTHOGONALITY_TOL: f64 = 1e-8;

/// The angles `ζ = (ζ₁, …, ζ_{d−1})` of a unit tangent in `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct SphericalAngles {
    angles: Vec<f64>,
}

impl SphericalAngles {
    /// Validating constructor. Polar angles must lie in `[0, π]`; the
    /// azimuth is wrapped into `[0, 2π)`.
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        let m = angles.len();
        for (i, &z) in angles.iter().enumerate() {
            if !z.is_finite() {
                return Err(Error::InvalidInput(format!("angle {} is not finite", i + 1)));
            }
            if i + 1 < m && !(-1e-12..=PI + 1e-12).contains(&z) {
                return Err(Error::InvalidInput(format!("polar angle {} = {z} outside [0, pi]", i + 1)));
            }
        }
        Ok(Self::wrapped(angles))
    }

    /// Clamp polar angles into `[0, π]` and wrap the azimuth, no checks.
    pub fn wrapped(mut angles: Vec<f64>) -> Self {
        let m = angles.len();
        for z in angles.iter_mut().take(m.saturating_sub(1)) {
            *z = z.clamp(0.0, PI);
        }
        if let Some(last) = angles.last_mut() {
            *last = wrap_azimuth(*last);
        }
        SphericalAngles { angles }
    }

    /// All angles `π/2`: the tangent `e_d`, far from every singularity.
    pub fn regular(dim: usize) -> Self {
        SphericalAngles { angles: vec![PI / 2.0; dim - 1] }
    }

    pub fn dim(&self) -> usize {
        self.angles.len() + 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.angles
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.angles
    }
}

fn wrap_azimuth(z: f64) -> f64 {
    let w = z.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Orthonormal frame `{T, N₁, …, N_{d−1}}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub tangent: DVector<f64>,
    pub normals: Vec<DVector<f64>>,
}

impl Frame {
    pub fn dim(&self) -> usize {
        self.tangent.len()
    }

    /// The canonical frame for a tangent direction: the normalized-partial
    /// frame at `angles_from_tangent(t)`. Defined everywhere, including on
    /// the singular set, because the partials are normalized analytically.
    pub fn for_tangent(t: &DVector<f64>) -> Result<Frame> {
        let z = angles_from_tangent(t)?;
        Ok(frame_unchecked(&z))
    }

    /// Columns `[T, N₁, …, N_{d−1}]`.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        let mut cols = vec![self.tangent.clone()];
        cols.extend(self.normals.iter().cloned());
        DMatrix::from_columns(&cols)
    }

    /// Largest entrywise deviation of the Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let m = self.to_matrix();
        let d = m.ncols();
        (m.transpose() * m - DMatrix::identity(d, d)).amax()
    }

    /// `Σ u_i N_i`.
    pub fn normal_combination(&self, u: &[f64]) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        for (n, &ui) in self.normals.iter().zip(u) {
            out.axpy(ui, n, 1.0);
        }
        out
    }

    /// `(⟨v, N_i⟩)_i`.
    pub fn normal_coordinates(&self, v: &DVector<f64>) -> Vec<f64> {
        self.normals.iter().map(|n| n.dot(v)).collect()
    }

    /// Apply a linear map to every vector.
    pub fn transformed(&self, r: &DMatrix<f64>) -> Frame {
        Frame {
            tangent: r * &self.tangent,
            normals: self.normals.iter().map(|n| r * n).collect(),
        }
    }
}

/// Principal curvatures `κ_i = ⟨T′, N_i⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct Curvatures {
    pub kappa: Vec<f64>,
}

impl Curvatures {
    pub fn new(kappa: Vec<f64>) -> Self {
        Curvatures { kappa }
    }

    pub fn zeros(n: usize) -> Self {
        Curvatures { kappa: vec![0.0; n] }
    }

    /// Total curvature `‖T′‖`.
    pub fn norm(&self) -> f64 {
        self.kappa.iter().map(|k| k * k).sum::<f64>().sqrt()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.kappa
    }
}

pub fn tangent_from_angles(z: &SphericalAngles) -> DVector<f64> {
    tangent_raw(z.as_slice())
}

fn tangent_raw(z: &[f64]) -> DVector<f64> {
    let m = z.len();
    let mut t = DVector::zeros(m + 1);
    let mut prod = 1.0;
    for (k, &zk) in z.iter().enumerate() {
        t[k] = prod * zk.cos();
        prod *= zk.sin();
    }
    t[m] = prod;
    t
}

/// `(‖T_{ζ₁}‖, …, ‖T_{ζ_{d−1}}‖) = (1, sin ζ₁, sin ζ₁ sin ζ₂, …)`.
pub fn tangent_partial_norms(z: &SphericalAngles) -> Vec<f64> {
    let mut out = Vec::with_capacity(z.as_slice().len());
    let mut prod = 1.0;
    for &zk in z.as_slice() {
        out.push(prod);
        prod *= zk.sin();
    }
    out
}

/// Frame of normalized partials, rejecting singular angles.
pub fn frame_from_angles(z: &SphericalAngles) -> Result<Frame> {
    frame_from_angles_with(z, SINGULARITY_THRESHOLD)
}

pub fn frame_from_angles_with(z: &SphericalAngles, threshold: f64) -> Result<Frame> {
    let a = z.as_slice();
    for (k, &zk) in a.iter().enumerate().take(a.len().saturating_sub(1)) {
        let sine = zk.sin();
        if sine.abs() < threshold {
            return Err(Error::SingularAngles { index: k + 1, sine });
        }
    }
    Ok(frame_unchecked(z))
}

/// `N_j = (0, …, 0, −sin ζ_j, cos ζ_j · T(ζ_{j+1}, …))`, the partial
/// `T_{ζ_j}` divided analytically by `∏_{i<j} sin ζ_i`.
pub fn frame_unchecked(z: &SphericalAngles) -> Frame {
    let a = z.as_slice();
    let d = a.len() + 1;
    let normals = (0..a.len())
        .map(|j| {
            let mut n = DVector::zeros(d);
            let (s, c) = a[j].sin_cos();
            n[j] = -s;
            let tail = tangent_raw(&a[j + 1..]);
            for (k, v) in tail.iter().enumerate() {
                n[j + 1 + k] = c * v;
            }
            n
        })
        .collect();
    Frame { tangent: tangent_raw(a), normals }
}

/// Inverse of [`tangent_from_angles`]. The input is normalized first; once
/// a tail vanishes the remaining angles are set to zero.
pub fn angles_from_tangent(t: &DVector<f64>) -> Result<SphericalAngles> {
    let d = t.len();
    if d < 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: d });
    }
    let norm = t.norm();
    if !(norm > 1e-300) || !norm.is_finite() {
        return Err(Error::ZeroVector);
    }
    let t = t / norm;
    let m = d - 1;
    let mut z = vec![0.0; m];
    for k in 0..m - 1 {
        let tail = t.rows(k + 1, d - k - 1).norm();
        if tail == 0.0 {
            if t[k] < 0.0 {
                z[k] = PI;
            }
            return Ok(SphericalAngles { angles: z });
        }
        z[k] = tail.atan2(t[k]);
    }
    z[m - 1] = wrap_azimuth(t[m].atan2(t[m - 1]));
    Ok(SphericalAngles { angles: z })
}

pub fn principal_curvatures(t_prime: &DVector<f64>, f: &Frame) -> Result<Curvatures> {
    if t_prime.len() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), found: t_prime.len() });
    }
    let inner = t_prime.dot(&f.tangent);
    if inner.abs() > ORTHOGONALITY_TOL {
        return Err(Error::NonOrthogonal { inner });
    }
    Ok(Curvatures::new(f.normal_coordinates(t_prime)))
}

/// One classical RK4 step of `T′ = Σ κ_i N_i`, `N_i′ = −κ_i T` with `κ`
/// held constant, then modified Gram–Schmidt in the order `T, N₁, …`.
pub fn bishop_propagate(f: &Frame, kappa: &Curvatures, ds: f64) -> Frame {
    let k = kappa.as_slice();
    let rate = |vs: &[DVector<f64>]| -> Vec<DVector<f64>> {
        let mut out = Vec::with_capacity(vs.len());
        let mut dt = DVector::zeros(vs[0].len());
        for (ki, n) in k.iter().zip(&vs[1..]) {
            dt.axpy(*ki, n, 1.0);
        }
        out.push(dt);
        for ki in k {
            out.push(&vs[0] * (-ki));
        }
        out
    };
    let add = |base: &[DVector<f64>], dv: &[DVector<f64>], h: f64| -> Vec<DVector<f64>> {
        base.iter().zip(dv).map(|(b, d)| b + d * h).collect()
    };
    let mut y = vec![f.tangent.clone()];
    y.extend(f.normals.iter().cloned());
    let k1 = rate(&y);
    let k2 = rate(&add(&y, &k1, ds / 2.0));
    let k3 = rate(&add(&y, &k2, ds / 2.0));
    let k4 = rate(&add(&y, &k3, ds));
    let mut next: Vec<DVector<f64>> = (0..y.len())
        .map(|i| &y[i] + (&k1[i] + &k2[i] * 2.0 + &k3[i] * 2.0 + &k4[i]) * (ds / 6.0))
        .collect();
    modified_gram_schmidt(&mut next);
    let tangent = next.remove(0);
    Frame { tangent, normals: next }
}
