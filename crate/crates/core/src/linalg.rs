//! Small dense helpers shared by the geometry code.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Proper rotation `R` with `R t = e_d` for a unit vector `t`.
///
/// Householder reflection onto `e_d` composed with a flip of the first axis,
/// so `det R = +1`.
pub fn rotation_to_last_axis(t: &DVector<f64>) -> DMatrix<f64> {
    let d = t.len();
    let mut v = t.clone();
    v[d - 1] -= 1.0;
    let vv = v.norm_squared();
    if vv < 1e-30 {
        return DMatrix::identity(d, d);
    }
    let mut r = DMatrix::identity(d, d) - (&v * v.transpose()) * (2.0 / vv);
    if d >= 2 {
        for j in 0..d {
            r[(0, j)] = -r[(0, j)];
        }
    }
    r
}

/// `max |RᵀR − I|` entrywise.
pub fn orthogonality_defect(r: &DMatrix<f64>) -> f64 {
    let n = r.nrows();
    let g = r.transpose() * r - DMatrix::identity(n, n);
    g.amax()
}

pub fn check_rotation(r: &DMatrix<f64>, dim: usize, tol: f64) -> Result<()> {
    if r.nrows() != dim || r.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: r.nrows() });
    }
    let defect = orthogonality_defect(r);
    if !(defect <= tol) {
        return Err(Error::NonOrthogonalRotation { defect });
    }
    Ok(())
}

/// In-place modified Gram–Schmidt on the given vectors, in order.
pub fn modified_gram_schmidt(vs: &mut [DVector<f64>]) {
    for i in 0..vs.len() {
        for j in 0..i {
            let p = vs[i].dot(&vs[j]);
            let vj = vs[j].clone();
            vs[i].axpy(-p, &vj, 1.0);
        }
        let n = vs[i].norm();
        if n > 0.0 {
            vs[i] /= n;
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
