use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{polygon_contains, Domain, Shape};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, shard_seed, shards, Execution};

/// Flat storage for `len` points of dimension `dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    pub dim: usize,
    pub coords: Vec<f64>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    /// Points `start..start+len` as their own cloud slice.
    pub fn range(&self, start: usize, len: usize) -> &[f64] {
        &self.coords[start * self.dim..(start + len) * self.dim]
    }
}

/// `n` i.i.d. uniform points. Unbounded axes are cut to `truncation`.
pub fn sample_uniform(
    dom: &Domain,
    n: usize,
    seed: u64,
    truncation: Option<(f64, f64)>,
    exec: Execution,
) -> Result<PointCloud> {
    if n == 0 {
        return Err(Error::InvalidInput("sample count must be positive".into()));
    }
    if !dom.is_bounded() && truncation.is_none() {
        return Err(Error::MissingTruncation);
    }
    if let Some((lo, hi)) = truncation {
        if !(lo < hi) {
            return Err(Error::InvalidInput(format!("empty truncation range [{lo}, {hi}]")));
        }
    }
    let sampler = Sampler::new(dom.shape(), truncation)?;
    let dim = dom.dim();
    let parts = map_indexed(exec, shards(n).len(), |i| {
        let (_, len) = shards(n)[i];
        let mut rng = ChaCha8Rng::seed_from_u64(shard_seed(seed, i as u64));
        let mut out = Vec::with_capacity(len * dim);
        let mut x = vec![0.0; dim];
        for _ in 0..len {
            sampler.draw(&mut rng, &mut x);
            if dom.rotation().is_some() {
                let w = dom.to_world(&DVector::from_column_slice(&x));
                out.extend(w.iter());
            } else {
                out.extend_from_slice(&x);
            }
        }
        out
    });
    Ok(PointCloud { dim, coords: parts.concat() })
}

struct Sampler<'a> {
    shape: &'a Shape,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl<'a> Sampler<'a> {
    fn new(shape: &'a Shape, trunc: Option<(f64, f64)>) -> Result<Self> {
        let (tlo, thi) = trunc.unwrap_or((0.0, 1.0));
        let poly_box = |v: &[[f64; 2]]| {
            let mut lo = vec![f64::INFINITY; 2];
            let mut hi = vec![f64::NEG_INFINITY; 2];
            for p in v {
                for i in 0..2 {
                    lo[i] = lo[i].min(p[i]);
                    hi[i] = hi[i].max(p[i]);
                }
            }
            (lo, hi)
        };
        let (lo, hi) = match shape {
            Shape::Quadrant2D => {
                let a = tlo.max(0.0);
                if !(thi > a) {
                    return Err(Error::InvalidInput("truncation misses the quadrant".into()));
                }
                (vec![a; 2], vec![thi; 2])
            }
            Shape::Polygon2D { vertices } => poly_box(vertices),
            Shape::Prism { base, height } => {
                let (mut lo, mut hi) = poly_box(base);
                match height {
                    Some(h) => {
                        lo.push(0.0);
                        hi.push(*h);
                    }
                    None => {
                        let a = tlo.max(0.0);
                        if !(thi > a) {
                            return Err(Error::InvalidInput("truncation misses the prism".into()));
                        }
                        lo.push(a);
                        hi.push(thi);
                    }
                }
                (lo, hi)
            }
            Shape::Cylinder { r } => (vec![-r, -r, tlo], vec![*r, *r, thi]),
            Shape::Ball { r, dim } => (vec![-r; *dim], vec![*r; *dim]),
            Shape::Cuboid { min, max } => (min.clone(), max.clone()),
            Shape::QuarterDisk { r } => (vec![0.0; 2], vec![*r; 2]),
        };
        Ok(Sampler { shape, lo, hi })
    }

    fn draw<R: Rng>(&self, rng: &mut R, x: &mut [f64]) {
        let uniform = |i: usize, rng: &mut R| self.lo[i] + (self.hi[i] - self.lo[i]) * rng.random::<f64>();
        match self.shape {
            Shape::Quadrant2D | Shape::Cuboid { .. } => {
                for (i, xi) in x.iter_mut().enumerate() {
                    *xi = uniform(i, rng);
                }
            }
            Shape::Cylinder { r } => {
                let rho = r * rng.random::<f64>().sqrt();
                let th = std::f64::consts::TAU * rng.random::<f64>();
                x[0] = rho * th.cos();
                x[1] = rho * th.sin();
                x[2] = uniform(2, rng);
            }
            Shape::Polygon2D { vertices } => loop {
                x[0] = uniform(0, rng);
                x[1] = uniform(1, rng);
                if polygon_contains(vertices, [x[0], x[1]], 0.0) {
                    break;
                }
            },
            Shape::Prism { base, .. } => {
                loop {
                    x[0] = uniform(0, rng);
                    x[1] = uniform(1, rng);
                    if polygon_contains(base, [x[0], x[1]], 0.0) {
                        break;
                    }
                }
                x[2] = uniform(2, rng);
            }
            Shape::Ball { r, .. } => loop {
                for (i, xi) in x.iter_mut().enumerate() {
                    *xi = uniform(i, rng);
                }
                if x.iter().map(|v| v * v).sum::<f64>() <= r * r {
                    break;
                }
            },
            Shape::QuarterDisk { r } => loop {
                x[0] = uniform(0, rng);
                x[1] = uniform(1, rng);
                if x[0].hypot(x[1]) <= *r {
                    break;
                }
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn cube_means_and_determinism() {
        let cube = Domain::cuboid(vec![0.0; 3], vec![1.0; 3]).unwrap();
        let pts = sample_uniform(&cube, 200_000, 3, None, Execution::Parallel).unwrap();
        assert_eq!(pts.len(), 200_000);
        for i in 0..3 {
            let m = pts.iter().map(|p| p[i]).sum::<f64>() / pts.len() as f64;
            // 4σ with σ = sqrt(1/12 / n).
            assert!((m - 0.5).abs() < 4.0 * (1.0 / 12.0 / 2e5f64).sqrt());
        }
        let again = sample_uniform(&cube, 200_000, 3, None, Execution::Sequential).unwrap();
        assert_eq!(pts, again);
        let other = sample_uniform(&cube, 1000, 4, None, Execution::Sequential).unwrap();
        assert_ne!(pts.point(0), other.point(0));
    }

    #[test]
    fn ball_second_moment() {
        let ball = Domain::ball(1.0, 3).unwrap();
        let n = 200_000;
        let pts = sample_uniform(&ball, n, 11, None, Execution::Parallel).unwrap();
        let r2: Vec<f64> = pts.iter().map(|p| p.iter().map(|v| v * v).sum()).collect();
        let m = r2.iter().sum::<f64>() / n as f64;
        // Var ‖X‖² = E r⁴ − (3/5)² = 3/7 − 9/25.
        let sd = ((3.0 / 7.0 - 0.36) / n as f64).sqrt();
        assert!((m - 0.6).abs() < 4.0 * sd, "{m}");
        assert!(pts.iter().all(|p| ball.contains(p)));
    }

    #[test]
    fn unbounded_needs_truncation() {
        let cyl = Domain::cylinder(1.0).unwrap();
        assert_eq!(sample_uniform(&cyl, 10, 0, None, Execution::Sequential).unwrap_err(), Error::MissingTruncation);
        let pts = sample_uniform(&cyl, 1000, 0, Some((-2.0, 5.0)), Execution::Sequential).unwrap();
        assert!(pts.iter().all(|p| cyl.contains(p) && (-2.0..=5.0).contains(&p[2])));
    }

    #[test]
    fn sub_box_fraction_matches_volume() {
        let prism = Domain::prism(vec![[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]], Some(1.0)).unwrap();
        let n = 100_000;
        let pts = sample_uniform(&prism, n, 5, None, Execution::Parallel).unwrap();
        // [0,1]² × [0, 0.5] lies inside the prism; its volume is 0.5 of total 2.
        let hits = pts.iter().filter(|p| p[0] <= 1.0 && p[1] <= 1.0 && p[2] <= 0.5).count();
        let q = 0.25;
        let sd = (q * (1.0 - q) / n as f64).sqrt();
        assert!((hits as f64 / n as f64 - q).abs() < 4.0 * sd);
    }

    #[test]
    fn rotated_samples_stay_inside() {
        let cube = Domain::cuboid(vec![0.0, 0.0], vec![2.0, 1.0]).unwrap();
        let r = DMatrix::from_row_slice(2, 2, &[0.6, -0.8, 0.8, 0.6]);
        let rot = cube.rotated(&r).unwrap();
        let pts = sample_uniform(&rot, 5000, 1, None, Execution::Sequential).unwrap();
        assert!(pts.iter().all(|p| rot.contains_with_tol(p, 1e-12)));
    }
}
