//! Supports of the uniform density, membership, sampling and normal slices.

mod sample;
pub(crate) mod section;

pub use sample::{sample_uniform, PointCloud};
pub use section::{cross_section, CrossSection};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::check_rotation;

/// Geometry of a domain in its own (unrotated) coordinates.
#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    /// `x₁, x₂ ≥ 0`.
    Quadrant2D,
    /// Simple polygon, stored counterclockwise.
    Polygon2D { vertices: Vec<[f64; 2]> },
    /// Base polygon in the `x₁x₂`-plane extruded over `0 ≤ x₃ ≤ h`.
    /// `height: None` means the semi-infinite prism `x₃ ≥ 0`.
    Prism { base: Vec<[f64; 2]>, height: Option<f64> },
    /// Infinite cylinder of radius `r` around the `x₃`-axis.
    Cylinder { r: f64 },
    /// Ball of radius `r` about the origin in `R^dim`.
    Ball { r: f64, dim: usize },
    /// Axis-aligned box.
    Cuboid { min: Vec<f64>, max: Vec<f64> },
    /// `x₁, x₂ ≥ 0`, `‖x‖ ≤ r`.
    QuarterDisk { r: f64 },
}

impl Shape {
    pub fn dim(&self) -> usize {
        match self {
            Shape::Quadrant2D | Shape::Polygon2D { .. } | Shape::QuarterDisk { .. } => 2,
            Shape::Prism { .. } | Shape::Cylinder { .. } => 3,
            Shape::Ball { dim, .. } => *dim,
            Shape::Cuboid { min, .. } => min.len(),
        }
    }

    pub fn is_bounded(&self) -> bool {
        match self {
            Shape::Quadrant2D | Shape::Cylinder { .. } => false,
            Shape::Prism { height, .. } => height.is_some(),
            _ => true,
        }
    }
}

/// A shape placed in space by an optional rotation: `x_world = R x_local`.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    shape: Shape,
    rotation: Option<DMatrix<f64>>,
}

impl Domain {
    /// Validate a shape. Clockwise polygons are reversed.
    pub fn new(shape: Shape) -> Result<Domain> {
        let shape = match shape {
            Shape::Polygon2D { vertices } => Shape::Polygon2D { vertices: checked_polygon(vertices)? },
            Shape::Prism { base, height } => {
                if let Some(h) = height {
                    positive("height", h)?;
                }
                Shape::Prism { base: checked_polygon(base)?, height }
            }
            Shape::Cylinder { r } => {
                positive("r", r)?;
                Shape::Cylinder { r }
            }
            Shape::QuarterDisk { r } => {
                positive("r", r)?;
                Shape::QuarterDisk { r }
            }
            Shape::Ball { r, dim } => {
                positive("r", r)?;
                if dim < 2 {
                    return Err(Error::InvalidInput("ball dimension must be at least 2".into()));
                }
                Shape::Ball { r, dim }
            }
            Shape::Cuboid { min, max } => {
                if min.len() != max.len() {
                    return Err(Error::DimensionMismatch { expected: min.len(), found: max.len() });
                }
                if min.len() < 2 {
                    return Err(Error::InvalidInput("cuboid dimension must be at least 2".into()));
                }
                if min.iter().zip(&max).any(|(a, b)| !(a < b)) {
                    return Err(Error::InvalidInput("cuboid needs min < max on every axis".into()));
                }
                Shape::Cuboid { min, max }
            }
            s => s,
        };
        Ok(Domain { shape, rotation: None })
    }

    pub fn quadrant() -> Domain {
        Domain { shape: Shape::Quadrant2D, rotation: None }
    }

    pub fn ball(r: f64, dim: usize) -> Result<Domain> {
        Domain::new(Shape::Ball { r, dim })
    }

    pub fn cylinder(r: f64) -> Result<Domain> {
        Domain::new(Shape::Cylinder { r })
    }

    pub fn cuboid(min: Vec<f64>, max: Vec<f64>) -> Result<Domain> {
        Domain::new(Shape::Cuboid { min, max })
    }

    pub fn unit_square() -> Domain {
        Domain::cuboid(vec![0.0, 0.0], vec![1.0, 1.0]).expect("valid square")
    }

    pub fn quarter_disk(r: f64) -> Result<Domain> {
        Domain::new(Shape::QuarterDisk { r })
    }

    pub fn prism(base: Vec<[f64; 2]>, height: Option<f64>) -> Result<Domain> {
        Domain::new(Shape::Prism { base, height })
    }

    pub fn polygon(vertices: Vec<[f64; 2]>) -> Result<Domain> {
        Domain::new(Shape::Polygon2D { vertices })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn rotation(&self) -> Option<&DMatrix<f64>> {
        self.rotation.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    pub fn is_bounded(&self) -> bool {
        self.shape.is_bounded()
    }

    /// The same shape with `rotation` applied on top of the current placement.
    pub fn rotated(&self, rotation: &DMatrix<f64>) -> Result<Domain> {
        check_rotation(rotation, self.dim(), 1e-12)?;
        let total = match &self.rotation {
            Some(r) => rotation * r,
            None => rotation.clone(),
        };
        Ok(Domain { shape: self.shape.clone(), rotation: Some(total) })
    }

    /// Drop the placement rotation.
    pub fn with_rotation(&self, rotation: Option<DMatrix<f64>>) -> Result<Domain> {
        if let Some(r) = &rotation {
            check_rotation(r, self.dim(), 1e-12)?;
        }
        Ok(Domain { shape: self.shape.clone(), rotation })
    }

    pub(crate) fn to_local(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.rotation {
            Some(r) => r.tr_mul(x),
            None => x.clone(),
        }
    }

    pub(crate) fn to_world(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.rotation {
            Some(r) => r * x,
            None => x.clone(),
        }
    }

    /// Membership in the closed set.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.contains_with_tol(x, 0.0)
    }

    /// Membership in the set inflated by `tol`.
    pub fn contains_with_tol(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let local = self.to_local(&DVector::from_column_slice(x));
        let p = local.as_slice();
        match &self.shape {
            Shape::Quadrant2D => p[0] >= -tol && p[1] >= -tol,
            Shape::Polygon2D { vertices } => polygon_contains(vertices, [p[0], p[1]], tol),
            Shape::Prism { base, height } => {
                p[2] >= -tol
                    && height.is_none_or(|h| p[2] <= h + tol)
                    && polygon_contains(base, [p[0], p[1]], tol)
            }
            Shape::Cylinder { r } => p[0].hypot(p[1]) <= r + tol,
            Shape::Ball { r, .. } => {
                let n2: f64 = p.iter().map(|v| v * v).sum();
                n2 <= (r + tol) * (r + tol)
            }
            Shape::Cuboid { min, max } => {
                p.iter().zip(min.iter().zip(max)).all(|(v, (a, b))| *v >= a - tol && *v <= b + tol)
            }
            Shape::QuarterDisk { r } => p[0] >= -tol && p[1] >= -tol && p[0].hypot(p[1]) <= r + tol,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be positive, got {v}")))
    }
}

pub(crate) fn signed_area(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    (0..n)
        .map(|i| {
            let a = v[i];
            let b = v[(i + 1) % n];
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
        / 2.0
}

fn checked_polygon(mut v: Vec<[f64; 2]>) -> Result<Vec<[f64; 2]>> {
    if v.len() < 3 {
        return Err(Error::InvalidInput("polygon needs at least 3 vertices".into()));
    }
    if v.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::InvalidInput("polygon vertex is not finite".into()));
    }
    let area = signed_area(&v);
    if area.abs() < 1e-14 {
        return Err(Error::DegeneratePolygon { area });
    }
    let n = v.len();
    for i in 0..n {
        for j in i + 1..n {
            // Adjacent edges share a vertex and are skipped.
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                return Err(Error::InvalidInput("polygon is not simple".into()));
            }
        }
    }
    if area < 0.0 {
        v.reverse();
    }
    Ok(v)
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_intersect(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return true;
    }
    let on = |p: [f64; 2], q: [f64; 2], r: [f64; 2], o: f64| {
        o == 0.0
            && r[0] >= p[0].min(q[0])
            && r[0] <= p[0].max(q[0])
            && r[1] >= p[1].min(q[1])
            && r[1] <= p[1].max(q[1])
    };
    on(a, b, c, o1) || on(a, b, d, o2) || on(c, d, a, o3) || on(c, d, b, o4)
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let l2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if l2 > 0.0 { ((ap[0] * ab[0] + ap[1] * ab[1]) / l2).clamp(0.0, 1.0) } else { 0.0 };
    (ap[0] - t * ab[0]).hypot(ap[1] - t * ab[1])
}

/// Even-odd test, with points within `max(tol, 1e-12·scale)` of an edge counted inside.
pub(crate) fn polygon_contains(v: &[[f64; 2]], p: [f64; 2], tol: f64) -> bool {
    let n = v.len();
    let mut inside = false;
    for i in 0..n {
        let a = v[i];
        let b = v[(i + 1) % n];
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    if inside {
        return true;
    }
    let scale = v.iter().flatten().fold(1.0f64, |m, c| m.max(c.abs()));
    let eps = tol.max(1e-12 * scale);
    (0..n).any(|i| segment_distance(p, v[i], v[(i + 1) % n]) <= eps)
}
