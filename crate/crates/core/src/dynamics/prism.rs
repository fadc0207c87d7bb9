//! Curves in a prism that leave one base and reach the other perpendicularly.

use nalgebra::{DVector, Matrix2, SymmetricEigen};

use super::{integrate_with, vertical_angles, Crossing, CurveState, CurveTrace, SolverConfig, StopEvent, StopReason};
use crate::domain::{CrossSection, Domain, Shape};
use crate::error::{Error, Result};
use crate::moments::moments_polygon;

/// Centroid of the base moved by `offset` along its major principal axis.
/// The axis sign is fixed so its largest component is positive.
pub fn principal_axis_start(base: &[[f64; 2]], offset: f64) -> Result<[f64; 2]> {
    let m = moments_polygon(&CrossSection::Polygon { vertices: base.to_vec() })?;
    let area = m.mu0.abs();
    let c = [m.first[0] / m.mu0, m.first[1] / m.mu0];
    let s = m.second.map(|v| v / m.mu0);
    let cov = Matrix2::new(s[(0, 0)] - c[0] * c[0], s[(0, 1)] - c[0] * c[1], s[(1, 0)] - c[1] * c[0], s[(1, 1)] - c[1] * c[1]);
    if !(area > 0.0) {
        return Err(Error::DegeneratePolygon { area });
    }
    let eig = SymmetricEigen::new(cov);
    let k = if eig.eigenvalues[0] >= eig.eigenvalues[1] { 0 } else { 1 };
    let mut axis = [eig.eigenvectors[(0, k)], eig.eigenvectors[(1, k)]];
    let largest = if axis[0].abs() >= axis[1].abs() { axis[0] } else { axis[1] };
    if largest < 0.0 {
        axis = [-axis[0], -axis[1]];
    }
    Ok([c[0] + offset * axis[0], c[1] + offset * axis[1]])
}

/// A prism solution: the trace, the height it fixes and the finite prism.
#[derive(Clone, Debug)]
pub struct PrismSolution {
    pub trace: CurveTrace,
    pub height: f64,
    pub domain: Domain,
}

/// Start vertically at `start` on the bottom base of the semi-infinite prism
/// and stop where the tangent is vertical again; that height closes the prism.
pub fn solve_parallel_bases(base: &[[f64; 2]], start: [f64; 2], cfg: &SolverConfig) -> Result<PrismSolution> {
    let open = Domain::prism(base.to_vec(), None)?;
    let init = CurveState::new(vec![start[0], start[1], 0.0], vertical_angles(3))?;
    // K·e₃ vanishes at the start too; ignore it until the tangent has tilted.
    let event = StopEvent::new("vertical_tangent", Crossing::Falling, |p| {
        if p.tangent[2] > 1.0 - 1e-12 && p.s < 1e-3 {
            -1.0
        } else {
            p.curvature[2]
        }
    });
    let trace = integrate_with(&open, &init, cfg, Some(&event))?;
    if trace.meta.stop != StopReason::Event {
        return Err(Error::IncompatibleTruncation {
            s: trace.length(),
            reason: format!("the tangent did not turn vertical again ({:?})", trace.meta.stop),
        });
    }
    let height = trace.states.last().unwrap().position[2];
    let Shape::Prism { base: stored, .. } = open.shape() else { unreachable!() };
    let domain = Domain::prism(stored.clone(), Some(height))?;
    Ok(PrismSolution { trace, height, domain })
}

/// Horizontal drift of the end point from the start.
pub fn horizontal_drift(trace: &CurveTrace) -> f64 {
    let a = &trace.states[0].position;
    let b = &trace.states.last().unwrap().position;
    DVector::from_vec(vec![b[0] - a[0], b[1] - a[1]]).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn triangle() -> Vec<[f64; 2]> {
        vec![[0.0, 1.0], [3f64.sqrt() / 2.0, -0.5], [-2.0, -0.5]]
    }

    #[test]
    fn start_of_a_symmetric_base_is_on_its_axis() {
        let sq = vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]];
        let p = principal_axis_start(&sq, 0.3).unwrap();
        assert_abs_diff_eq!(p[0], 1.3, epsilon = 1e-12);
        assert_abs_diff_eq!(p[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn centroid_start_is_a_straight_column() {
        let tri = triangle();
        let c = principal_axis_start(&tri, 0.0).unwrap();
        let dom = Domain::prism(tri, Some(1.0)).unwrap();
        let init = CurveState::new(vec![c[0], c[1], 0.0], vertical_angles(3)).unwrap();
        let tr = super::super::integrate(&dom, &init, &SolverConfig { max_length: 0.9, ..Default::default() }).unwrap();
        assert!(horizontal_drift(&tr) < 1e-9);
    }

    #[test]
    fn off_centre_start_closes_the_prism() {
        let tri = triangle();
        let start = principal_axis_start(&tri, 0.2).unwrap();
        let sol = solve_parallel_bases(&tri, start, &SolverConfig::default()).unwrap();
        let end = sol.trace.states.last().unwrap();
        assert!(end.tangent()[2] > 1.0 - 1e-10);
        assert!(sol.height > 0.5 && sol.height < sol.trace.length());
        assert!(horizontal_drift(&sol.trace) > 1e-3);
    }
}
