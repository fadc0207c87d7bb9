//! The quadrant system and the closed square curve assembled from it.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use super::{integrate, CurveState, CurveTrace, SolverConfig, StopReason};
use crate::curve::{Curve, Jet};
use crate::domain::section::{CORNER_X2_BAND, CORNER_ZETA_BAND};
use crate::domain::Domain;
use crate::error::{Error, Result};

/// `(x₁′, x₂′, ζ′)` for the quadrant with the corner continuation.
pub fn rhs_quadrant(state: [f64; 3]) -> Result<[f64; 3]> {
    let [x1, x2, zeta] = state;
    let (c, s) = (zeta.cos(), zeta.sin());
    if !(x1 > 0.0) || x2 < -CORNER_X2_BAND {
        return Err(Error::OutOfDomain(format!("({x1}, {x2}) is not in the open quadrant")));
    }
    let (lo, hi) = if x2.abs() < CORNER_X2_BAND && (zeta - FRAC_PI_2).abs() < CORNER_ZETA_BAND {
        (-2.0 * x1, x1)
    } else {
        if !(zeta > 0.0 && zeta < FRAC_PI_2) {
            return Err(Error::OutOfDomain(format!("angle {zeta} is outside (0, π/2)")));
        }
        (-x2 / c, x1 / s)
    };
    let dz = 1.5 * (hi + lo) / (hi * hi + hi * lo + lo * lo);
    Ok([c, s, dz])
}

/// Arclengths where `ζ − level` changes sign, refined on the dense output.
pub fn zero_crossings(trace: &CurveTrace, level: f64) -> Result<Vec<f64>> {
    if trace.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: trace.dim() });
    }
    let dense = trace.dense()?;
    let s0 = trace.states[0].s;
    let mut jet = Jet::new(2);
    let mut g = |s: f64| {
        dense.eval(s - s0, &mut jet);
        jet.tangent[1].atan2(jet.tangent[0]) - level
    };
    let mut out = Vec::new();
    for w in trace.states.windows(2) {
        let (ga, gb) = (w[0].angles.as_slice()[0] - level, w[1].angles.as_slice()[0] - level);
        if ga == 0.0 && out.last() != Some(&w[0].s) {
            out.push(w[0].s);
            continue;
        }
        if ga * gb >= 0.0 {
            continue;
        }
        let (mut a, mut b, mut fa) = (w[0].s, w[1].s, ga);
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = g(m);
            if fa * fm <= 0.0 {
                b = m;
            } else {
                a = m;
                fa = fm;
            }
        }
        out.push(0.5 * (a + b));
    }
    Ok(out)
}

/// Solve from `(x₁, 0, π/2)` up to the `n`-th (1-based) crossing of `ζ = π/4`.
pub fn solve_to_crossing(x1: f64, n: usize, cfg: &SolverConfig) -> Result<CurveTrace> {
    if n == 0 {
        return Err(Error::InvalidInput("crossing index is 1-based".into()));
    }
    let init = CurveState::new(vec![x1, 0.0], vec![FRAC_PI_2])?;
    let dom = Domain::quadrant();
    let full = integrate(&dom, &init, cfg)?;
    let zeros = zero_crossings(&full, FRAC_PI_4)?;
    let t = *zeros.get(n - 1).ok_or_else(|| Error::IncompatibleTruncation {
        s: full.length(),
        reason: format!("only {} crossings of the diagonal angle within the length budget", zeros.len()),
    })?;
    let cut = SolverConfig { max_length: t, ..cfg.clone() };
    let trace = integrate(&dom, &init, &cut)?;
    if trace.meta.stop != StopReason::LengthReached {
        return Err(Error::IncompatibleTruncation { s: trace.length(), reason: format!("{:?}", trace.meta.stop) });
    }
    Ok(trace)
}

/// Closed curve in the unit square made of eight copies of a truncated
/// quadrant solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquareCurve {
    /// Truncation arclength of the quadrant piece.
    pub truncation: f64,
    /// Half side of the square before scaling to `[0, 1]²`.
    pub half_side: f64,
    pub piece: Vec<usize>,
    pub points: Vec<[f64; 2]>,
    pub tangents: Vec<[f64; 2]>,
    pub max_gap: f64,
}

/// Tolerances for `compose_square`.
#[derive(Clone, Copy, Debug)]
pub struct ComposeTolerance {
    pub angle: f64,
    pub gap: f64,
}

impl Default for ComposeTolerance {
    fn default() -> Self {
        ComposeTolerance { angle: 1e-6, gap: 1e-8 }
    }
}

/// Map a quadrant trace truncated at a diagonal-angle crossing into one
/// eighth of a square and complete it by reflection and rotation.
pub fn compose_square(trace: &CurveTrace, tol: ComposeTolerance) -> Result<SquareCurve> {
    if trace.dim() != 2 || trace.states.len() < 2 {
        return Err(Error::InvalidInput("need a planar trace with at least two states".into()));
    }
    let end = trace.states.last().unwrap();
    let t = end.s;
    let zeta_end = end.angles.as_slice()[0];
    if (zeta_end - FRAC_PI_4).abs() > tol.angle {
        return Err(Error::IncompatibleTruncation {
            s: t,
            reason: format!("tangent angle {zeta_end} does not meet the diagonal at a right angle"),
        });
    }
    let c = end.position[0] + end.position[1];
    // Every earlier point must lie in the triangle below the hypotenuse.
    for st in &trace.states {
        let (x1, x2) = (st.position[0], st.position[1]);
        if x1 + x2 > c + tol.gap || x1 < -tol.gap || x2 < -tol.gap {
            return Err(Error::IncompatibleTruncation {
                s: st.s,
                reason: "the piece leaves the triangle before the truncation".into(),
            });
        }
    }
    // One eighth: x ↦ (c − x₁, x₂) puts the right angle at the edge midpoint.
    let base: Vec<([f64; 2], [f64; 2])> = trace
        .states
        .iter()
        .map(|st| {
            let z = st.angles.as_slice()[0];
            ([c - st.position[0], st.position[1]], [-z.cos(), z.sin()])
        })
        .collect();
    let mirrored: Vec<([f64; 2], [f64; 2])> =
        base.iter().rev().map(|&([x, y], [tx, ty])| ([y, x], [-ty, -tx])).collect();
    let mut raw: Vec<(usize, [f64; 2], [f64; 2])> = Vec::new();
    for quarter in 0..4 {
        let rot = |v: [f64; 2]| -> [f64; 2] {
            let (mut a, mut b) = (v[0], v[1]);
            for _ in 0..quarter {
                (a, b) = (-b, a);
            }
            [a, b]
        };
        for (k, half) in [&base, &mirrored].into_iter().enumerate() {
            for &(p, tv) in half.iter() {
                raw.push((2 * quarter + k, rot(p), rot(tv)));
            }
        }
    }
    let mut max_gap: f64 = 0.0;
    for w in raw.windows(2) {
        if w[0].0 != w[1].0 {
            max_gap = max_gap.max(((w[0].1[0] - w[1].1[0]).powi(2) + (w[0].1[1] - w[1].1[1]).powi(2)).sqrt());
        }
    }
    let (first, last) = (raw[0].1, raw[raw.len() - 1].1);
    max_gap = max_gap.max(((first[0] - last[0]).powi(2) + (first[1] - last[1]).powi(2)).sqrt());
    if max_gap > tol.gap {
        return Err(Error::IncompatibleTruncation { s: t, reason: format!("joint gap {max_gap:e}") });
    }
    let scale = |v: f64| (v / c + 1.0) / 2.0;
    Ok(SquareCurve {
        truncation: t,
        half_side: c,
        piece: raw.iter().map(|r| r.0).collect(),
        points: raw.iter().map(|r| [scale(r.1[0]), scale(r.1[1])]).collect(),
        tangents: raw.iter().map(|r| r.2).collect(),
        max_gap: max_gap / (2.0 * c),
    })
}

/// Largest distance from a reflected or rotated point to the point set.
pub fn symmetry_defect(points: &[[f64; 2]]) -> f64 {
    let maps: [fn([f64; 2]) -> [f64; 2]; 3] =
        [|p| [p[1], p[0]], |p| [1.0 - p[1], p[0]], |p| [1.0 - p[0], p[1]]];
    let nearest = |q: [f64; 2]| {
        points.iter().map(|p| (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).fold(f64::INFINITY, f64::min).sqrt()
    };
    let mut worst: f64 = 0.0;
    for m in maps {
        for &p in points {
            worst = worst.max(nearest(m(p)));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::rhs_general;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn corner_branch() {
        let r = rhs_quadrant([1.0, 0.0, FRAC_PI_2]).unwrap();
        assert_abs_diff_eq!(r[0], 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(r[1], 1.0, epsilon = 1e-16);
        assert_abs_diff_eq!(r[2], -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rhs_quadrant([2.0, 0.0, FRAC_PI_2]).unwrap()[2], -0.25, epsilon = 1e-15);
    }

    #[test]
    fn corner_branch_is_limit_of_interior() {
        // Along the solution x₂ ≈ s, ζ ≈ π/2 − s/2 the interior value tends to the corner value.
        let e: f64 = 1e-5;
        let r = rhs_quadrant([1.0, 2.0 * e, FRAC_PI_2 - e]).unwrap();
        assert!((r[2] + 0.5).abs() < 1e-3);
    }

    #[test]
    fn diagonal_is_stationary() {
        let r = rhs_quadrant([1.0, 1.0, FRAC_PI_4]).unwrap();
        assert_abs_diff_eq!(r[0], FRAC_PI_4.cos(), epsilon = 1e-16);
        assert_abs_diff_eq!(r[2], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn outside_is_an_error() {
        assert!(rhs_quadrant([-1.0, 0.5, 1.0]).is_err());
        assert!(rhs_quadrant([1.0, 0.5, 2.0]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn matches_general_rhs(x1 in 0.01f64..10.0, x2 in 0.01f64..10.0, z in 0.01f64..1.56) {
            let q = rhs_quadrant([x1, x2, z]).unwrap();
            let st = CurveState::new(vec![x1, x2], vec![z]).unwrap();
            let g = rhs_general(&Domain::quadrant(), &st).unwrap();
            prop_assert!((q[2] - g.angles[0]).abs() <= 1e-12 * (1.0 + q[2].abs()));
            prop_assert!((q[0] - g.position[0]).abs() <= 1e-15);
        }

        #[test]
        fn homogeneous_of_degree_minus_one(x1 in 0.1f64..5.0, x2 in 0.1f64..5.0, z in 0.05f64..1.5, t in 0.25f64..4.0) {
            let a = rhs_quadrant([x1, x2, z]).unwrap()[2];
            let b = rhs_quadrant([t * x1, t * x2, z]).unwrap()[2];
            prop_assert!((a - t * b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn first_crossing_and_composition() {
        let cfg = SolverConfig { max_length: 10.0, ..Default::default() };
        let trace = solve_to_crossing(1.0, 1, &cfg).unwrap();
        let end = trace.states.last().unwrap();
        assert_abs_diff_eq!(end.angles.as_slice()[0], FRAC_PI_4, epsilon = 1e-7);
        let sq = compose_square(&trace, ComposeTolerance::default()).unwrap();
        assert!(sq.max_gap <= 1e-8);
        assert_eq!(*sq.piece.last().unwrap(), 7);
        assert!(sq.points.iter().all(|p| (0.0..=1.0).contains(&p[0]) && (0.0..=1.0).contains(&p[1])));
        assert!(symmetry_defect(&sq.points) < 1e-12);
    }

    #[test]
    fn truncation_away_from_diagonal_angle_is_rejected() {
        let init = CurveState::new(vec![1.0, 0.0], vec![FRAC_PI_2]).unwrap();
        let tr = integrate(&Domain::quadrant(), &init, &SolverConfig { max_length: 1.0, ..Default::default() }).unwrap();
        assert!(matches!(compose_square(&tr, ComposeTolerance::default()), Err(Error::IncompatibleTruncation { .. })));
    }
}
