//! End-to-end runs across modules: solve, write, read back, validate.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use pcurve::curve::{Curve, Segment};
use pcurve::domain::Domain;
use pcurve::dynamics::prism::{principal_axis_start, solve_parallel_bases};
use pcurve::dynamics::quadrant::{compose_square, solve_to_crossing, symmetry_defect, zero_crossings, ComposeTolerance};
use pcurve::dynamics::{integrate, CurveState, SolverConfig, StopReason};
use pcurve::helix::{mean_offset_closed_form, mean_offset_quadrature, HelixParams};
use pcurve::io;
use pcurve::validate::{
    admissibility_check, self_consistency_residual, validate, voronoi_barycenters, SampleSpec, ValidationConfig,
};
use pcurve::Execution;

fn triangle() -> Vec<[f64; 2]> {
    vec![[0.0, 1.0], [3f64.sqrt() / 2.0, -0.5], [-2.0, -0.5]]
}

#[test]
fn solved_diameter_survives_the_csv_round_trip() {
    let ball = io::parse_domain(r#"{"type": "ball", "r": 1.0, "dim": 3}"#).unwrap();
    let init = CurveState::from_tangent(vec![-1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]).unwrap();
    let tr = integrate(&ball, &init, &SolverConfig::default()).unwrap();
    assert_eq!(tr.meta.stop, StopReason::LeftDomain);
    let back = io::parse_trace_csv(&io::trace_csv(&tr)).unwrap();
    assert_eq!(back.states, tr.states);
    let curve = back.dense().unwrap();
    let res = self_consistency_residual(&ball, &curve, 32, None).unwrap();
    assert!(res.iter().all(|r| r.value <= 1e-10), "{res:?}");
    let cfg = ValidationConfig { n_samples: 100_000, n_nodes: 8, ..Default::default() };
    assert!(validate(&ball, &curve, &cfg).unwrap().passed);
}

#[test]
fn quadrant_solution_is_homogeneous() {
    let cfg = SolverConfig { max_length: 20.0, ..Default::default() };
    let dom = Domain::quadrant();
    let one = integrate(&dom, &CurveState::new(vec![1.0, 0.0], vec![FRAC_PI_2]).unwrap(), &cfg).unwrap();
    let two = integrate(&dom, &CurveState::new(vec![2.0, 0.0], vec![FRAC_PI_2]).unwrap(), &cfg).unwrap();
    let (c1, c2) = (one.dense().unwrap(), two.dense().unwrap());
    let worst = (0..=1000)
        .map(|i| {
            let s = 10.0 * i as f64 / 1000.0;
            (c1.point(s) - 0.5 * c2.point(2.0 * s)).norm()
        })
        .fold(0.0, f64::max);
    assert!(worst <= 1e-6, "{worst:e}");
}

#[test]
fn square_from_the_first_diagonal_crossing() {
    let cfg = SolverConfig { max_length: 10.0, ..Default::default() };
    let piece = solve_to_crossing(1.0, 1, &cfg).unwrap();
    let end = piece.states.last().unwrap();
    assert!((end.angles.as_slice()[0] - FRAC_PI_4).abs() < 1e-8);
    let sq = compose_square(&piece, ComposeTolerance::default()).unwrap();
    assert!(sq.max_gap <= 1e-8);
    assert!(symmetry_defect(&sq.points) <= 1e-8);
    assert!(sq.points.iter().all(|p| (0.0..=1.0).contains(&p[0]) && (0.0..=1.0).contains(&p[1])));
    let text = io::square_csv(&sq);
    assert_eq!(text.lines().count(), sq.points.len() + 2);
    // Crossings of the long run bracket the truncation.
    let long = integrate(&Domain::quadrant(), &piece.states[0], &cfg).unwrap();
    let z = zero_crossings(&long, FRAC_PI_4).unwrap();
    assert!((z[0] - sq.truncation).abs() < 1e-9);
}

#[test]
fn prism_solution_is_admissible_and_principal() {
    let tri = triangle();
    let sol = solve_parallel_bases(&tri, principal_axis_start(&tri, 0.2).unwrap(), &SolverConfig::default()).unwrap();
    let curve = sol.trace.dense().unwrap();
    let adm = admissibility_check(&sol.domain, &curve, 64, None);
    assert!(adm.ok, "{adm:?}");
    let res = self_consistency_residual(&sol.domain, &curve, 16, None).unwrap();
    assert!(res.iter().all(|r| r.value <= 1e-6), "{res:?}");
    let text = serde_json::to_string(&io::DomainFile::from_domain(&sol.domain)).unwrap();
    assert_eq!(io::parse_domain(&text).unwrap(), sol.domain);
}

#[test]
fn helix_offsets_agree_on_a_coarse_grid() {
    for i in 0..4 {
        for j in 0..4 {
            let a = 0.25 * i as f64 / 3.0;
            let b = 0.25 + 0.75 * j as f64 / 3.0;
            let p = HelixParams::new(a, b, 1.0).unwrap();
            if a == 0.0 || p.min_jacobian() <= 0.0 {
                continue;
            }
            let cf = mean_offset_closed_form(&p).unwrap();
            let q = mean_offset_quadrature(&p).unwrap();
            assert!((cf.0 - q.0).abs() <= 1e-8 && q.1.abs() <= 1e-10, "{a} {b}: {cf:?} {q:?}");
        }
    }
}

#[test]
fn execution_policy_does_not_change_results() {
    let cube = Domain::cuboid(vec![0.0; 3], vec![1.0, 2.0, 1.0]).unwrap();
    let axis = Segment::new(vec![0.5, 0.0, 0.5], vec![0.5, 2.0, 0.5]).unwrap();
    let run = |exec| {
        let spec = SampleSpec { exec, ..SampleSpec::new(60_000, 21) };
        voronoi_barycenters(&cube, &axis, 10, &spec, None).unwrap()
    };
    let (seq, par) = (run(Execution::Sequential), run(Execution::Parallel));
    assert_eq!(seq, par);
    assert!(seq.max_distance < 0.02);
    assert_eq!(axis.length(), 2.0);
}
