use vstate_core::contour::{min_boundary_gap, Discretization, State};
use vstate_core::solver::*;
use vstate_core::spectrum::{eigen_omegas, omega_simply, GsqgParams};

fn cfg() -> NewtonConfig {
    NewtonConfig::default()
}

#[test]
fn ten_fold_disc_pitchfork() {
    let p = GsqgParams::simply(0.5, 10).unwrap();
    let disc = Discretization::new(6, 10).unwrap();
    for om in [0.556, 0.540] {
        let (s, rep) = solve_nontrivial(&p, &disc, om, &cfg(), None).unwrap();
        assert_eq!(rep.classification, Classification::Nontrivial);
        assert!(rep.final_residual < 1e-11 && rep.iterations <= 15);
        assert!(certify(&s, &disc).unwrap() < 1e-11);
        assert!(s.leading()[0] > 0.0);
    }
    assert!(0.560 > omega_simply(10, 0.5).unwrap());
    let (_, rep) = solve_nontrivial(&p, &disc, 0.560, &cfg(), None).unwrap();
    assert_eq!(rep.classification, Classification::Trivial);
}

#[test]
fn closed_loop_between_the_two_eigenvalues() {
    let p = GsqgParams::doubly(0.5, 0.65, 4).unwrap();
    let disc = Discretization::new(5, 4).unwrap();
    for om in [0.085, 0.10, 0.12, 0.145] {
        let (s, rep) = solve_nontrivial(&p, &disc, om, &cfg(), None).unwrap();
        assert_eq!(rep.classification, Classification::Nontrivial, "omega={om}");
        assert!(rep.final_residual < 1e-11);
        let State::Doubly(d) = &s else { unreachable!() };
        assert!(min_boundary_gap(d, &disc) > 0.0);
        assert!(d.outer[0] >= 0.0 && d.inner[0] <= 0.0);
    }
}

#[test]
fn stationary_state_from_the_lower_eigenvalue() {
    let p = GsqgParams::doubly(0.5, 0.5, 4).unwrap();
    let disc = Discretization::new(5, 4).unwrap();
    let om_minus = eigen_omegas(&p).unwrap().omega_minus;
    assert!((om_minus + 0.02760).abs() < 1e-4);
    let start = -0.0275;
    assert!(start > om_minus);
    let branch = sweep_branch(&p, &disc, start, 0.0025, SweepStop { omega_end: 0.0 }, &cfg(), None).unwrap();
    assert!(branch.failure.is_none(), "{:?}", branch.failure);
    let last = branch.points.last().unwrap();
    assert_eq!(last.omega, 0.0);
    assert_eq!(last.report.classification, Classification::Nontrivial);
    assert!(certify(&last.state, &disc).unwrap() < 1e-11);
}

#[test]
fn small_hole_keeps_the_outer_boundary_circular() {
    let p = GsqgParams::doubly(0.9, 0.2, 4).unwrap();
    let disc = Discretization::new(5, 4).unwrap();
    let (s, rep) = solve_nontrivial(&p, &disc, -1.30, &cfg(), None).unwrap();
    assert_eq!(rep.classification, Classification::Nontrivial);
    let lead = s.leading();
    assert!(lead[0].abs() <= 1e-4 && lead[1].abs() >= 1e2 * lead[0].abs(), "{lead:?}");
}

#[test]
fn ten_fold_sweep_down_to_the_resolved_limit() {
    let p = GsqgParams::simply(0.5, 10).unwrap();
    let stop = SweepStop { omega_end: 0.528 };
    let coarse = sweep_branch(&p, &Discretization::new(5, 10).unwrap(), 0.5592, -0.004, stop, &cfg(), None).unwrap();
    let fine = sweep_branch(&p, &Discretization::new(6, 10).unwrap(), 0.5592, -0.004, stop, &cfg(), None).unwrap();
    assert!(coarse.failure.is_none() && fine.failure.is_none());
    assert_eq!(fine.points.len(), 8);
    assert!(fine.points.windows(2).all(|w| w[1].lambda > w[0].lambda && w[1].state.leading()[0] > w[0].state.leading()[0]));
    // the two grids agree until the branch approaches its limiting shape
    for (c, f) in coarse.points.iter().zip(&fine.points).take(6) {
        assert!((c.state.leading()[0] - f.state.leading()[0]).abs() < 1e-8, "omega={}", c.omega);
    }
}

#[test]
fn solves_are_deterministic() {
    let p = GsqgParams::doubly(0.5, 0.65, 4).unwrap();
    let disc = Discretization::new(4, 4).unwrap();
    let a = solve_nontrivial(&p, &disc, 0.12, &cfg(), None).unwrap();
    let b = solve_nontrivial(&p, &disc, 0.12, &cfg(), None).unwrap();
    assert_eq!(a, b);
}

#[test]
fn bad_inputs_are_reported() {
    let p = GsqgParams::simply(0.5, 4).unwrap();
    assert!(newton_solve(&p, &Discretization::new(5, 3).unwrap(), 0.3, &[0.01], &cfg()).is_err());
    let disc = Discretization::new(4, 4).unwrap();
    let err = newton_solve(&p, &disc, 0.3, &[-1.5], &cfg()).unwrap_err();
    assert!(err.is_geometry(), "{err}");
    let tight = NewtonConfig { max_iter: 1, ..cfg() };
    let err = newton_solve(&p, &disc, 0.3, &[0.2], &tight).unwrap_err();
    assert!(err.is_convergence(), "{err}");
}
