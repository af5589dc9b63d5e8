use vstate_core::continuation::*;
use vstate_core::contour::Discretization;
use vstate_core::io::{load_branch, save_branch};
use vstate_core::solver::*;
use vstate_core::spectrum::{omega_simply, GsqgParams};

fn three_fold_sweep() -> Branch {
    let p = GsqgParams::simply(0.9, 3).unwrap();
    let disc = Discretization::new(6, 3).unwrap();
    let start = omega_simply(3, 0.9).unwrap() - 0.002;
    sweep_branch(&p, &disc, start, -0.004, SweepStop { omega_end: 0.1 }, &NewtonConfig::default(), None).unwrap()
}

#[test]
fn three_fold_branch_turns_back() {
    let sweep = three_fold_sweep();
    let failure = sweep.failure.clone().expect("the sweep stops at the fold");
    let fold = localize_fold(&sweep, failure.failed_at, FOLD_RESOLUTION).unwrap();
    assert!((fold.omega - 0.21904).abs() < 1e-3, "{}", fold.omega);

    let start = &sweep.points.last().unwrap().state;
    let tail = fold_tail(start, fold.omega, 1e-4, &sweep.params, &sweep.disc, &sweep.cfg).unwrap();
    assert_eq!(tail.len(), 5);
    assert!(tail.windows(2).all(|w| w[1].lambda > w[0].lambda && w[1].omega < w[0].omega));

    let ext = fold_continue(&tail, 6, &sweep.params, &sweep.disc, &sweep.cfg).unwrap();
    assert_eq!(ext.points.len(), 6);
    let first_back = ext.points.iter().find(|p| p.past_fold).expect("a point past the fold");
    assert!(first_back.omega > fold.omega && first_back.omega - 0.219054 < 5e-5, "{}", first_back.omega);
    for p in &ext.points {
        assert!(certify(&p.state, &sweep.disc).unwrap() < 1e-11);
    }
    // two states at the same angular velocity
    let hook = tail.iter().any(|t| {
        ext.points.iter().any(|e| (e.omega - t.omega).abs() < 1e-4 && (e.state.leading()[0] - t.state.leading()[0]).abs() > 1e-3)
    });
    assert!(hook);

    let full = continue_through_fold(&sweep, 1e-4, 3).unwrap();
    assert_eq!(full.points.len(), 8);
    assert_eq!(full.fold_omega, Some(fold.omega));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fold.csv");
    save_branch(&full, &path, true).unwrap();
    assert_eq!(load_branch(&path).unwrap(), full);
}

#[test]
fn continuation_needs_a_tail() {
    let sweep = Branch::new(GsqgParams::simply(0.5, 3).unwrap(), Discretization::new(4, 3).unwrap(), NewtonConfig::default());
    assert!(fold_continue(&[], 1, &sweep.params, &sweep.disc, &sweep.cfg).is_err());
    assert!(continue_through_fold(&sweep, 1e-4, 1).is_err());
    let circle = vstate_core::solver::make_state(&sweep.params, &sweep.disc, 0.3, &[0.01]).unwrap();
    let err = fold_tail(&circle, 0.3, 0.0, &sweep.params, &sweep.disc, &sweep.cfg).unwrap_err();
    assert_eq!(err, vstate_core::VstateError::CoincidentPoints);
}
