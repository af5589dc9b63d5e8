//! Branches of converged states and continuation through fold points with a
//! five-point Lagrange predictor in arclength.

use crate::contour::{Discretization, State};
use crate::error::{Result, VstateError};
use crate::solver::{newton_solve, Classification, NewtonConfig, SolveReport};
use crate::spectrum::GsqgParams;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub lambda: f64,
    pub omega: f64,
    pub state: State,
    pub report: SolveReport,
    pub past_fold: bool,
}

/// Why a sweep stopped early.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFailure {
    pub last_good: Option<f64>,
    pub failed_at: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub params: GsqgParams,
    pub disc: Discretization,
    pub cfg: NewtonConfig,
    pub points: Vec<BranchPoint>,
    /// Fold angular velocity Ω_c, when one was located.
    pub fold_omega: Option<f64>,
    /// Ω spacing of the five points seeding the continuation.
    pub epsilon: Option<f64>,
    pub failure: Option<SweepFailure>,
}

impl Branch {
    pub fn new(params: GsqgParams, disc: Discretization, cfg: NewtonConfig) -> Self {
        Self { params, disc, cfg, points: Vec::new(), fold_omega: None, epsilon: None, failure: None }
    }
}

fn coordinates(s: &State) -> Vec<f64> {
    let mut c = vec![s.omega()];
    c.extend(s.leading());
    c
}

/// Euclidean distance in (Ω, a_1) or (Ω, a_{1,1}, a_{2,1}).
pub fn arclength_increment(a: &State, b: &State) -> f64 {
    coordinates(a).iter().zip(coordinates(b)).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// λ values of consecutive states, starting from 0.
pub fn arclength_tag(states: &[State]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(states.len());
    let mut lam = 0.0;
    for (k, s) in states.iter().enumerate() {
        if k > 0 {
            let d = arclength_increment(&states[k - 1], s);
            if !(d > 0.0) {
                return Err(VstateError::CoincidentPoints);
            }
            lam += d;
        }
        out.push(lam);
    }
    Ok(out)
}

/// Lagrange basis weights c^{(A)}..c^{(E)} at λ.
pub fn lagrange_weights(lambdas: &[f64; 5], lambda: f64) -> [f64; 5] {
    let mut c = [1.0; 5];
    for (i, ci) in c.iter_mut().enumerate() {
        for (j, lj) in lambdas.iter().enumerate() {
            if i != j {
                *ci *= (lambda - lj) / (lambdas[i] - lj);
            }
        }
    }
    c
}

/// Quartic interpolation of Ω and of every unknown through five tagged points.
pub fn lagrange_predict(points: &[(f64, State); 5], lambda: f64) -> (f64, Vec<f64>) {
    let lams = [points[0].0, points[1].0, points[2].0, points[3].0, points[4].0];
    let c = lagrange_weights(&lams, lambda);
    let omega = c.iter().zip(points).map(|(ci, p)| ci * p.1.omega()).sum();
    let dim = points[0].1.unknowns().len();
    let unknowns: Vec<Vec<f64>> = points.iter().map(|p| p.1.unknowns()).collect();
    let x = (0..dim).map(|k| c.iter().zip(&unknowns).map(|(ci, u)| ci * u[k]).sum()).collect();
    (omega, x)
}

/// Maximum number of λ-step halvings before a continuation step is abandoned.
pub const MAX_HALVINGS: usize = 5;

/// Extends a branch through a fold. Each step predicts at
/// λ_new = (5λ^{(E)} − λ^{(A)})/4, corrects with Newton at the predicted Ω,
/// and rejects corrections that land within a quarter of the last λ increment
/// of a point already in the tail. Accepted points are tagged with
/// λ^{(E)} plus their distance to E. Points are flagged `past_fold` once Ω
/// moves against the direction of the incoming tail.
pub fn fold_continue(
    tail: &[BranchPoint],
    steps: usize,
    params: &GsqgParams,
    disc: &Discretization,
    cfg: &NewtonConfig,
) -> Result<Branch> {
    if tail.len() < 5 {
        return Err(VstateError::domain("fold continuation needs five tail points"));
    }
    let mut window: Vec<BranchPoint> = tail[tail.len() - 5..].to_vec();
    let direction = (window[4].omega - window[0].omega).signum();
    let mut turned = window[4].past_fold;
    let mut out = Branch::new(*params, *disc, *cfg);
    for _ in 0..steps {
        let five: [(f64, State); 5] = std::array::from_fn(|i| (window[i].lambda, window[i].state.clone()));
        let la = window[0].lambda;
        let le = window[4].lambda;
        let last_inc = le - window[3].lambda;
        let mut dl = (le - la) / 4.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let (om, x) = lagrange_predict(&five, le + dl);
            if let Ok((state, report)) = newton_solve(params, disc, om, &x, cfg) {
                let known = window.iter().any(|p| arclength_increment(&p.state, &state) < 0.25 * last_inc);
                if report.classification == Classification::Nontrivial && !known {
                    accepted = Some((state, report));
                    break;
                }
            }
            dl *= 0.5;
        }
        let Some((state, report)) = accepted else {
            if out.points.is_empty() {
                return Err(VstateError::PredictionFailure(MAX_HALVINGS));
            }
            out.failure = Some(SweepFailure {
                last_good: out.points.last().map(|p| p.omega),
                failed_at: f64::NAN,
                reason: VstateError::PredictionFailure(MAX_HALVINGS).to_string(),
            });
            break;
        };
        let e = &window[4];
        if direction != 0.0 && (state.omega() - e.omega) * direction < 0.0 {
            turned = true;
        }
        let point = BranchPoint {
            lambda: e.lambda + arclength_increment(&e.state, &state),
            omega: state.omega(),
            state,
            report,
            past_fold: turned,
        };
        out.points.push(point.clone());
        window.remove(0);
        window.push(point);
    }
    Ok(out)
}

/// A correction further than this multiple of the previous step from its
/// warm start is treated as a jump onto another family of solutions.
pub const JUMP_FACTOR: f64 = 4.0;

/// Whether `next` continues the branch ending in `prev`, given the size of the
/// last step taken along it.
pub fn continues_branch(prev: &State, next: &State, last_step: Option<f64>) -> bool {
    last_step.is_none_or(|s| arclength_increment(prev, next) <= JUMP_FACTOR * s)
}

/// Narrows the gap between the last Ω where a branch sweep succeeded and the
/// Ω where it failed, down to `resolution`, by warm-started solves that must
/// stay on the branch. Returns the last good point found.
pub fn localize_fold(
    branch: &Branch,
    failed_omega: f64,
    resolution: f64,
) -> Result<BranchPoint> {
    let n = branch.points.len();
    let mut good = branch.points.last().cloned().ok_or_else(|| VstateError::domain("empty branch"))?;
    let step = (n >= 2).then(|| arclength_increment(&branch.points[n - 2].state, &good.state));
    let mut bad = failed_omega;
    while (bad - good.omega).abs() > resolution {
        let mid = 0.5 * (good.omega + bad);
        match newton_solve(&branch.params, &branch.disc, mid, &good.state.unknowns(), &branch.cfg) {
            Ok((state, report))
                if report.classification == Classification::Nontrivial && continues_branch(&good.state, &state, step) =>
            {
                good = BranchPoint {
                    lambda: good.lambda + arclength_increment(&good.state, &state),
                    omega: mid,
                    state,
                    report,
                    past_fold: false,
                };
            }
            _ => bad = mid,
        }
    }
    Ok(good)
}

/// Five converged states at Ω_c + 4ε, …, Ω_c, warm-started in turn from
/// `start`, tagged with arclength. `start` should be a point of the branch
/// short of the fold: Newton from the fold state itself has a nearly singular
/// Jacobian and tends to leave the branch.
pub fn fold_tail(
    start: &State,
    omega_c: f64,
    epsilon: f64,
    params: &GsqgParams,
    disc: &Discretization,
    cfg: &NewtonConfig,
) -> Result<Vec<BranchPoint>> {
    if epsilon == 0.0 {
        return Err(VstateError::CoincidentPoints);
    }
    let mut states = Vec::with_capacity(5);
    let mut reports = Vec::with_capacity(5);
    let mut guess = start.unknowns();
    for k in (0..5).rev() {
        let om = omega_c + k as f64 * epsilon;
        let (s, r) = newton_solve(params, disc, om, &guess, cfg)?;
        if r.classification == Classification::Trivial {
            return Err(VstateError::MaxIterations { iterations: r.iterations, residual: r.final_residual });
        }
        guess = s.unknowns();
        states.push(s);
        reports.push(r);
    }
    let lambdas = arclength_tag(&states)?;
    Ok(states
        .into_iter()
        .zip(reports)
        .zip(lambdas)
        .map(|((state, report), lambda)| BranchPoint { lambda, omega: state.omega(), state, report, past_fold: false })
        .collect())
}

/// Fold resolution of the bisection in [`continue_through_fold`].
pub const FOLD_RESOLUTION: f64 = 1e-5;

/// Locates the fold at the end of a failed sweep, seeds five points spaced by
/// `epsilon` in Ω ahead of it and continues `steps` points past it. The result
/// holds the tail followed by the extension.
pub fn continue_through_fold(sweep: &Branch, epsilon: f64, steps: usize) -> Result<Branch> {
    let failure = sweep
        .failure
        .as_ref()
        .ok_or_else(|| VstateError::domain("sweep reached its end without failing; no fold to continue through"))?;
    let fold = localize_fold(sweep, failure.failed_at, FOLD_RESOLUTION)?;
    let start = &sweep.points.last().expect("a failed sweep with a fold has points").state;
    let direction = (failure.failed_at - fold.omega).signum();
    let eps = -direction * epsilon.abs();
    let (params, disc, cfg) = (&sweep.params, &sweep.disc, &sweep.cfg);
    let tail = fold_tail(start, fold.omega, eps, params, disc, cfg)?;
    let ext = fold_continue(&tail, steps, params, disc, cfg)?;
    let mut out = Branch::new(*params, *disc, *cfg);
    out.fold_omega = Some(fold.omega);
    out.epsilon = Some(epsilon.abs());
    out.failure = ext.failure;
    out.points = tail;
    out.points.extend(ext.points);
    Ok(out)
}
