//! Newton iteration on the sine-coefficient residual map.

use crate::contour::{Discretization, DoublyState, ResidualVector, SimplyState, State};
use crate::continuation::{arclength_increment, continues_branch, Branch, BranchPoint, SweepFailure};
use crate::error::{Result, VstateError};
use crate::spectrum::{eigen_omegas, GsqgParams};
use crate::specfun::{lambda_n, theta_n};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonConfig {
    /// Forward-difference step.
    pub h: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self { h: 1e-9, tol: 1e-11, max_iter: 50, damping: 1.0 }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !(self.tol > 0.0) || !(self.damping > 0.0 && self.damping <= 1.0) || self.max_iter == 0 {
            return Err(VstateError::domain(format!("invalid newton config {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Trivial,
    Nontrivial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub converged: bool,
    pub iterations: usize,
    pub final_residual: f64,
    pub classification: Classification,
}

/// Largest coefficient magnitude below which a root counts as the disc or annulus.
pub const TRIVIAL_THRESHOLD: f64 = 1e-8;
/// Jacobians with a larger condition estimate are treated as singular.
pub const MAX_CONDITION: f64 = 1e14;

pub fn classify(x: &[f64]) -> Classification {
    if x.iter().all(|v| v.abs() < TRIVIAL_THRESHOLD) {
        Classification::Trivial
    } else {
        Classification::Nontrivial
    }
}

/// Forward-difference Jacobian, column j = (F(x + h e_j) − F(x))/h. Columns are
/// evaluated in parallel.
pub fn fd_jacobian<F>(f: &F, x: &[f64], f0: &[f64], h: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    let cols: Vec<Vec<f64>> = (0..x.len())
        .into_par_iter()
        .map(|j| {
            let mut xp = x.to_vec();
            xp[j] += h;
            let fp = f(&xp)?;
            Ok(fp.iter().zip(f0).map(|(a, b)| (a - b) / h).collect())
        })
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(f0.len(), x.len(), |i, j| cols[j][i]))
}

/// Builds the boundary state for the given parameters and unknown vector,
/// padding with zeros up to the number of resolved modes.
pub fn make_state(params: &GsqgParams, disc: &Discretization, omega: f64, unknowns: &[f64]) -> Result<State> {
    let modes = disc.modes();
    let pad = |v: &[f64]| -> Result<Vec<f64>> {
        if v.len() > modes {
            return Err(VstateError::domain(format!("{} coefficients exceed {modes} modes", v.len())));
        }
        let mut out = v.to_vec();
        out.resize(modes, 0.0);
        Ok(out)
    };
    Ok(match params.b {
        None => State::Simply(SimplyState::new(params.alpha, params.m, omega, pad(unknowns)?)),
        Some(b) => {
            let (outer, inner) = if unknowns.len() == 2 * modes {
                unknowns.split_at(modes)
            } else {
                let half = unknowns.len() / 2;
                unknowns.split_at(half)
            };
            State::Doubly(DoublyState::new(params.alpha, b, params.m, omega, pad(outer)?, pad(inner)?))
        }
    })
}

/// max over one fold sector of |Σ_k b_k sin(mkθ_i)|, per boundary.
pub fn stopping_norm(res: &ResidualVector, disc: &Discretization, boundaries: usize) -> f64 {
    let per = res.sines.len() / boundaries;
    let sector = disc.nodes() / disc.m;
    (0..boundaries)
        .map(|c| {
            let part = ResidualVector { sines: res.sines[c * per..(c + 1) * per].to_vec() };
            (0..sector)
                .map(|i| {
                    let th = disc.theta(i);
                    part.sines
                        .iter()
                        .enumerate()
                        .map(|(k, b)| b * ((disc.m * (k + 1)) as f64 * th).sin())
                        .sum::<f64>()
                        .abs()
                })
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

fn boundaries(state: &State) -> usize {
    match state {
        State::Simply(_) => 1,
        State::Doubly(_) => 2,
    }
}

/// Residual of a state re-evaluated from scratch, in the stopping norm.
pub fn certify(state: &State, disc: &Discretization) -> Result<f64> {
    Ok(stopping_norm(&state.residual(disc)?, disc, boundaries(state)))
}

/// Rotation by π/m, a_k ↦ (−1)^k a_k on every boundary, applied when the
/// leading outer coefficient is negative. The rotated curve solves the same
/// equation, so this only fixes a representative.
pub fn normalize_sign(state: &State) -> State {
    let flip = |v: &[f64]| -> Vec<f64> { v.iter().enumerate().map(|(k, a)| if k % 2 == 0 { -a } else { *a }).collect() };
    match state {
        State::Simply(s) if s.coeffs.first().is_some_and(|a| *a < 0.0) => {
            State::Simply(SimplyState { coeffs: flip(&s.coeffs), ..s.clone() })
        }
        State::Doubly(d) if d.outer.first().is_some_and(|a| *a < 0.0) => {
            State::Doubly(DoublyState { outer: flip(&d.outer), inner: flip(&d.inner), ..d.clone() })
        }
        other => other.clone(),
    }
}

/// Newton iteration x ← x − damping·J⁻¹F(x) from `initial` at fixed Ω.
pub fn newton_solve(
    params: &GsqgParams,
    disc: &Discretization,
    omega: f64,
    initial: &[f64],
    cfg: &NewtonConfig,
) -> Result<(State, SolveReport)> {
    cfg.validate()?;
    if disc.m != params.m {
        return Err(VstateError::domain(format!("grid fold {} differs from m = {}", disc.m, params.m)));
    }
    let template = make_state(params, disc, omega, initial)?;
    let nb = boundaries(&template);
    let f = |x: &[f64]| -> Result<Vec<f64>> { Ok(template.with_unknowns(x).residual(disc)?.sines) };
    let mut x = template.unknowns();
    let mut iterations = 0;
    loop {
        let fx = f(&x)?;
        let norm = stopping_norm(&ResidualVector { sines: fx.clone() }, disc, nb);
        if !norm.is_finite() {
            return Err(VstateError::Geometry("residual is not finite".into()));
        }
        if norm < cfg.tol {
            let state = normalize_sign(&template.with_unknowns(&x));
            let classification = classify(&x);
            return Ok((state, SolveReport { converged: true, iterations, final_residual: norm, classification }));
        }
        if iterations >= cfg.max_iter {
            return Err(VstateError::MaxIterations { iterations, residual: norm });
        }
        let jac = fd_jacobian(&f, &x, &fx, cfg.h)?;
        let sv = jac.clone().svd(false, false).singular_values;
        let smax = sv.max();
        let smin = sv.min();
        if !(smin > 0.0) || smax / smin > MAX_CONDITION {
            return Err(VstateError::SingularJacobian(if smin > 0.0 { smax / smin } else { f64::INFINITY }));
        }
        let step = jac
            .lu()
            .solve(&DVector::from_vec(fx))
            .ok_or(VstateError::SingularJacobian(f64::INFINITY))?;
        for (xi, si) in x.iter_mut().zip(step.iter()) {
            *xi -= cfg.damping * si;
        }
        iterations += 1;
    }
}

/// Initial guess of size `amplitude`: a_1 for the disc; for the annulus the
/// null direction of the mode-m multiplier at the eigenvalue nearest to Ω,
/// scaled so its larger component equals `amplitude` and a_{1,1} ≥ 0.
pub fn seed_unknowns(params: &GsqgParams, disc: &Discretization, omega: f64, amplitude: f64) -> Result<Vec<f64>> {
    let modes = disc.modes();
    match params.b {
        None => {
            let mut x = vec![0.0; modes];
            x[0] = amplitude;
            Ok(x)
        }
        Some(b) => {
            let a = params.alpha;
            let m = params.m;
            let pair = eigen_omegas(params);
            let target = match pair {
                Ok(p) if (p.omega_plus - omega).abs() < (p.omega_minus - omega).abs() => p.omega_plus,
                Ok(p) => p.omega_minus,
                Err(_) => omega,
            };
            let v0 = target + b.powf(-a) * theta_n(m, a)? - lambda_n(1, b, a)?;
            let v1 = -lambda_n(m, b, a)?;
            let scale = amplitude / v0.abs().max(v1.abs());
            let sign = if v0 < 0.0 { -1.0 } else { 1.0 };
            let mut x = vec![0.0; 2 * modes];
            x[0] = sign * scale * v0;
            x[modes] = sign * scale * v1;
            Ok(x)
        }
    }
}

/// Seeds tried in turn until Newton lands on a nontrivial root.
pub const SEED_LADDER: [f64; 3] = [1e-3, 1e-2, 1e-1];

/// Newton from the bifurcating direction with growing seeds; returns the first
/// nontrivial root, else the last outcome.
pub fn solve_nontrivial(
    params: &GsqgParams,
    disc: &Discretization,
    omega: f64,
    cfg: &NewtonConfig,
    first_seed: Option<f64>,
) -> Result<(State, SolveReport)> {
    let mut ladder: Vec<f64> = Vec::new();
    let mut s = first_seed.unwrap_or(SEED_LADDER[0]);
    while s <= SEED_LADDER[2] * (1.0 + 1e-12) {
        ladder.push(s);
        s *= 10.0;
    }
    if ladder.is_empty() {
        ladder.push(first_seed.unwrap_or(SEED_LADDER[0]));
    }
    let mut last = None;
    for amp in ladder {
        let x0 = seed_unknowns(params, disc, omega, amp)?;
        let out = newton_solve(params, disc, omega, &x0, cfg);
        match &out {
            Ok((_, rep)) if rep.classification == Classification::Nontrivial => return out,
            _ => last = Some(out),
        }
    }
    last.expect("ladder is never empty")
}

/// Where a sweep stops when no solve fails first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepStop {
    pub omega_end: f64,
}

/// Sweeps Ω from `omega_start` by `omega_step`, warm-starting each solve from
/// the previous state (falling back to the seed ladder when that lands on the
/// trivial root or fails), until `stop.omega_end` is passed or a solve fails or
/// falls back onto the trivial root.
pub fn sweep_branch(
    params: &GsqgParams,
    disc: &Discretization,
    omega_start: f64,
    omega_step: f64,
    stop: SweepStop,
    cfg: &NewtonConfig,
    seed: Option<f64>,
) -> Result<Branch> {
    if omega_step == 0.0 || !omega_step.is_finite() {
        return Err(VstateError::domain("omega step must be nonzero"));
    }
    let mut branch = Branch::new(*params, *disc, *cfg);
    let steps = ((stop.omega_end - omega_start) / omega_step + 1e-9).floor();
    if steps < 0.0 {
        return Err(VstateError::domain("omega_end lies behind omega_start for this step sign"));
    }
    let steps = steps as usize;
    let mut previous: Option<State> = None;
    for k in 0..=steps {
        let omega = omega_start + k as f64 * omega_step;
        let outcome = match &previous {
            None => solve_nontrivial(params, disc, omega, cfg, seed),
            Some(prev) => match newton_solve(params, disc, omega, &prev.unknowns(), cfg) {
                Ok((s, r)) if r.classification == Classification::Nontrivial => Ok((s, r)),
                // near a bifurcation the amplitude grows faster than a warm start can follow
                warm => solve_nontrivial(params, disc, omega, cfg, seed).or(warm),
            },
        };
        let last_good = previous.as_ref().map(|s| s.omega());
        let n = branch.points.len();
        let last_step = (n >= 2).then(|| branch.points[n - 1].lambda - branch.points[n - 2].lambda);
        match outcome {
            Ok((state, _)) if previous.as_ref().is_some_and(|prev| !continues_branch(prev, &state, last_step)) => {
                branch.failure = Some(SweepFailure { last_good, failed_at: omega, reason: "jumped off the branch".into() });
                break;
            }
            Ok((state, report)) if report.classification == Classification::Nontrivial => {
                let lambda = match branch.points.last() {
                    Some(p) => p.lambda + arclength_increment(&p.state, &state),
                    None => 0.0,
                };
                branch.points.push(BranchPoint { lambda, omega, state: state.clone(), report, past_fold: false });
                previous = Some(state);
            }
            Ok(_) => {
                branch.failure = Some(SweepFailure { last_good, failed_at: omega, reason: "trivial root".into() });
                break;
            }
            Err(e) => {
                branch.failure = Some(SweepFailure { last_good, failed_at: omega, reason: e.to_string() });
                break;
            }
        }
    }
    Ok(branch)
}
