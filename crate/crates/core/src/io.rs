//! Branch and boundary files.
//!
//! A branch is stored as a CSV table with one row per state plus a JSON
//! sidecar (`<file>.json`) carrying the parameters, grid, Newton settings and
//! per-point reports. Numbers are written with 17 significant digits so that
//! a reload reproduces every value bit for bit.

use crate::continuation::{Branch, BranchPoint, SweepFailure};
use crate::contour::{Discretization, State};
use crate::error::{Result, VstateError};
use crate::solver::{make_state, NewtonConfig, SolveReport};
use crate::spectrum::GsqgParams;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

pub const LIBRARY_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_num(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| VstateError::Format(format!("not a number: {s:?}")))
}

fn csv_err(e: csv::Error) -> VstateError {
    VstateError::Format(e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchSidecar {
    pub library_version: String,
    pub params: GsqgParams,
    pub disc: Discretization,
    pub config: NewtonConfig,
    pub continuation: bool,
    pub fold_omega: Option<f64>,
    pub epsilon: Option<f64>,
    pub failure: Option<SweepFailure>,
    pub reports: Vec<SolveReport>,
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    let mut s = csv_path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn coefficient_columns(params: &GsqgParams, disc: &Discretization) -> Vec<String> {
    let modes = disc.modes();
    match params.b {
        None => (1..=modes).map(|k| format!("a_{k}")).collect(),
        Some(_) => (1..=modes).map(|k| format!("a1_{k}")).chain((1..=modes).map(|k| format!("a2_{k}"))).collect(),
    }
}

/// Header of the branch table; continuation output appends `lambda` and
/// `past_fold`.
pub fn branch_header(params: &GsqgParams, disc: &Discretization, continuation: bool) -> Vec<String> {
    let mut h: Vec<String> = ["omega", "residual", "iter"].iter().map(|s| s.to_string()).collect();
    h.extend(coefficient_columns(params, disc));
    if continuation {
        h.push("lambda".into());
        h.push("past_fold".into());
    }
    h
}

pub fn write_branch_csv<W: Write>(branch: &Branch, out: W, continuation: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header = branch_header(&branch.params, &branch.disc, continuation);
    w.write_record(&header).map_err(csv_err)?;
    for p in &branch.points {
        let mut row = vec![fmt_num(p.omega), fmt_num(p.report.final_residual), p.report.iterations.to_string()];
        let x = p.state.unknowns();
        if x.len() + 3 + if continuation { 2 } else { 0 } != header.len() {
            return Err(VstateError::Format(format!("state has {} unknowns, table expects {}", x.len(), header.len())));
        }
        row.extend(x.iter().map(|v| fmt_num(*v)));
        if continuation {
            row.push(fmt_num(p.lambda));
            row.push(p.past_fold.to_string());
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn sidecar(branch: &Branch, continuation: bool) -> BranchSidecar {
    BranchSidecar {
        library_version: LIBRARY_VERSION.into(),
        params: branch.params,
        disc: branch.disc,
        config: branch.cfg,
        continuation,
        fold_omega: branch.fold_omega,
        epsilon: branch.epsilon,
        failure: branch.failure.clone(),
        reports: branch.points.iter().map(|p| p.report).collect(),
    }
}

/// Rebuilds a branch from its table and sidecar.
pub fn read_branch_csv<R: Read>(table: R, meta: &BranchSidecar) -> Result<Branch> {
    let mut rd = csv::Reader::from_reader(table);
    let header: Vec<String> = rd.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if header != branch_header(&meta.params, &meta.disc, meta.continuation) {
        return Err(VstateError::Format("branch table header does not match its sidecar".into()));
    }
    let ncoef = header.len() - 3 - if meta.continuation { 2 } else { 0 };
    let mut branch = Branch::new(meta.params, meta.disc, meta.config);
    branch.fold_omega = meta.fold_omega;
    branch.epsilon = meta.epsilon;
    branch.failure = meta.failure.clone();
    let mut lambda = 0.0;
    let mut previous: Option<State> = None;
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let omega = parse_num(&rec[0])?;
        let x: Vec<f64> = (3..3 + ncoef).map(|k| parse_num(&rec[k])).collect::<Result<_>>()?;
        let state = make_state(&meta.params, &meta.disc, omega, &x)?;
        let report = *meta
            .reports
            .get(i)
            .ok_or_else(|| VstateError::Format("sidecar has fewer reports than table rows".into()))?;
        let past_fold = if meta.continuation {
            lambda = parse_num(&rec[3 + ncoef])?;
            rec[4 + ncoef]
                .trim()
                .parse()
                .map_err(|_| VstateError::Format(format!("bad past_fold flag {:?}", &rec[4 + ncoef])))?
        } else {
            if let Some(prev) = &previous {
                lambda += crate::continuation::arclength_increment(prev, &state);
            }
            false
        };
        previous = Some(state.clone());
        branch.points.push(BranchPoint { lambda, omega, state, report, past_fold });
    }
    if branch.points.len() != meta.reports.len() {
        return Err(VstateError::Format("sidecar has more reports than table rows".into()));
    }
    Ok(branch)
}

/// Writes `path` and its sidecar.
pub fn save_branch(branch: &Branch, path: &Path, continuation: bool) -> Result<()> {
    write_branch_csv(branch, std::fs::File::create(path)?, continuation)?;
    let meta = serde_json::to_string_pretty(&sidecar(branch, continuation)).map_err(|e| VstateError::Format(e.to_string()))?;
    std::fs::write(sidecar_path(path), meta)?;
    Ok(())
}

pub fn load_branch(path: &Path) -> Result<Branch> {
    let meta: BranchSidecar = serde_json::from_str(&std::fs::read_to_string(sidecar_path(path))?)
        .map_err(|e| VstateError::Format(e.to_string()))?;
    read_branch_csv(std::fs::File::open(path)?, &meta)
}

/// Whole branch as one JSON document.
pub fn branch_to_json(branch: &Branch) -> Result<String> {
    serde_json::to_string_pretty(branch).map_err(|e| VstateError::Format(e.to_string()))
}

pub fn branch_from_json(s: &str) -> Result<Branch> {
    serde_json::from_str(s).map_err(|e| VstateError::Format(e.to_string()))
}

/// Boundary samples on the full quadrature grid: `theta,x,y` for a patch,
/// `theta,x1,y1,x2,y2` for an annular patch.
pub fn write_boundary_csv<W: Write>(state: &State, disc: &Discretization, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    match state {
        State::Simply(_) => w.write_record(["theta", "x", "y"]),
        State::Doubly(_) => w.write_record(["theta", "x1", "y1", "x2", "y2"]),
    }
    .map_err(csv_err)?;
    for i in 0..disc.nodes() {
        let t = disc.theta(i);
        let row = match state {
            State::Simply(s) => {
                let z = s.eval(t).0;
                vec![fmt_num(t), fmt_num(z.re), fmt_num(z.im)]
            }
            State::Doubly(d) => {
                let z1 = d.eval_outer(t).0;
                let z2 = d.eval_inner(t).0;
                vec![fmt_num(t), fmt_num(z1.re), fmt_num(z1.im), fmt_num(z2.re), fmt_num(z2.im)]
            }
        };
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::{DoublyState, SimplyState};
    use crate::solver::Classification;

    fn report(i: usize) -> SolveReport {
        SolveReport { converged: true, iterations: i, final_residual: 1e-13 * (i as f64 + 0.1), classification: Classification::Nontrivial }
    }

    fn doubly_branch() -> Branch {
        let p = GsqgParams::doubly(0.5, 0.65, 4).unwrap();
        let d = Discretization::new(3, 4).unwrap();
        let mut b = Branch::new(p, d, NewtonConfig::default());
        for k in 0..3 {
            let om = 0.1 + k as f64 / 3.0 * 1e-2;
            let s = DoublyState::new(0.5, 0.65, 4, om, vec![0.1 / 3.0, 1e-17 * k as f64, -7.0e-5], vec![-1.0 / 7.0, 0.0, 2e-300]);
            b.points.push(BranchPoint { lambda: k as f64 * 0.1, omega: om, state: State::Doubly(s), report: report(k), past_fold: k == 2 });
        }
        b.fold_omega = Some(0.1);
        b.epsilon = Some(1e-4);
        b
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-308, 5e-324, 1.7976931348623157e308, -0.0] {
            assert_eq!(parse_num(&fmt_num(x)).unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn continuation_table_round_trips() {
        let b = doubly_branch();
        let mut buf = Vec::new();
        write_branch_csv(&b, &mut buf, true).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("omega,residual,iter,a1_1,a1_2,a1_3,a2_1,a2_2,a2_3,lambda,past_fold\n"));
        let back = read_branch_csv(buf.as_slice(), &sidecar(&b, true)).unwrap();
        assert_eq!(back, b);
    }

    #[test]
    fn json_round_trips() {
        let b = doubly_branch();
        assert_eq!(branch_from_json(&branch_to_json(&b).unwrap()).unwrap(), b);
    }

    #[test]
    fn header_mismatch_rejected() {
        let b = doubly_branch();
        let mut buf = Vec::new();
        write_branch_csv(&b, &mut buf, false).unwrap();
        assert!(read_branch_csv(buf.as_slice(), &sidecar(&b, true)).is_err());
    }

    #[test]
    fn boundary_dump_has_every_node() {
        let d = Discretization::new(3, 3).unwrap();
        let s = State::Simply(SimplyState::new(0.5, 3, 0.3, vec![0.1, 0.0, 0.0]));
        let mut buf = Vec::new();
        write_boundary_csv(&s, &d, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "theta,x,y");
        assert_eq!(lines.len(), d.nodes() + 1);
        let first: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(first, vec![0.0, 1.1, 0.0]);
    }
}
