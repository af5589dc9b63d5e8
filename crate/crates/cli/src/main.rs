use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use vstate_core::continuation::{continue_through_fold, Branch, BranchPoint};
use vstate_core::contour::Discretization;
use vstate_core::io;
use vstate_core::solver::{newton_solve, solve_nontrivial, sweep_branch, Classification, NewtonConfig, SweepStop};
use vstate_core::spectrum::{
    b0_solve, eigen_omegas, limiting_omega_minus, omega_simply, symmetry_threshold, GsqgParams,
};
use vstate_core::VstateError;

const EXIT_DOMAIN: u8 = 2;
const EXIT_CONVERGENCE: u8 = 3;
const EXIT_GEOMETRY: u8 = 4;
const EXIT_TRIVIAL: u8 = 5;

#[derive(Parser)]
#[command(name = "vstate", version, about = "Rotating V-states of the generalized SQG equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bifurcation angular velocities and related spectral quantities.
    Eigen {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Largest annulus radius for which every mode bifurcates.
    B0 {
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Smallest fold number with two simple real eigenvalues from then on.
    Threshold {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        b: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// One Newton solve at fixed Ω; writes a one-row branch and a boundary dump.
    Solve {
        #[command(flatten)]
        params: OptParamArgs,
        #[arg(long, allow_hyphen_values = true)]
        omega: f64,
        #[command(flatten)]
        newton: NewtonArgs,
        /// Branch whose state nearest to Ω is used as the initial guess.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Branch sweep in Ω with warm starts.
    Sweep {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, allow_hyphen_values = true)]
        omega_start: f64,
        #[arg(long, allow_hyphen_values = true)]
        omega_end: f64,
        #[arg(long, allow_hyphen_values = true)]
        omega_step: f64,
        #[command(flatten)]
        newton: NewtonArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Fold continuation from the end of a sweep that stopped at a fold.
    Continue {
        #[arg(long = "in")]
        input: PathBuf,
        /// Ω spacing of the five seed points.
        #[arg(long, default_value_t = 1e-4)]
        epsilon: f64,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Boundary samples of the branch state nearest to Ω (last state if omitted).
    DumpBoundary {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        omega: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    m: usize,
}

#[derive(Args)]
struct OptParamArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    m: Option<usize>,
}

#[derive(Args)]
struct NewtonArgs {
    /// Resolution exponent, N = m·2^r. Defaults to 8 for a patch, 6 for an annulus.
    #[arg(long)]
    r: Option<u32>,
    /// Lower r by two.
    #[arg(long)]
    fast: bool,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    /// First amplitude of the seed ladder.
    #[arg(long)]
    seed_a1: Option<f64>,
}

#[derive(Args)]
struct OutArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug)]
enum CliError {
    Core(VstateError),
    Trivial(f64),
}

impl From<VstateError> for CliError {
    fn from(e: VstateError) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Trivial(_) => EXIT_TRIVIAL,
            CliError::Core(e) if e.is_geometry() => EXIT_GEOMETRY,
            CliError::Core(e) if e.is_convergence() => EXIT_CONVERGENCE,
            CliError::Core(_) => EXIT_DOMAIN,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Trivial(om) => write!(f, "newton converged to the trivial root at omega = {om}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn default_r(params: &GsqgParams) -> u32 {
    if params.b.is_some() {
        6
    } else {
        8
    }
}

fn discretization(params: &GsqgParams, n: &NewtonArgs) -> CliResult<Discretization> {
    let r = n.r.unwrap_or_else(|| default_r(params));
    let r = if n.fast { r.saturating_sub(2) } else { r };
    Ok(Discretization::new(r, params.m)?)
}

fn newton_config(n: &NewtonArgs) -> CliResult<NewtonConfig> {
    let mut cfg = NewtonConfig::default();
    if let Some(h) = n.h {
        cfg.h = h;
    }
    if let Some(t) = n.tol {
        cfg.tol = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit_record(out: &OutArgs, record: Value) -> CliResult<()> {
    let text = match out.format {
        Format::Json => serde_json::to_string_pretty(&record).expect("plain values serialize") + "\n",
        Format::Csv => {
            let obj = record.as_object().expect("records are objects");
            let keys: Vec<&str> = obj.keys().map(String::as_str).collect();
            let vals: Vec<String> = obj
                .values()
                .map(|v| match v {
                    Value::Number(n) if n.is_f64() => io::fmt_num(n.as_f64().expect("checked")),
                    Value::Null => String::new(),
                    other => other.to_string(),
                })
                .collect();
            format!("{}\n{}\n", keys.join(","), vals.join(","))
        }
    };
    match &out.out {
        Some(p) => std::fs::write(p, text).map_err(VstateError::from)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn save(branch: &Branch, out: &OutArgs, continuation: bool) -> CliResult<()> {
    let path = out
        .out
        .as_ref()
        .ok_or_else(|| VstateError::domain("--out is required for branch output"))?;
    match out.format {
        Format::Csv => io::save_branch(branch, path, continuation)?,
        Format::Json => std::fs::write(path, io::branch_to_json(branch)?).map_err(VstateError::from)?,
    }
    Ok(())
}

fn load(path: &Path) -> CliResult<Branch> {
    if path.extension().is_some_and(|e| e == "json") {
        let text = std::fs::read_to_string(path).map_err(VstateError::from)?;
        Ok(io::branch_from_json(&text)?)
    } else {
        Ok(io::load_branch(path)?)
    }
}

fn nearest(branch: &Branch, omega: Option<f64>) -> CliResult<&BranchPoint> {
    let pts = &branch.points;
    let p = match omega {
        None => pts.last(),
        Some(om) => pts.iter().min_by(|a, b| (a.omega - om).abs().total_cmp(&(b.omega - om).abs())),
    };
    p.ok_or_else(|| VstateError::domain("input branch has no states").into())
}

fn boundary_path(out: &Path) -> PathBuf {
    out.with_extension("boundary.csv")
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Eigen { params, out } => {
            let p = GsqgParams::new(params.alpha, params.b, params.m)?;
            let record = match p.b {
                None => json!({ "alpha": p.alpha, "m": p.m, "omega": omega_simply(p.m, p.alpha)? }),
                Some(b) => {
                    let e = eigen_omegas(&p)?;
                    json!({
                        "alpha": p.alpha,
                        "b": b,
                        "m": p.m,
                        "omega_plus": e.omega_plus,
                        "omega_minus": e.omega_minus,
                        "delta": e.delta,
                        "threshold": symmetry_threshold(&p)?,
                        "b0": b0_solve(p.alpha, 1e-12)?,
                        "omega_minus_limit": limiting_omega_minus(b, p.alpha)?,
                    })
                }
            };
            emit_record(&out, record)
        }
        Command::B0 { alpha, out } => emit_record(&out, json!({ "alpha": alpha, "b0": b0_solve(alpha, 1e-12)? })),
        Command::Threshold { alpha, b, out } => {
            let p = GsqgParams::doubly(alpha, b, 2)?;
            emit_record(&out, json!({ "alpha": alpha, "b": b, "threshold": symmetry_threshold(&p)? }))
        }
        Command::Solve { params, omega, newton, input, out } => {
            let cfg = newton_config(&newton)?;
            let (p, disc, outcome) = match &input {
                Some(path) => {
                    let src = load(path)?;
                    let p = src.params;
                    let disc = if newton.r.is_some() || newton.fast { discretization(&p, &newton)? } else { src.disc };
                    let start = nearest(&src, Some(omega))?.state.unknowns();
                    (p, disc, newton_solve(&p, &disc, omega, &start, &cfg))
                }
                None => {
                    let missing = || VstateError::domain("--alpha and --m are required without --in");
                    let p = GsqgParams::new(params.alpha.ok_or_else(missing)?, params.b, params.m.ok_or_else(missing)?)?;
                    let disc = discretization(&p, &newton)?;
                    (p, disc, solve_nontrivial(&p, &disc, omega, &cfg, newton.seed_a1))
                }
            };
            let (state, report) = outcome?;
            let mut branch = Branch::new(p, disc, cfg);
            branch.points.push(BranchPoint { lambda: 0.0, omega, state: state.clone(), report, past_fold: false });
            if let Some(path) = &out.out {
                save(&branch, &out, false)?;
                io::write_boundary_csv(&state, &disc, std::fs::File::create(boundary_path(path)).map_err(VstateError::from)?)?;
            }
            eprintln!(
                "omega = {omega}: {} root after {} iterations, residual {:e}",
                if report.classification == Classification::Trivial { "trivial" } else { "nontrivial" },
                report.iterations,
                report.final_residual
            );
            if report.classification == Classification::Trivial {
                return Err(CliError::Trivial(omega));
            }
            Ok(())
        }
        Command::Sweep { params, omega_start, omega_end, omega_step, newton, out } => {
            let p = GsqgParams::new(params.alpha, params.b, params.m)?;
            let disc = discretization(&p, &newton)?;
            let cfg = newton_config(&newton)?;
            let branch = sweep_branch(&p, &disc, omega_start, omega_step, SweepStop { omega_end }, &cfg, newton.seed_a1)?;
            save(&branch, &out, false)?;
            eprintln!("{} states", branch.points.len());
            if let Some(f) = &branch.failure {
                eprintln!("stopped at omega = {}: {}", f.failed_at, f.reason);
            }
            if branch.points.is_empty() {
                return Err(VstateError::NonConvergence("sweep produced no nontrivial state".into()).into());
            }
            Ok(())
        }
        Command::Continue { input, epsilon, steps, out } => {
            let src = load(&input)?;
            let branch = continue_through_fold(&src, epsilon, steps)?;
            save(&branch, &out, true)?;
            eprintln!(
                "fold at omega = {}, {} states ({} past the fold)",
                branch.fold_omega.unwrap_or(f64::NAN),
                branch.points.len(),
                branch.points.iter().filter(|p| p.past_fold).count()
            );
            Ok(())
        }
        Command::DumpBoundary { input, omega, out } => {
            let src = load(&input)?;
            let point = nearest(&src, omega)?;
            match out {
                Some(path) => io::write_boundary_csv(
                    &point.state,
                    &src.disc,
                    std::fs::File::create(path).map_err(VstateError::from)?,
                )?,
                None => io::write_boundary_csv(&point.state, &src.disc, std::io::stdout().lock())?,
            }
            Ok(())
        }
    }
}

fn init_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("VSTATE_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| VstateError::domain(format!("VSTATE_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| VstateError::domain(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match init_threads().and_then(|_| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
