use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sturmkit::darboux::{shift_eigenvalue, shift_norming};
use sturmkit::forward::{spectral_data, SpectralData};
use sturmkit::inverse::{
    alpha_to_nu, global_reconstruct, nu_to_alpha, reconstruct, reconstruct_even, reconstruct_general,
    ReconstructionOptions, RunReport, SpectralTarget,
};
use sturmkit::io::{format_spectral_table, read_json, read_potential, to_json, write_json, write_potential};
use sturmkit::potential::parity_split;
use sturmkit::validate::{asymptotic_decay_check, check_admissible, marchenko_tail_identity, ValidationReport};
use sturmkit::Error;

const INVALID_INPUT: u8 = 1;
const NOT_CONVERGED: u8 = 2;
const HYPOTHESIS: u8 = 3;

#[derive(Parser)]
#[command(name = "sturmkit", version, about = "Forward and inverse Dirichlet spectral problems on [0, 1]")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues, remainders, norming and normalizing constants of a potential.
    Forward {
        #[arg(long)]
        potential: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
        /// Also write a plot table `n,lambda,mu,nu,alpha`.
        #[arg(long)]
        mu_csv: Option<PathBuf>,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
    },
    /// Reconstruct a potential from a spectral target.
    Inverse {
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: PathBuf,
        /// Solve a head-free problem first, then place the head with Darboux shifts.
        #[arg(long)]
        global: bool,
        #[arg(long, requires = "global")]
        head: Option<usize>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Move one eigenvalue or one norming constant.
    Darboux {
        kind: ShiftArg,
        #[arg(long)]
        potential: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute norming constants from normalizing constants or the reverse.
    Convert {
        direction: Direction,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a target for admissibility or a potential for remainder decay.
    Validate {
        #[arg(long, conflicts_with = "potential", required_unless_present = "potential")]
        target: Option<PathBuf>,
        #[arg(long)]
        potential: Option<PathBuf>,
        /// Eigenvalues examined for a potential.
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Forward data of a potential, reconstruction, and the L² error between them.
    Roundtrip {
        #[arg(long)]
        potential: PathBuf,
        #[arg(long)]
        n: usize,
        /// Use norming constants too; implied when the potential is not symmetric.
        #[arg(long)]
        general: bool,
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 1.0)]
        damping: f64,
    },
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 1.0)]
    damping: f64,
    #[arg(long, default_value_t = 1024)]
    n_grid: usize,
}

impl SolverArgs {
    fn options(&self) -> ReconstructionOptions {
        ReconstructionOptions {
            max_iter: self.max_iter,
            tol: self.tol,
            damping: self.damping,
            n_grid: self.n_grid,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ShiftArg {
    ShiftEig,
    ShiftNu,
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    AlphaToNu,
    NuToAlpha,
}

#[derive(Serialize)]
struct RoundTripSummary {
    #[serde(rename = "N")]
    count: usize,
    general: bool,
    l2_error: f64,
    tolerance: f64,
    converged: bool,
    iterations: usize,
    forward_residual: f64,
    norming_residual: f64,
}

#[derive(Serialize)]
struct ErrorBody {
    kind: &'static str,
    message: String,
    exit_code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    step: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stage: Option<&'static str>,
}

#[derive(Serialize)]
struct ErrorObject {
    error: ErrorBody,
}

struct Failure {
    code: u8,
    body: ErrorBody,
}

impl Failure {
    fn new(code: u8, kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            body: ErrorBody {
                kind,
                message: message.into(),
                exit_code: code,
                step: None,
                stage: None,
            },
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (mut step, mut stage) = (None, None);
        let mut inner = &e;
        loop {
            match inner {
                Error::Step { step: s, source } => {
                    step.get_or_insert(*s);
                    inner = source;
                }
                Error::Stage { stage: s, source } => {
                    stage.get_or_insert(*s);
                    inner = source;
                }
                _ => break,
            }
        }
        let (code, kind) = match inner {
            Error::InvalidArgument(_) => (INVALID_INPUT, "invalid_argument"),
            Error::Resolution { .. } => (INVALID_INPUT, "resolution"),
            Error::UnsupportedDomain(_) => (INVALID_INPUT, "unsupported_domain"),
            Error::Inadmissible { .. } => (INVALID_INPUT, "inadmissible"),
            Error::Io(_) => (INVALID_INPUT, "io"),
            Error::Parse(_) => (INVALID_INPUT, "parse"),
            Error::Bracketing { .. } => (NOT_CONVERGED, "bracketing"),
            Error::Consistency(_) => (NOT_CONVERGED, "consistency"),
            Error::Hypothesis(_) => (HYPOTHESIS, "hypothesis"),
            Error::Positivity { .. } => (HYPOTHESIS, "positivity"),
            Error::Step { .. } | Error::Stage { .. } => unreachable!("unwrapped above"),
        };
        let mut f = Failure::new(code, kind, e.to_string());
        f.body.step = step;
        f.body.stage = stage;
        f
    }
}

type Outcome = Result<u8, Failure>;

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("STURMKIT_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure::new(INVALID_INPUT, "invalid_argument", format!("STURMKIT_THREADS = {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::new(INVALID_INPUT, "invalid_argument", e.to_string()))
}

fn emit_report(path: Option<&Path>, report: &ValidationReport) -> Result<(), Failure> {
    match path {
        Some(p) => write_json(p, report)?,
        None => print!("{}", to_json(report)?),
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    configure_threads()?;
    match cli.command {
        Command::Forward {
            potential,
            n,
            out,
            mu_csv,
            p,
        } => {
            let v = read_potential(&potential)?;
            let pairs = spectral_data(&v, n)?;
            if let Some(table) = mu_csv {
                std::fs::write(table, format_spectral_table(&pairs)).map_err(Error::from)?;
            }
            write_json(&out, &SpectralData::new(p, pairs))?;
            Ok(0)
        }
        Command::Inverse {
            target,
            out,
            report,
            global,
            head,
            solver,
        } => {
            let target: SpectralTarget = read_json(&target)?;
            target.check_shape()?;
            let opts = solver.options();
            let (v, run) = if global {
                let head = head.ok_or_else(|| {
                    Failure::new(INVALID_INPUT, "invalid_argument", "--global needs --head")
                })?;
                global_reconstruct(&target, head, &opts)?
            } else {
                reconstruct(&target, &opts)?
            };
            write_potential(&out, &v)?;
            write_json(&report, &run)?;
            Ok(if run.converged { 0 } else { NOT_CONVERGED })
        }
        Command::Darboux {
            kind,
            potential,
            n,
            t,
            out,
        } => {
            let v = read_potential(&potential)?;
            let shifted = match kind {
                ShiftArg::ShiftEig => shift_eigenvalue(&v, n, t)?,
                ShiftArg::ShiftNu => shift_norming(&v, n, t)?,
            };
            write_potential(&out, &shifted)?;
            Ok(0)
        }
        Command::Convert { direction, data, out } => {
            let mut data: SpectralData = read_json(&data)?;
            if data.count != data.pairs.len() {
                return Err(Failure::new(
                    INVALID_INPUT,
                    "invalid_argument",
                    format!("N = {} but {} pairs", data.count, data.pairs.len()),
                ));
            }
            let lambdas = data.lambdas();
            match direction {
                Direction::AlphaToNu => {
                    let alphas: Vec<f64> = data.pairs.iter().map(|e| e.alpha).collect();
                    for (e, nu) in data.pairs.iter_mut().zip(alpha_to_nu(&lambdas, &alphas)?) {
                        e.nu = nu;
                    }
                }
                Direction::NuToAlpha => {
                    let nus: Vec<f64> = data.pairs.iter().map(|e| e.nu).collect();
                    for (e, alpha) in data.pairs.iter_mut().zip(nu_to_alpha(&lambdas, &nus)?) {
                        e.alpha = alpha;
                    }
                }
            }
            write_json(&out, &data)?;
            Ok(0)
        }
        Command::Validate {
            target,
            potential,
            n,
            out,
        } => {
            let report = if let Some(path) = target {
                let target: SpectralTarget = read_json(&path)?;
                let mut report = check_admissible(&target);
                if target.check_shape().is_ok() {
                    report.identity_residual = Some(marchenko_tail_identity(&target.mu, target.count)?);
                }
                report
            } else {
                let v = read_potential(potential.as_deref().expect("clap enforces one input"))?;
                let mut report = asymptotic_decay_check(&v, n)?;
                let mu: Vec<f64> = spectral_data(&v, n)?.iter().map(|e| e.mu).collect();
                report.identity_residual = Some(marchenko_tail_identity(&mu, n)?);
                report
            };
            emit_report(out.as_deref(), &report)?;
            Ok(if report.admissible { 0 } else { INVALID_INPUT })
        }
        Command::Roundtrip {
            potential,
            n,
            general,
            tolerance,
            out,
            max_iter,
            tol,
            damping,
        } => {
            let v = read_potential(&potential)?;
            let odd = parity_split(&v).1.max_abs();
            let general = general || odd > 1e-12 * (1.0 + v.max_abs());
            let target = SpectralTarget::from_potential(&v, n, 2.0, general)?;
            let opts = ReconstructionOptions {
                max_iter,
                tol,
                damping,
                n_grid: v.n_grid(),
            };
            let (w, run): (_, RunReport) = if general {
                reconstruct_general(&target, &opts)?
            } else {
                reconstruct_even(&target, &opts)?
            };
            let summary = RoundTripSummary {
                count: n,
                general,
                l2_error: w.l2_distance(&v)?,
                tolerance,
                converged: run.converged,
                iterations: run.iterations,
                forward_residual: run.forward_residual,
                norming_residual: run.norming_residual,
            };
            let text = to_json(&summary)?;
            match out {
                Some(p) => std::fs::write(p, &text).map_err(Error::from)?,
                None => print!("{text}"),
            }
            let ok = summary.converged && summary.l2_error <= tolerance;
            Ok(if ok { 0 } else { NOT_CONVERGED })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { INVALID_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("sturmkit: {}", f.body.message);
            let object = ErrorObject { error: f.body };
            match serde_json::to_string(&object) {
                Ok(json) => eprintln!("{json}"),
                Err(e) => eprintln!("{{\"error\":{{\"kind\":\"internal\",\"message\":\"{e}\"}}}}"),
            }
            ExitCode::from(f.code)
        }
    }
}
