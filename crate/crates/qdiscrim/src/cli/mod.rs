//! The `qdiscrim` command line: exact curve sweeps, the verification report,
//! Monte Carlo estimates, SVG plots and the many-copy limit.
//!
//! Exit codes are a stable contract: 0 success, 1 verification or runtime
//! failure, 2 usage error.

pub mod curves;
pub mod plot;
pub mod verify;

use crate::adaptive;
use crate::sim::{self, Scheme, TrialPlan};
use crate::states::{NoiseModel, SignalEnsemble};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Seed fallback environment variable.
pub const SEED_ENV_VAR: &str = "QDISCRIM_SEED";

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
    VerificationFailed,
}

impl CliError {
    fn usage(err: impl std::fmt::Display) -> Self {
        CliError::Usage(err.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "qdiscrim",
    version,
    about = "Multiple-copy discrimination of two noisy qubit states: exact scheme curves, cross-route verification, Monte Carlo and plots"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate exact success/failure curves over N = 1..n-max
    Curves {
        /// Signal half-angle, radians or a fraction like `pi/6`
        #[arg(long, value_parser = parse_angle)]
        theta: f64,
        /// Preparation fidelity F in [1/2, 1]
        #[arg(long)]
        fidelity: f64,
        /// Prior probability of hypothesis 0
        #[arg(long, default_value_t = 0.5)]
        p0: f64,
        /// Largest copy count
        #[arg(long = "n-max", default_value_t = 50)]
        n_max: u32,
        /// Comma-separated scheme list
        #[arg(long, value_delimiter = ',', default_value = "adaptive,qdg,voting")]
        schemes: Vec<Scheme>,
        /// Output path (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
    },
    /// Run the full invariant suite and write the verification report
    Verify {
        /// `default` or a JSON file `{"theta": [...], "fidelity": [...], "n_max": N}`
        #[arg(long, default_value = "default")]
        grid: String,
        /// Route-equivalence tolerance
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Monte Carlo trials per sampled grid point
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        /// RNG seed (falls back to QDISCRIM_SEED, then 7)
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (0 = all cores)
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Report path
        #[arg(long, default_value = "verify_report.json")]
        out: PathBuf,
    },
    /// Monte Carlo estimate of one scheme at one copy count
    Mc {
        #[arg(long)]
        scheme: Scheme,
        #[arg(long, value_parser = parse_angle)]
        theta: f64,
        #[arg(long)]
        fidelity: f64,
        #[arg(long, default_value_t = 0.5)]
        p0: f64,
        #[arg(long = "n-copies")]
        n_copies: u32,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        /// RNG seed (falls back to QDISCRIM_SEED, then 0)
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (0 = all cores); never changes the estimate
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Output path (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a curves CSV as a standalone SVG chart
    Plot {
        /// CSV produced by `qdiscrim curves`
        #[arg(long)]
        input: PathBuf,
        /// Output path (defaults to the input with an .svg extension)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Draw p_error on a log10 axis
        #[arg(long = "log-scale")]
        log_scale: bool,
    },
    /// Print the common many-copy success limit
    Limit {
        #[arg(long, value_parser = parse_angle)]
        theta: f64,
        #[arg(long)]
        fidelity: f64,
    },
}

/// Parse an angle given as radians (`0.5236`) or a pi fraction (`pi/6`,
/// `2pi/5`, `0.5pi`, `pi`).
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let bad = || format!("bad angle `{s}` (use radians or forms like pi/6, 2pi/5)");
    if let Some(idx) = t.find("pi") {
        let coef_s = &t[..idx];
        let rest = &t[idx + 2..];
        let coef: f64 = if coef_s.is_empty() {
            1.0
        } else {
            coef_s.parse().map_err(|_| bad())?
        };
        let div: f64 = if rest.is_empty() {
            1.0
        } else if let Some(d) = rest.strip_prefix('/') {
            d.parse().map_err(|_| bad())?
        } else {
            return Err(bad());
        };
        if div == 0.0 || !div.is_finite() || !coef.is_finite() {
            return Err(bad());
        }
        Ok(coef * std::f64::consts::PI / div)
    } else {
        t.parse().map_err(|_| bad())
    }
}

fn resolve_seed(explicit: Option<u64>, default: u64) -> Result<u64, CliError> {
    if let Some(s) = explicit {
        return Ok(s);
    }
    match std::env::var(SEED_ENV_VAR) {
        Ok(v) => v.parse().map_err(|_| {
            CliError::Usage(format!("{SEED_ENV_VAR}=`{v}` is not a valid 64-bit seed"))
        }),
        Err(_) => Ok(default),
    }
}

fn ensemble(theta: f64, p0: f64) -> Result<SignalEnsemble, CliError> {
    SignalEnsemble::new(theta, p0).map_err(CliError::usage)
}

fn noise_model(fidelity: f64) -> Result<NoiseModel, CliError> {
    NoiseModel::new(fidelity).map_err(CliError::usage)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_curves(
    theta: f64,
    fidelity: f64,
    p0: f64,
    n_max: u32,
    schemes: &[Scheme],
    out: Option<&Path>,
    format: OutputFormat,
) -> Result<(), CliError> {
    if n_max == 0 {
        return Err(CliError::Usage("--n-max must be at least 1".into()));
    }
    if schemes.is_empty() {
        return Err(CliError::Usage(
            "--schemes must name at least one scheme".into(),
        ));
    }
    let ens = ensemble(theta, p0)?;
    let noise = noise_model(fidelity)?;
    let mut result = Vec::with_capacity(schemes.len());
    for &scheme in schemes {
        result
            .push(curves::evaluate_curve(scheme, &ens, &noise, n_max).map_err(CliError::usage)?);
    }
    let text = match format {
        OutputFormat::Csv => curves::write_csv(&result),
        OutputFormat::Json => curves::write_json(&result),
    };
    emit(out, &text)
}

fn cmd_verify(
    grid: &str,
    tol: f64,
    trials: u64,
    seed: Option<u64>,
    workers: usize,
    out: &Path,
) -> Result<(), CliError> {
    let mut opts = verify::VerifyOptions::default();
    apply_grid(grid, &mut opts)?;
    opts.tol = tol;
    opts.mc_trials = trials;
    opts.seed = resolve_seed(seed, opts.seed)?;
    opts.workers = workers;
    let report = verify::run_report(&opts);
    print!("{}", report.summary());
    std::fs::write(out, report.to_json())
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", out.display())))?;
    if report.passed {
        Ok(())
    } else {
        Err(CliError::VerificationFailed)
    }
}

fn apply_grid(grid: &str, opts: &mut verify::VerifyOptions) -> Result<(), CliError> {
    if grid == "default" {
        return Ok(());
    }
    let text = std::fs::read_to_string(grid)
        .map_err(|e| CliError::Usage(format!("cannot read grid file {grid}: {e}")))?;
    let doc: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("grid file {grid} is not valid JSON: {e}")))?;
    let number_list = |value: &serde_json::Value, key: &str| -> Result<Vec<f64>, CliError> {
        value
            .as_array()
            .ok_or_else(|| CliError::Usage(format!("grid key `{key}` must be an array")))?
            .iter()
            .map(|item| match item {
                serde_json::Value::Number(x) => x
                    .as_f64()
                    .ok_or_else(|| CliError::Usage(format!("bad number in `{key}`"))),
                serde_json::Value::String(s) => parse_angle(s).map_err(CliError::Usage),
                other => Err(CliError::Usage(format!("bad entry {other} in `{key}`"))),
            })
            .collect()
    };
    if let Some(v) = doc.get("theta") {
        opts.thetas = number_list(v, "theta")?;
    }
    if let Some(v) = doc.get("fidelity") {
        opts.fidelities = number_list(v, "fidelity")?;
    }
    if let Some(v) = doc.get("n_max") {
        opts.n_max = v
            .as_u64()
            .filter(|n| *n >= 1)
            .ok_or_else(|| {
                CliError::Usage("grid key `n_max` must be a positive integer".into())
            })? as u32;
    }
    if opts.thetas.is_empty() || opts.fidelities.is_empty() {
        return Err(CliError::Usage(
            "grid must list at least one theta and fidelity".into(),
        ));
    }
    Ok(())
}

#[derive(Serialize)]
struct McOutput {
    scheme: Scheme,
    theta: f64,
    fidelity: f64,
    p0: f64,
    n_copies: u32,
    trials: u64,
    seed: u64,
    p_hat: f64,
    std_err: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    z: Option<f64>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_mc(
    scheme: Scheme,
    theta: f64,
    fidelity: f64,
    p0: f64,
    n_copies: u32,
    trials: u64,
    seed: Option<u64>,
    workers: usize,
    out: Option<&Path>,
) -> Result<(), CliError> {
    if n_copies == 0 {
        return Err(CliError::Usage("--n-copies must be at least 1".into()));
    }
    let plan = TrialPlan {
        scheme,
        ensemble: ensemble(theta, p0)?,
        noise: noise_model(fidelity)?,
        n_copies,
        trials,
        seed: resolve_seed(seed, 0)?,
        workers,
    };
    let est = sim::run(&plan).map_err(CliError::usage)?;
    let reference = sim::exact_reference(&plan);
    let z = reference.map(|r| sim::compare(&est, r, 3.0).z);
    let doc = McOutput {
        scheme,
        theta: plan.ensemble.theta(),
        fidelity: plan.noise.fidelity(),
        p0: plan.ensemble.prior0(),
        n_copies,
        trials,
        seed: plan.seed,
        p_hat: est.p_hat,
        std_err: est.std_err,
        reference,
        z,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("serialisable");
    text.push('\n');
    emit(out, &text)
}

fn cmd_plot(input: &Path, out: Option<&Path>, log_scale: bool) -> Result<(), CliError> {
    let text = std::fs::read_to_string(input)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", input.display())))?;
    let parsed = curves::parse_csv(&text).map_err(CliError::usage)?;
    let svg = plot::render_svg(&parsed, log_scale).map_err(CliError::usage)?;
    let target = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| input.with_extension("svg"));
    std::fs::write(&target, svg)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", target.display())))
}

fn cmd_limit(theta: f64, fidelity: f64) -> Result<(), CliError> {
    let noise = noise_model(fidelity)?;
    let value = adaptive::asymptotic_limit(theta, &noise).map_err(CliError::usage)?;
    println!("{value}");
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Curves {
            theta,
            fidelity,
            p0,
            n_max,
            schemes,
            out,
            format,
        } => cmd_curves(theta, fidelity, p0, n_max, &schemes, out.as_deref(), format),
        Command::Verify {
            grid,
            tol,
            trials,
            seed,
            workers,
            out,
        } => cmd_verify(&grid, tol, trials, seed, workers, &out),
        Command::Mc {
            scheme,
            theta,
            fidelity,
            p0,
            n_copies,
            trials,
            seed,
            workers,
            out,
        } => cmd_mc(
            scheme,
            theta,
            fidelity,
            p0,
            n_copies,
            trials,
            seed,
            workers,
            out.as_deref(),
        ),
        Command::Plot {
            input,
            out,
            log_scale,
        } => cmd_plot(&input, out.as_deref(), log_scale),
        Command::Limit { theta, fidelity } => cmd_limit(theta, fidelity),
    }
}

/// Run with explicit arguments; returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            EXIT_FAILURE
        }
        Err(CliError::VerificationFailed) => EXIT_FAILURE,
    }
}

/// Entry point for the `qdiscrim` binary.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}
