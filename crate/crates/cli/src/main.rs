use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod experiment;

const UNITS: &str =
    "Budgets (--b) are in bits. Conversion to nats happens only inside the lower-bound solver.";

#[derive(Debug, Parser)]
#[command(name = "dnpr", version, about = "Distributed nonparametric regression simulator", after_help = UNITS)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo risk of the protocol at one configuration.
    #[command(after_help = UNITS)]
    Estimate(EstimateArgs),
    /// Risk, lower and upper bounds along a geometric grid.
    #[command(after_help = UNITS)]
    Sweep(SweepArgs),
    /// Canonical slope check for one regime.
    #[command(after_help = UNITS)]
    Regime(RegimeArgs),
    /// Lower-bound solver and closed-form bound for one configuration.
    #[command(after_help = UNITS)]
    Bounds(BoundsArgs),
    /// Error-law check of the dithered quantizer.
    #[command(name = "quantizer-check", after_help = UNITS)]
    QuantizerCheck(QuantizerArgs),
    /// Run a JSON experiment file.
    #[command(after_help = UNITS)]
    Run(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Samples per machine.
    #[arg(long, value_parser = parse_count)]
    pub n: u64,
    /// Number of machines.
    #[arg(long, value_parser = parse_count)]
    pub m: u64,
    /// Per-machine budget in bits.
    #[arg(long, value_parser = parse_count)]
    pub b: u64,
    /// Smoothness.
    #[arg(long, default_value_t = 1)]
    pub alpha: u32,
    /// Function-space radius; the coefficient radius defaults to c / pi^alpha.
    #[arg(long, default_value_t = std::f64::consts::PI)]
    pub c: f64,
    /// Coefficient-space radius, overriding the default.
    #[arg(long)]
    pub c_tilde: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// spike:<i0>, poly:<kappa>:<rho> or prior:<regime>:<gamma>.
    #[arg(long)]
    pub theta: String,
    /// Stored length for deterministic sequences.
    #[arg(long)]
    pub length: Option<usize>,
    #[arg(long, default_value_t = 200)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Divide by the nominal replication k instead of the actual coverage.
    #[arg(long)]
    pub nominal_divisor: bool,
    /// Also write the messages of one round, run with --seed, to this file.
    #[arg(long)]
    pub transcript: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// n, m, b, mb (moves m), mn (moves n) or mnb (moves a scale s).
    #[arg(long)]
    pub axis: String,
    /// Number of geometric grid points.
    #[arg(long, default_value_t = 5)]
    pub points: usize,
    #[arg(long, value_parser = parse_count)]
    pub from: u64,
    #[arg(long, value_parser = parse_count)]
    pub to: u64,
    /// Held samples per machine (the base n0 along mnb).
    #[arg(long, value_parser = parse_count, default_value = "1000000")]
    pub n: u64,
    /// Held number of machines.
    #[arg(long, value_parser = parse_count, default_value = "8")]
    pub m: u64,
    /// Held per-machine budget in bits.
    #[arg(long, value_parser = parse_count, default_value = "64")]
    pub b: u64,
    #[arg(long, default_value_t = 1)]
    pub alpha: u32,
    #[arg(long, default_value_t = std::f64::consts::PI)]
    pub c: f64,
    #[arg(long)]
    pub c_tilde: Option<f64>,
    /// fixed (held b bits), per-value:<v> (b = v b0 bits) or cover:<factor>.
    #[arg(long, default_value = "fixed")]
    pub budget: String,
    /// spike:<i0>, poly:<kappa>:<rho>, or prior:<regime|matched>:<gamma>.
    #[arg(long, default_value = "poly:0.5:0.9")]
    pub theta: String,
    #[arg(long, default_value_t = 200)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Lower-bound prior constant.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct RegimeArgs {
    /// insufficient, intermediate or sufficient.
    #[arg(long)]
    pub which: String,
    #[arg(long, default_value_t = 1)]
    pub alpha: u32,
    #[arg(long, default_value_t = 200)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Where to write the sweep table; the verdict always goes to stdout.
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct QuantizerArgs {
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub clamp: f64,
    #[arg(long, value_parser = parse_count, default_value = "100000")]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Experiment file (JSON).
    pub file: PathBuf,
}

/// Accepts plain integers, `_` separators and exact scientific forms like `1e6`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    let clean = s.replace('_', "");
    if let Ok(v) = clean.parse::<u64>() {
        return Ok(v);
    }
    if let Some((mant, exp)) = clean.split_once(['e', 'E']) {
        let mant: u64 = mant.parse().map_err(|_| format!("not a count: {s}"))?;
        let exp: u32 = exp.parse().map_err(|_| format!("not a count: {s}"))?;
        return 10u64
            .checked_pow(exp)
            .and_then(|p| p.checked_mul(mant))
            .ok_or_else(|| format!("{s} overflows u64"));
    }
    Err(format!("not a count: {s}"))
}

/// Whether an acceptance-style check passed.
pub enum Outcome {
    Pass,
    Fail,
}

fn configure_workers() -> Result<()> {
    if let Ok(raw) = std::env::var("DNPR_WORKERS") {
        let n: usize = raw
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .with_context(|| format!("DNPR_WORKERS must be a positive integer, got {raw:?}"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker pool")?;
    }
    Ok(())
}

pub fn dispatch(command: Command) -> Result<Outcome> {
    match command {
        Command::Estimate(a) => commands::estimate(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Regime(a) => commands::regime(a),
        Command::Bounds(a) => commands::bounds(a),
        Command::QuantizerCheck(a) => commands::quantizer_check(a),
        Command::Run(a) => {
            let inner = experiment::load(&a.file)?;
            if matches!(inner, Command::Run(_)) {
                bail!("experiment files cannot nest run");
            }
            dispatch(inner)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = configure_workers() {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    match dispatch(cli.command) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
