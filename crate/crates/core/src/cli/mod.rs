//! The `baelab` command line.
//!
//! Exit codes: 0 success (or a dominating design), 1 a non-dominating
//! design, 2 invalid input, 3 runtime failure.

mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use commands::{cmd_calibrate, cmd_check_dominance, cmd_exponent, cmd_simulate, cmd_sweep, Verdict};
pub use config::{Overrides, RunConfig, Source};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Config { path: String, message: String },
    #[error("invalid design: {0}")]
    Design(#[from] crate::design::DesignError),
    #[error(transparent)]
    Exponent(#[from] crate::exponent::ExponentError),
    #[error(transparent)]
    Simulation(#[from] crate::simulate::SimError),
    #[error(transparent)]
    Calibrate(#[from] crate::calibrate::CalibrateError),
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Design(_) | CliError::Exponent(_) | CliError::Calibrate(_) => {
                EXIT_INVALID
            }
            CliError::Simulation(_) | CliError::Write { .. } => EXIT_RUNTIME,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "baelab", version, about = "Batched arm elimination design analytics and simulation")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// JSON run configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed (overrides the configuration)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for Monte Carlo; never changes results
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file (stdout when absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            out: self.out.clone(),
            format: self.format,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exponent lower bound, CRT exponent and dominance margin for an instance
    Exponent,
    /// Check the weight-only sufficient condition for beating the CRT
    CheckDominance(DominanceArgs),
    /// Monte Carlo error and regret, one row per (design, T)
    Simulate,
    /// Simulate a T grid and fit empirical exponents per design
    Sweep,
    /// Fit zero-inflated lognormal arms from an `arm,outcome` CSV
    Calibrate {
        input: PathBuf,
    },
}

#[derive(Debug, Args, Default)]
pub struct DominanceArgs {
    /// Two-batch design, e.g. `--two-batch k=4 s=1 beta=0.7`
    #[arg(long, num_args = 1..)]
    pub two_batch: Option<Vec<String>>,
    /// Successive rejects, e.g. `--successive-rejects k=3`
    #[arg(long, num_args = 1..)]
    pub successive_rejects: Option<Vec<String>>,
    /// Completely randomized trial, e.g. `--crt k=4`
    #[arg(long, num_args = 1..)]
    pub crt: Option<Vec<String>>,
    /// Explicit weights (β_K, …, β_2) on the simplex, e.g. `--weights 0.7,0.3,0`
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub weights: Option<Vec<f64>>,
}

/// Parses `args` and runs the selected command, returning the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match dispatch(&cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn load_config(common: &CommonArgs) -> Result<RunConfig, CliError> {
    let path = common.config.as_ref().ok_or_else(|| CliError::Config {
        path: "--config".into(),
        message: "missing".into(),
    })?;
    RunConfig::from_file(path, &common.overrides())
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let common = &cli.common;
    match &cli.command {
        Command::Exponent => {
            let cfg = load_config(common)?;
            cmd_exponent(&cfg, stdout, stderr)?;
            Ok(EXIT_OK)
        }
        Command::CheckDominance(args) => {
            let design = commands::dominance_design(args, common)?;
            let verdict = cmd_check_dominance(&design, stdout)?;
            Ok(if verdict.dominates { EXIT_OK } else { EXIT_NEGATIVE })
        }
        Command::Simulate => {
            let cfg = load_config(common)?;
            cmd_simulate(&cfg, common.threads, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Sweep => {
            let cfg = load_config(common)?;
            cmd_sweep(&cfg, common.threads, stdout, stderr)?;
            Ok(EXIT_OK)
        }
        Command::Calibrate { input } => {
            cmd_calibrate(input, common.out.as_deref(), stdout)?;
            Ok(EXIT_OK)
        }
    }
}
