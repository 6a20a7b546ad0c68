//! Command-line front end: flat `key = value` configuration, one subcommand
//! per output, deterministic CSV/JSON.

mod commands;
mod config;
mod format;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use commands::{analyze, limit_cycle_report, oracle_check, simulate, sweep, OracleReport};
pub use config::{RunConfig, Units, THREADS_ENV};
pub use format::{sig, sig12};

use crate::error::OttoError;

#[derive(Debug, Parser)]
#[command(name = "otto", version, about = "Quantum harmonic Otto engine simulator")]
pub struct Cli {
    /// Optional only together with `--explain`.
    #[command(subcommand)]
    pub command: Option<Command>,

    /// Configuration file of `key = value` lines.
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,

    /// Override one key, e.g. `--set tau_h=8`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,

    /// Print the effective configuration (all keys) and exit.
    #[arg(long, global = true)]
    pub explain: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Trajectory CSV of one limit-cycle period.
    Simulate,
    /// Limit-cycle report (JSON).
    LimitCycle,
    /// Random time-allocation sweep (CSV).
    Sweep,
    /// Closed-form quantities (JSON).
    Analyze,
    /// Cross-check the limit cycle against the Fock-space oracle.
    OracleCheck,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Solver(OttoError),
    #[error("oracle check failed")]
    OracleMismatch,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Solver(_) => 3,
            Self::OracleMismatch => 4,
        }
    }
}

impl From<OttoError> for CliError {
    fn from(e: OttoError) -> Self {
        match e {
            OttoError::Config(msg) => Self::Config(msg),
            other => Self::Solver(other),
        }
    }
}

/// Effective configuration: defaults, then the file, then overrides.
pub fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    for kv in &cli.overrides {
        cfg.apply_override(kv)?;
    }
    Ok(cfg)
}

fn emit(cfg: &RunConfig, body: &str) -> Result<(), CliError> {
    match &cfg.output {
        Some(path) => std::fs::write(path, body).map_err(|e| CliError::Config(format!("cannot write {path}: {e}"))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Config(format!("cannot write to stdout: {e}")))
        }
    }
}

fn json_text(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load_config(cli)?;
    if cli.explain {
        print!("{}", cfg.explain());
        return Ok(());
    }
    let Some(command) = cli.command else {
        return Err(CliError::Config(
            "a subcommand is required: simulate, limit-cycle, sweep, analyze or oracle-check".into(),
        ));
    };
    match command {
        Command::Simulate => emit(&cfg, &simulate(&cfg)?),
        Command::LimitCycle => emit(&cfg, &json_text(&limit_cycle_report(&cfg)?)),
        Command::Sweep => emit(&cfg, &sweep(&cfg)?),
        Command::Analyze => emit(&cfg, &json_text(&analyze(&cfg)?)),
        Command::OracleCheck => {
            let report = oracle_check(&cfg)?;
            emit(&cfg, &report.text)?;
            if report.passed {
                Ok(())
            } else {
                Err(CliError::OracleMismatch)
            }
        }
    }
}

/// Parses `args`, runs the command and maps the outcome to an exit code.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("otto: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
