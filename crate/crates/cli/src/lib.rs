//! Command-line front end of the RIS control-plane simulator.
//!
//! `risctl goodput` sweeps goodput over frame lengths, `risctl reliability`
//! evaluates the control-reliability grid and `risctl validate` prints and
//! checks the frame timelines. Exit codes: 0 success, 2 configuration error,
//! 3 I/O error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub mod commands;
pub mod config;

pub use config::RunConfig;

use risctl_core::{ControlMode, Scheme};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn config(field: &str, message: impl Into<String>) -> Self {
        CliError::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Io(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "risctl",
    version,
    about = "RIS control-plane goodput and reliability simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Goodput vs. frame length for each scheme and control mode.
    Goodput(CommonArgs),
    /// Control reliability over the UE/RIS control-channel SNR grid.
    Reliability(CommonArgs),
    /// Build, print and check one frame timeline per scheme and mode.
    Validate(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Configuration file (`key = value`); keys override the defaults.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Monte Carlo trials per point.
    #[arg(long, value_name = "N")]
    pub trials: Option<usize>,
    #[arg(long, value_enum, default_value_t = ModeArg::Both)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = SchemeArg::All)]
    pub scheme: SchemeArg,
    /// Output CSV (default: stdout).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Frame lengths in ms, `START:STOP:STEP` or a single value.
    #[arg(long, value_name = "START:STOP:STEP")]
    pub frame_grid: Option<String>,
    /// Reliability target for the minimum-SNR summary.
    #[arg(long, value_name = "P")]
    pub threshold: Option<f64>,
    /// Worker threads for Monte Carlo trials (default: all cores).
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Ib,
    Ob,
    Both,
}

impl ModeArg {
    pub fn modes(self) -> Vec<ControlMode> {
        match self {
            ModeArg::Ib => vec![ControlMode::InBand],
            ModeArg::Ob => vec![ControlMode::OutOfBand],
            ModeArg::Both => ControlMode::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Oce,
    Bsw,
    BswEs,
    All,
}

impl SchemeArg {
    pub fn schemes(self) -> Vec<Scheme> {
        match self {
            SchemeArg::Oce => vec![Scheme::Oce],
            SchemeArg::Bsw => vec![Scheme::Bsw],
            SchemeArg::BswEs => vec![Scheme::BswEs],
            SchemeArg::All => Scheme::ALL.to_vec(),
        }
    }
}

impl CommonArgs {
    /// Loads the configuration and applies the command-line overrides.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.master_seed = seed;
        }
        if let Some(trials) = self.trials {
            cfg.n_trials = trials;
        }
        if let Some(grid) = &self.frame_grid {
            cfg.frame_grid = config::GridSpec::parse("frame_grid", grid)?;
        }
        if let Some(out) = &self.out {
            cfg.output_path = Some(out.clone());
        }
        if let Some(p) = self.threshold {
            if !(p > 0.0 && p < 1.0) {
                return Err(CliError::config(
                    "threshold",
                    format!("must lie in (0, 1), got {p}"),
                ));
            }
        }
        if self.threads == Some(0) {
            return Err(CliError::config("threads", "must be at least 1"));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code. Diagnostics go to `err`; CSV output without `--out` goes to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match commands::dispatch(&cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "risctl: {e}");
            e.exit_code()
        }
    }
}
