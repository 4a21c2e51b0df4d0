//! Batch front end: reads a TOML configuration, runs one experiment and
//! writes comma-separated tables plus `summary.json` into the output
//! directory.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::json;
use smallscat::ErrorClass;

pub use output::OutDir;

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_REGIME: u8 = 3;
pub const EXIT_NUMERICAL: u8 = 4;
/// Design run where only some cells are realisable; outputs are written.
pub const EXIT_PARTIAL: u8 = 5;
/// Output files could not be written.
pub const EXIT_IO: u8 = 1;

#[derive(Debug, Parser)]
#[command(name = "smallscat", version, about = "Electromagnetic scattering by many small particles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Configuration file (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output directory, created if missing.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,

    /// Worker threads; 0 picks the number of cores.
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    pub threads: usize,

    /// Asserts that the run uses no randomness. Always satisfied.
    #[arg(long, global = true)]
    pub seedless: bool,
}

#[derive(Debug, Clone, Copy, Subcommand, PartialEq, Eq)]
pub enum Command {
    /// Shape constants and the half-identity check over mesh refinements.
    Shape,
    /// Boundary-integral moments against the closed form over a size sweep.
    BieValidate,
    /// Solves a particle cloud and writes fields and far-field amplitudes.
    Scatter,
    /// Solves the limiting equation and compares it with particle clouds.
    Homogenize,
    /// Designs the impedance profile for a target medium.
    Design,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Shape => "shape",
            Command::BieValidate => "bie-validate",
            Command::Scatter => "scatter",
            Command::Homogenize => "homogenize",
            Command::Design => "design",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] smallscat::Error),
    #[error("cannot read config {path}: {source}")]
    ReadConfig { path: String, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e.class() {
                ErrorClass::Config => EXIT_CONFIG,
                ErrorClass::Regime => EXIT_REGIME,
                ErrorClass::Numerical => EXIT_NUMERICAL,
            },
            CliError::ReadConfig { .. } | CliError::Parse(_) | CliError::Invalid(_) => EXIT_CONFIG,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

/// What a command reports back besides the files it wrote.
#[derive(Debug)]
pub struct CommandOutput {
    pub metrics: serde_json::Value,
    /// Set when the run succeeded only in part.
    pub partial: Option<String>,
}

impl CommandOutput {
    pub fn complete(metrics: serde_json::Value) -> Self {
        Self { metrics, partial: None }
    }
}

/// Runs the selected command and returns the process exit status. A
/// `summary.json` is written whenever the output directory is usable.
pub fn run(cli: &Cli) -> u8 {
    let Some(config) = cli.config.as_deref() else {
        eprintln!("error: --config PATH is required");
        return EXIT_CONFIG;
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start {} worker threads: {e}", cli.threads);
            return EXIT_CONFIG;
        }
    };
    let mut out = match OutDir::create(&cli.out) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let result = pool.install(|| match cli.command {
        Command::Shape => commands::shape::run(config, &mut out),
        Command::BieValidate => commands::bie::run(config, &mut out),
        Command::Scatter => commands::scatter::run(config, &mut out),
        Command::Homogenize => commands::homogenize::run(config, &mut out),
        Command::Design => commands::design::run(config, &mut out),
    });
    let (status, code, message, metrics) = match result {
        Ok(CommandOutput { metrics, partial: Some(msg) }) => ("partial", EXIT_PARTIAL, Some(msg), metrics),
        Ok(CommandOutput { metrics, partial: None }) => ("ok", EXIT_OK, None, metrics),
        Err(e) => ("error", e.exit_code(), Some(e.to_string()), serde_json::Value::Null),
    };
    if let Some(msg) = &message {
        eprintln!("{}: {msg}", if code == EXIT_PARTIAL { "warning" } else { "error" });
    }
    let summary = json!({
        "command": cli.command.name(),
        "status": status,
        "exit_code": code,
        "message": message,
        "seedless": true,
        "metrics": metrics,
        "files": out.files(),
    });
    if let Err(e) = out.write_summary(&summary) {
        eprintln!("error: {e}");
        return if code == EXIT_OK { EXIT_IO } else { code };
    }
    code
}
