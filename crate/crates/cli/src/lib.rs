//! Experiment runner for the `nmpk` toolkit: structural analysis, operator
//! identification, tracking, model-based comparison and parameter sweeps.

pub mod commands;
pub mod config;
pub mod experiment;
pub mod plot;
pub mod report;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use config::ExperimentConfig;
pub use experiment::Experiment;
pub use report::RunReport;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] nmpk::Error),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 2 validation, 3 plant assumption violated, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        use nmpk::Error as E;
        match self {
            CliError::Validation(_) | CliError::Io { .. } => 2,
            CliError::Core(e) if e.is_assumption_violation() => 3,
            CliError::Core(e) => match root(e) {
                E::TransformationFailure(_) => 3,
                E::NumericalFailure(_) | E::Divergence { .. } => 4,
                _ => 2,
            },
        }
    }
}

fn root(e: &nmpk::Error) -> &nmpk::Error {
    match e {
        nmpk::Error::Row { source, .. } | nmpk::Error::Trial { source, .. } => root(source),
        other => other,
    }
}

#[derive(Debug, Parser)]
#[command(name = "nmpk", version, about = "Feedforward tracking experiments for non-minimum-phase plants")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment configuration (TOML).
    #[arg(long, global = true, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Built-in configuration instead of --config.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (default: config `output_dir`, else `nmpk-out`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Relative degree, gain, zeros, poles and phase class of the plant.
    Analyze,
    /// Collects the output matrix and solves for the operator coefficients.
    Identify,
    /// Simulates the identified operator on the plant.
    Track {
        /// Coefficient file from `identify`; identified on the fly when omitted.
        #[arg(long)]
        k_file: Option<PathBuf>,
    },
    /// Compares the model-based stable inverse with the identified operator.
    Oracle {
        #[arg(long)]
        k_file: Option<PathBuf>,
    },
    /// Repeats identify + track over the configured sweep axis.
    Sweep,
}

impl Cli {
    pub fn load_config(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => ExperimentConfig::load(path)?,
            (None, Some(name)) => ExperimentConfig::preset(name)?,
            (None, None) => return Err(CliError::Validation("either --config or --preset is required".into())),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }

    pub fn output_dir(&self, cfg: &ExperimentConfig) -> PathBuf {
        self.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("nmpk-out"))
    }
}

/// Executes a parsed command line. A sweep with failed points still writes its
/// outputs; the first failure is returned alongside the report.
pub fn run(cli: &Cli) -> Result<(RunReport, Option<CliError>), CliError> {
    let cfg = cli.load_config()?;
    let out = cli.output_dir(&cfg);
    match &cli.command {
        Command::Analyze => commands::analyze(&cfg, &out).map(|r| (r, None)),
        Command::Identify => commands::identify(&cfg, &out).map(|r| (r, None)),
        Command::Track { k_file } => commands::track(&cfg, k_file.as_deref(), &out).map(|r| (r, None)),
        Command::Oracle { k_file } => commands::oracle(&cfg, k_file.as_deref(), &out).map(|r| (r, None)),
        Command::Sweep => commands::sweep(&cfg, &out),
    }
}
