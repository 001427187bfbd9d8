//! Command-line front end for the delayed linear dividend model.
//!
//! Each subcommand resolves an [`ExperimentConfig`] from a named preset, an
//! optional `key = value` config file and command-line flags (in increasing
//! priority), runs, and writes CSV or JSON to `--out` or stdout.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{ConfigFile, Experiment, ExperimentConfig, Format, Overrides};
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "dcl", version, about = "Delayed linear dividend strategies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Config file with `key = value` lines and optional per-command sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub flags: Overrides,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Value at x0 as a function of the barrier b.
    ValueCurve,
    /// Value at x0 over a grid of barriers and K, with the optimal ridge.
    ValueSurface,
    /// Optimal barrier as a function of K.
    BarrierCurve,
    /// Closed-form, HJB and Monte Carlo checks for one barrier.
    Verify,
    /// Monte Carlo estimate of a path functional against its closed form.
    Simulate,
}

impl Command {
    pub fn experiment(self) -> Experiment {
        match self {
            Command::ValueCurve => Experiment::ValueCurve,
            Command::ValueSurface => Experiment::ValueSurface,
            Command::BarrierCurve => Experiment::BarrierCurve,
            Command::Verify => Experiment::Verify,
            Command::Simulate => Experiment::Simulate,
        }
    }
}

/// Layers the config file (if any) under the flags and resolves.
pub fn resolve(cli: Cli) -> CliResult<ExperimentConfig> {
    let exp = cli.command.experiment();
    let base = match &cli.config {
        Some(path) => ConfigFile::load(path)?.for_experiment(exp),
        None => Overrides::default(),
    };
    ExperimentConfig::resolve(exp, base.merge(cli.flags))
}

/// Runs a resolved experiment and returns the text to write.
/// A `verify` whose checks fail still yields its report, paired with
/// [`CliError::ChecksFailed`].
pub fn render(cfg: &ExperimentConfig) -> CliResult<(String, Option<CliError>)> {
    let text = match cfg.experiment {
        Experiment::ValueCurve | Experiment::ValueSurface | Experiment::BarrierCurve => {
            let table = match cfg.experiment {
                Experiment::ValueCurve => commands::value_curve(cfg)?,
                Experiment::ValueSurface => commands::value_surface(cfg)?,
                _ => commands::barrier_curve(cfg)?,
            };
            match cfg.format {
                Format::Csv => table.to_csv(cfg),
                Format::Json => table.to_json(cfg)?,
            }
        }
        Experiment::Verify => {
            let report = commands::verify(cfg)?;
            let failures = report.failures();
            let text = output::to_json(&report)?;
            let failed = (failures > 0).then_some(CliError::ChecksFailed(failures));
            return Ok((text, failed));
        }
        Experiment::Simulate => output::to_json(&commands::simulate(cfg)?)?,
    };
    Ok((text, None))
}

pub fn run(cli: Cli) -> CliResult<()> {
    let cfg = resolve(cli)?;
    let (text, failed) = render(&cfg)?;
    output::emit(&text, cfg.out.as_deref())?;
    failed.map_or(Ok(()), Err)
}

/// Caps the worker pool at `DCL_THREADS` when it is set.
pub fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("DCL_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
        CliError::Validation(format!(
            "DCL_THREADS must be a positive integer, got '{raw}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Validation(format!("cannot size the worker pool: {e}")))
}
