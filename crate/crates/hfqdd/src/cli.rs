//! Command-line interface.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::commands;
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::selftest::selftest;

#[derive(Debug, Clone, Parser)]
#[command(name = "hfqdd", version, about = "High-field Wigner-BGK / quantum drift-diffusion experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output CSV path.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for concurrent sweep cases (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed of the randomized checks in `selftest`.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Transport coefficients D, W, E on the x grid.
    Coeffs,
    /// Kernel moments and transport profiles against their closed forms.
    MomentsCheck,
    /// Quantum drift-diffusion run.
    QddRun,
    /// Kinetic (Wigner-BGK) reference run.
    KineticRun,
    /// Error sweep over eps_list with a log-log order fit.
    ConvergeSweep,
    /// Invariant suite on seeded random fields.
    Selftest,
}

fn required<'a>(value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    value.as_deref().ok_or_else(|| HarnessError::ConfigInvalid(format!("--{flag} <path> is required")))
}

/// Runs one subcommand and returns its summary line.
pub fn run(cli: &Cli) -> Result<String> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(HarnessError::ConfigInvalid("--threads must be at least 1".into()));
        }
    }
    if cli.command == Command::Selftest {
        let hash = match &cli.config {
            Some(path) => ExperimentConfig::load(path)?.hash(),
            None => "none".into(),
        };
        return selftest(cli.seed, &hash, cli.out.as_deref());
    }
    let config = ExperimentConfig::load(required(&cli.config, "config")?)?;
    let out = required(&cli.out, "out")?;
    match cli.command {
        Command::Coeffs => commands::coeffs(&config, out),
        Command::MomentsCheck => commands::moments_check(&config, out).map(|(s, _)| s),
        Command::QddRun => commands::qdd_run(&config, out).map(|(s, _)| s),
        Command::KineticRun => commands::kinetic_run(&config, out).map(|(s, _)| s),
        Command::ConvergeSweep => {
            let mut pool = rayon::ThreadPoolBuilder::new();
            if let Some(threads) = cli.threads {
                pool = pool.num_threads(threads);
            }
            let pool = pool.build().map_err(|e| HarnessError::ThreadPool(e.to_string()))?;
            pool.install(|| commands::converge_sweep(&config, out))
        }
        Command::Selftest => unreachable!("handled above"),
    }
}
