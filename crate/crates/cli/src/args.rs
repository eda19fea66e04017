use std::path::PathBuf;

use asymdynkin_core::dynamics::GridSize;
use asymdynkin_core::oracle::DEFAULT_CAP;
use asymdynkin_core::scenario::DEFAULT_TOL;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Parser)]
#[command(name = "asymdynkin", version, about = "Stopping games with a hidden regime")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Solve a scenario game exactly and write its equilibrium.
    Oracle {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Largest number of pure stopping rules to enumerate.
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Check an equilibrium of a scenario game and write the reports.
    Verify {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        equilibrium: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Filtered diffusion model: paths, value surfaces, strategies, checks.
    Dynamics(DynamicsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DynamicsStep {
    Simulate,
    Pde,
    Extract,
    Verify,
}

#[derive(Debug, Clone, Args)]
pub struct DynamicsArgs {
    pub step: DynamicsStep,
    #[arg(long)]
    pub model: PathBuf,
    /// Grid size as `NTxNPIxNX`.
    #[arg(long, default_value = "101x21x101")]
    pub grid: GridSize,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 1000)]
    pub paths: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Reuse surfaces written by `pde` instead of solving again.
    #[arg(long)]
    pub surfaces: Option<PathBuf>,
    /// `simulate`: draw the regime and compute the posterior by Bayes' rule.
    #[arg(long)]
    pub regime: bool,
    /// `simulate`: keep every k-th step in the path dump.
    #[arg(long, default_value_t = 1)]
    pub every: usize,
    /// `verify`: allowed fraction of obstacle violations.
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    /// `verify`: discretization slack of the statistical checks.
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
}
