//! Batch front end: reads games and models, runs the oracle, the
//! certifiers and the diffusion pipeline, and writes JSON and CSV artifacts.

use std::path::{Path, PathBuf};

use asymdynkin_core::Error;
use thiserror::Error;

pub mod args;
pub mod commands;
pub mod io;

pub use args::{Cli, Command, DynamicsArgs, DynamicsStep};
pub use commands::{cmd_dynamics, cmd_oracle, cmd_verify, run, Outcome};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "ASYMDYNKIN_THREADS";

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const REJECTED: i32 = 1;
    pub const INPUT: i32 = 2;
    pub const CAP: i32 = 3;
    pub const NO_CONVERGENCE: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{path}: field `{field}`: {message}")]
    Json { path: PathBuf, field: String, message: String },

    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("field `{field}`: {source}")]
    Field { field: String, source: Error },

    #[error("{path}: {source}")]
    InFile { path: PathBuf, source: Box<CliError> },

    #[error(transparent)]
    Core(#[from] Error),

    #[error("{0}")]
    Input(String),
}

impl CliError {
    pub fn field(field: &str, source: Error) -> Self {
        CliError::Field { field: field.to_string(), source }
    }

    pub fn in_file(self, path: &Path) -> Self {
        CliError::InFile { path: path.to_path_buf(), source: Box::new(self) }
    }

    fn core(&self) -> Option<&Error> {
        match self {
            CliError::Core(e) | CliError::Field { source: e, .. } => Some(e),
            CliError::InFile { source, .. } => source.core(),
            _ => None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.core() {
            Some(Error::EnumerationCapExceeded { .. }) => exit::CAP,
            Some(Error::NoConvergence { .. }) => exit::NO_CONVERGENCE,
            _ => exit::INPUT,
        }
    }
}

/// Applies the thread cap from [`THREADS_ENV`] to the global pool.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("{THREADS_ENV}={raw:?} is not a positive integer")))?;
    // a pool that already exists keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
