//! Configuration, dispatch and serialization behind the `alh` binary.

pub mod bundle;
pub mod commands;
pub mod config;
pub mod verify;

use alh_core::AlhError;
use thiserror::Error;

pub use bundle::{emit_plotdata, Check, ResultBundle, Table};
pub use commands::run;
pub use config::{Command, RunConfig};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "ALH_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] AlhError),
    #[error("missing plot data: {0}")]
    MissingData(String),
    #[error("i/o error: {0}")]
    Io(String),
}

/// Process exit status for each outcome.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const CHECK_FAILED: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const SOLVER: i32 = 3;
}

impl CliError {
    /// Bad parameters reaching the core count as configuration errors;
    /// everything else the core reports is a solver failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) | CliError::MissingData(_) => exit::CONFIG,
            CliError::Core(e) => match e {
                AlhError::Parameter(_)
                | AlhError::Domain(_)
                | AlhError::Dimension { .. }
                | AlhError::Feature(_)
                | AlhError::Spec(_) => {
                    exit::CONFIG
                }
                _ => exit::SOLVER,
            },
        }
    }
}

/// Sizes the global rayon pool from [`THREADS_ENV`] when it is set.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV}={v:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("{THREADS_ENV}: {e}")))
}
