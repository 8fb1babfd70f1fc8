//! Scenario files, experiment specs, training and evaluation runs, and
//! result summaries.

pub mod eval;
pub mod experiment;
pub mod map;
pub mod policy;
pub mod pool;
pub mod report;
pub mod scenario;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::a2c::A2cError;
use crate::neuroevo::NeuroError;
use crate::reward::RewardError;
use crate::sim::SimError;
use scenario::ScenarioError;

/// Environment variable that fixes the number of worker threads.
pub const WORKERS_ENV: &str = "SWARM_TACTICS_WORKERS";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Neuro(#[from] NeuroError),
    #[error(transparent)]
    A2c(#[from] A2cError),
    #[error(transparent)]
    Reward(#[from] RewardError),
}

pub(crate) fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.to_path_buf(), source }
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    std::fs::write(path, contents).map_err(io_error(path))
}

/// Worker count requested through [`WORKERS_ENV`], if any.
pub fn requested_workers() -> Result<Option<usize>, HarnessError> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(HarnessError::Invalid(format!("{WORKERS_ENV} must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(None),
    }
}

/// Run `f` on a dedicated pool when a worker count is requested, otherwise
/// on the global pool.
pub fn with_workers<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T, HarnessError> {
    match requested_workers()? {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| HarnessError::Invalid(format!("worker pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}
