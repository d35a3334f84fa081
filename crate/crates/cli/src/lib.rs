//! Library side of the `qamp` command-line tool: configuration, presets,
//! subcommands and file output.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod presets;

use std::path::PathBuf;

pub use config::{CommandKind, Format, Resolved, RunConfig};
pub use error::{CliError, CliResult};

/// Environment variable capping the worker threads used for sweeps.
pub const THREADS_ENV: &str = "QAMP_THREADS";

/// Resolves, runs and writes one configuration; returns the files written.
pub fn execute(config: RunConfig) -> CliResult<Vec<PathBuf>> {
    let resolved = config.resolve()?;
    let pool = thread_pool()?;
    let outcome = pool.install(|| commands::run(&resolved))?;
    let files = output::write(&resolved, &outcome)?;
    match outcome.failure {
        Some(e) => Err(e),
        None => Ok(files),
    }
}

fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::config(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::config(format!("thread pool: {e}")))
}
