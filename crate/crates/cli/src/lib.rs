//! Reproducible experiment runner: TOML configs in, CSV and JSON profiles out.

pub mod config;
pub mod plot;
pub mod runner;

use std::fmt;

pub use config::ExperimentConfig;
pub use runner::{compare, execute, LogBase, RunOptions, RunOutput};

/// Malformed config or input.
pub const EXIT_CONFIG: i32 = 2;
/// A capacity limit was hit.
pub const EXIT_CAPACITY: i32 = 3;
/// An internal postcondition failed.
pub const EXIT_POSTCONDITION: i32 = 4;
/// Filesystem trouble.
pub const EXIT_IO: i32 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: String) -> CliError {
        CliError { code: EXIT_CONFIG, message }
    }

    pub fn io(message: String) -> CliError {
        CliError { code: EXIT_IO, message }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<ergopart::Error> for CliError {
    fn from(e: ergopart::Error) -> CliError {
        use ergopart::Error as E;
        match e {
            E::Capacity(_) => CliError {
                code: EXIT_CAPACITY,
                message: format!(
                    "{e}\nhint: use smaller windows, switch solver.table to \"samples\", or use the greedy cover solver"
                ),
            },
            E::Postcondition(_) => CliError { code: EXIT_POSTCONDITION, message: e.to_string() },
            _ => CliError { code: EXIT_CONFIG, message: e.to_string() },
        }
    }
}
