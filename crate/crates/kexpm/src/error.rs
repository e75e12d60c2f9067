use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const OTHER: i32 = 1;
    pub const INPUT: i32 = 2;
    pub const NONCONVERGENCE: i32 = 3;
}

/// A parse failure tied to a line of an input file.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError { line, message: message.into() }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),

    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },

    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },

    #[error("no convergence within {k} steps (estimate {estimate:e})")]
    NonConvergence { k: usize, estimate: f64 },

    #[error(transparent)]
    Core(#[from] kexpm_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use kexpm_core::Error as E;
        match self {
            CliError::Input(_) | CliError::Parse { .. } | CliError::Read { .. } => exit::INPUT,
            CliError::NonConvergence { .. } => exit::NONCONVERGENCE,
            CliError::Core(E::Domain { .. } | E::DimensionMismatch { .. } | E::ZeroVector | E::Invalid(_)) => {
                exit::INPUT
            }
            CliError::Core(E::ModeMismatch | E::DegenerateBox { .. }) => exit::INPUT,
            CliError::Write { .. } | CliError::Core(_) => exit::OTHER,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
