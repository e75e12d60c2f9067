//! File formats, charts and the command-line driver for `kexpm-core`.

pub mod error;
pub mod mtx;
pub mod run;
pub mod svg;
pub mod table;
pub mod vector;

pub use error::{exit, CliError, ParseError};
pub use run::{execute, Command, RunConfig};
