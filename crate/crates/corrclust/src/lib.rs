//! File formats, JSON reports and the command line for `corrclust-core`.

pub mod cli;
pub mod error;
pub mod io;
pub mod report;

pub use error::{CliError, Result};
