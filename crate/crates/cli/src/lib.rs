//! Data ingestion, chain persistence, report emission, and the command-line
//! entry points for the consensus-analysis library.

pub mod chain_file;
pub mod cli;
pub mod commands;
pub mod csv_io;
pub mod error;
pub mod outputs;

pub use error::{CliError, CliResult};
