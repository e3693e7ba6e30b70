//! Library side of the `netbell` command-line tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod reference;
pub mod simulate;

pub use config::ExperimentConfig;
pub use error::CliError;
pub use simulate::{simulate, RunReport};
