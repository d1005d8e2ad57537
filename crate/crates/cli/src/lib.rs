//! Pipelines behind the `gqnfit` binary: simulate a study, build the basis,
//! calibrate, fit by exact posterior regression and compare runs.

pub mod commands;
pub mod config;
pub mod error;
pub mod panel_io;
pub mod pipeline;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
