//! Configuration, file formats and subcommands of the `qbm-sbs` tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{run, Command};
pub use config::{Overrides, RunConfig};
pub use error::CliError;
