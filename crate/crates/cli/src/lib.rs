//! The `gbc` command line: geometry spec files, subcommands and the
//! acceptance suite.

pub mod commands;
pub mod config;
pub mod expr;
pub mod specfile;
pub mod suite;

pub use commands::{run, Check, CliError, Report, EXIT_INVALID, EXIT_OK, EXIT_TOLERANCE, EXIT_USAGE};
pub use config::{Cli, Command, RunConfig};
