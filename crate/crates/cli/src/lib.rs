//! Command-line experiments for coded caching: TOML run configurations,
//! parallel trial execution, CSV/JSON output, graph and cache dumps, and
//! reference oracles for the `verify` command.

#![forbid(unsafe_code)]

pub mod commands;
pub mod config;
pub mod dump;
mod error;
pub mod exec;
pub mod oracle;
pub mod output;
pub mod verify;

pub use error::CliError;
