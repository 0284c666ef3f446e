//! Command-line front end for `pulsenet-core`: JSON configs, CSV traces and
//! the `gen | check | simulate | analyze | verify | sweep` commands.

pub mod commands;
pub mod config;
pub mod error;
pub mod trace_io;

pub use commands::{run, Cli};
pub use config::{ConfigFile, CONFIG_SCHEMA, CONFIG_VERSION};
pub use error::CliError;
