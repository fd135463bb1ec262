//! Command-line driver for `thermovisc-core`: TOML configuration, symbolic
//! data, mesh files, VTK and CSV output, and the study subcommands.

pub mod commands;
pub mod config;
pub mod error;
pub mod expr;
pub mod mesh_io;
pub mod output;
pub mod vtk;

pub use config::{parse_config, parse_str, RunConfig};
pub use error::{CliError, ConfigError};
