//! Command-line front end: scenario files, dispatch to the experiment
//! campaigns, and result tables with a run manifest.

pub mod commands;
pub mod config;
pub mod manifest;

pub use commands::{execute, exit, CliError, Command, Invocation, Outcome};
pub use config::{resolve, CliLayers, ConfigError, ResolvedConfig};
pub use manifest::{RunManifest, RunStatus};
