//! Scenario runner for the `nmflow` binary: configuration, pipelines,
//! sweeps and data-file emission.

pub mod app;
pub mod commands;
pub mod config;
pub mod output;
pub mod scenario;
pub mod sweep;

pub use commands::{CliError, ExitCode};
pub use config::{ConfigError, ScenarioConfig};
