//! Scenario runner for `legendre-core`: TOML scenarios in, CSV and JSON reports out.

pub mod commands;
pub mod config;
pub mod report;

pub use commands::{CliError, Context};
pub use config::ScenarioConfig;
