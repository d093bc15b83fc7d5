//! Configuration and execution for the `optomech` command-line tool.

pub mod config;
pub mod run;

pub use config::{validate_config, ConfigError, Scenario, ScenarioConfig, ScenarioKind};
pub use run::{config_hash, run_scenario, RunError, RunOutcome};
