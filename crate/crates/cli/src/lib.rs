//! Configuration, orchestration and file output for the `lgatom` command.

pub mod config;
pub mod error;
pub mod output;
pub mod scenario;

pub use config::{load_config, parse_config, LoadedConfig, ScenarioConfig};
pub use error::{CliError, CliResult};
