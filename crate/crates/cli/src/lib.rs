//! Batch front end: reads a JSON run configuration, runs one computation
//! and renders the result as JSON or CSV.

pub mod config;
pub mod presets;
mod run;

pub use config::{parse_config, ConfigError, Resolved, RunConfig, Settings, SubcommandParams};
pub use run::{run, Command, Outcome, OutputFormat, EXIT_BAD_INPUT, EXIT_FAILED_CHECK, EXIT_NUMERICAL, EXIT_OK};
