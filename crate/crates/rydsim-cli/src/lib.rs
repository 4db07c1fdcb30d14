//! Configuration, orchestration and output for the `rydsim` command.

pub mod config;
pub mod output;
pub mod run;
pub mod snapshot;

pub use config::{parse_config, Command, ConfigError, RunConfig};
pub use output::RunManifest;
pub use run::{run, verify, CliError, VerifyOutcome};
