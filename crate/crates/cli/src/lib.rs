//! Configuration loading and the `bound`, `verify` and `sweep` commands.

pub mod commands;
pub mod config;
pub mod error;

pub use commands::{cmd_bound, cmd_sweep, cmd_verify, Format, SweepParam};
pub use config::{load_config, parse_config, NetworkConfig, Scenario};
pub use error::CliError;
