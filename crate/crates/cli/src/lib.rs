//! Command-line front end: JSON run configs, figure presets, CSV output and
//! run manifests.

pub mod app;
pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod runner;

pub use config::{parse_config, RunConfig};
pub use error::CliError;
pub use presets::list_presets;
pub use runner::run;
