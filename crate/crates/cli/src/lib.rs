//! Files, configuration and benchmark harness around `efmrf-core`.

pub mod bench;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod manifest;
pub mod scenario;

pub use config::Config;
pub use error::CliError;
pub use scenario::Scenario;
