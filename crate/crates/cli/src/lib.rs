//! Experiment runner for the `naimark` library: configuration, figure
//! commands, the verification suite and CSV/SVG/circuit outputs.

pub mod app;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod svg;
pub mod verify;

pub use config::{ExperimentConfig, Mode};
pub use error::CliError;
