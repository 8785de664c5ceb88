//! Config-driven experiments on top of `opsplit`: TOML configs, a rayon
//! harness, CSV reports and the `opsplit` command-line tool.

pub mod cli;
pub mod config;
pub mod expr;
pub mod harness;
pub mod report;
pub mod runner;

pub use config::{ConfigError, ExperimentConfig, Study};
pub use runner::{run, Outcome, RunError};
