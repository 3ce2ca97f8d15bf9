//! Batch driver around `lgsim-core`: configuration, sweep orchestration,
//! dataset output and the acceptance checks behind the `check` verb.

pub mod acceptance;
pub mod config;
pub mod output;
pub mod runner;

pub use config::{ConfigError, RunConfig};
pub use runner::{RunError, ThetaResult};
