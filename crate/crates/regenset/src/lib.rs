//! Verification harness, file formats and experiment runner for
//! [`regenset_core`].

pub mod config;
pub mod error;
pub mod formats;
pub mod oracles;
pub mod plot;
pub mod runner;
pub mod verify;

pub use config::{ExperimentConfig, Suite};
pub use error::{RunError, RunResult};
