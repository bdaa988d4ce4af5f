//! Experiment runner: configuration, parallel ensembles and tabular output.

pub mod config;
pub mod ensemble;
pub mod error;
pub mod experiments;
pub mod output;
pub mod report;

pub use config::{ExperimentConfig, ExperimentKind, Overrides};
pub use error::{RunError, RunResult};
pub use fgsim_core;
