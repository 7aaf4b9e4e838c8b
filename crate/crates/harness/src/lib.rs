//! Evaluation harness: GOD metric, dataset I/O, configuration and the
//! experiment runners behind the `vistac` CLI.

pub mod config;
pub mod dataset_io;
pub mod detection;
pub mod error;
pub mod experiments;
pub mod god;
pub mod report;
pub mod thresholds;

pub use config::HarnessConfig;
pub use error::{HarnessError, Result};
pub use experiments::{run_experiment, run_experiment_with};
pub use report::{ExperimentId, ExperimentReport};
