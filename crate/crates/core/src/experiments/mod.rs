//! Configuration-driven experiments with JSON reports and CSV tables.

pub mod acceleration;
pub mod common;
pub mod config;
pub mod csv_io;
pub mod kappa_scaling;
pub mod position_law;
pub mod report;
pub mod runner;
pub mod tau;
pub mod time_in_traps;
pub mod trap_tails;

pub use common::ExperimentOutput;
pub use config::{ExperimentConfig, Thresholds, EXPERIMENTS, MIN_HORIZON};
pub use report::{Check, Estimate, ExperimentReport, Status, SCHEMA_VERSION};
pub use runner::{dispatch, run_config, run_experiment, write_output};
