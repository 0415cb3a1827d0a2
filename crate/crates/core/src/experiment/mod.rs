//! Experiment harness: JSON configs in, CSV rows out.

pub mod config;
pub mod runner;

pub use config::{EpsilonRule, ExperimentConfig, Scenario, SyntheticSource};
pub use runner::{reference_pair, run_and_write, run_scenario, RunOutput, TightnessRecord, TrialRecord};
