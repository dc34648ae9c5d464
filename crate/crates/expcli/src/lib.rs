//! Experiment runner for the RZF beamforming library: declarative sweep
//! configs, ε grid search, online comparisons and CSV output.

pub mod checks;
pub mod config;
pub mod experiment;
pub mod output;

pub use config::ExperimentConfig;
pub use experiment::{run_sweep, SweepResult};
