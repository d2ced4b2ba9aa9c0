//! Reproducible scenario runs and parameter sweeps.
//!
//! A run is described by an [`ExperimentConfig`] (TOML). Every (axis point,
//! seed) cell builds one scenario and evaluates all requested feasible sets
//! and baselines on that same channel realization; cells run in parallel
//! and the output is independent of scheduling.

pub mod config;
pub mod emit;
pub mod error;
pub mod runner;

pub use config::{Baseline, ExperimentConfig, Kind, SetSpec, Sweep, SweepAxis};
pub use emit::emit_results;
pub use error::{HarnessError, Result};
pub use runner::{run_cell, run_scenario, run_sweep, summarize, ResultRecord, RunOutput, SummaryRow};
