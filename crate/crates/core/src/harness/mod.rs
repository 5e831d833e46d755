//! Experiment orchestration: sweep configuration, parallel replication,
//! aggregation and scaling fits.

mod config;
mod fit;
mod sweep;

pub use config::{ExperimentConfig, HarnessError, SeedSpec};
pub use fit::{fit_scaling, FitError, ScalingFit};
pub use sweep::{child_seed, run_sweep, splitmix64, HorizonSummary, RunRecord, Stat, SweepSummary};
