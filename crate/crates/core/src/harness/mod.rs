//! Monte Carlo experiments, CSV reporting and figure sweeps.

mod config;
mod run;

pub use config::{Coding, ExperimentConfig, Scheme};
pub use run::{
    compare, fixed_baseline, load_antenna, run_experiment, sweep, sweep_csv, watts_to_dbm, CompareReport,
    Experiment, ExperimentReport, Summary, SweepAxis, SweepRow, TrialResult, CSV_HEADER, MAX_FAILURE_RATE,
};
