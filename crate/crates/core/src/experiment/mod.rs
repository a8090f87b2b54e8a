//! Monte Carlo harness: sweep configuration, trial loops, aggregation and
//! CSV output.

pub mod output;
pub mod selftest;
pub mod spec;
pub mod stats;
pub mod sweep;

pub use output::{emit_csv, metadata_path, write_csv, CSV_HEADER};
pub use selftest::{random_instance, run_selftest, Check, Instance};
pub use spec::{CostId, ExperimentSpec, Scenario, SweepKind};
pub use stats::{moments, paired_mse_difference, Moments, TrialOutcome};
pub use sweep::{
    run_theta_sweep, run_theta_trials, run_z_sweep, run_z_trials, trial_seed, CellTrials, SweepResult, SweepRow,
};
