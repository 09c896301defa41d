//! Monte Carlo replication of the average- versus last-iterate percentile experiments.

pub mod config;
pub mod output;
pub mod run;
pub mod signatures;

pub use config::{ExperimentConfig, FixedEtaRule, Format, Mode, NoiseEntry};
pub use output::{emit_results, read_csv, render, rows_to_csv, CSV_HEADER};
pub use run::{aggregate, anytime_experiment, fixed_horizon_experiment, run_experiment, IterateKind, QuantileSummary};
pub use signatures::{check_signatures, loglog_slope, SignatureCheck};
