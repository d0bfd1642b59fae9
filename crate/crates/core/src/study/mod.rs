//! Error norms, convergence studies, parameter sweeps and CSV reports.

mod config;
mod norms;
mod report;

pub use config::{ConfigFile, StudyConfig, SweepConfig};
pub use norms::{convergence_rates, error_order, l2_error, rate, solution_errors, tip_displacement, ErrorNorms};
pub use report::{
    fill_rates, rate_or_nan, read_rows, run_gamma_sweep, run_gamma_sweep_file, run_study, run_study_config,
    write_atomic, write_rows, write_sweep, RateSummary, StudyReport, StudyRow, SweepRow, CSV_HEADER, LOCKING_RATE,
};
