//! Multi-attempt experiments, summary statistics and report files.

mod config;
mod report;
mod run;

pub use config::{
    load_config, published_boundary, sampled_boundary, ExperimentConfig, Method, EVQKAN_BOUNDARY, QNN_BOUNDARY,
    TRANSPOSED_BOUNDARY,
};
pub use report::{emit_reports, regenerate_report, run_directory, write_sweep_csv, AttemptSummary, Summary};
pub use run::{layer_sweep, run_attempt, run_experiment, summarize, Model, RunRecord, SummaryStats, SweepRow};
