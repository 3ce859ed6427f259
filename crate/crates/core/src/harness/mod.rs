//! Experiment orchestration: configuration, campaign runners, slope
//! extraction and CSV reports.

pub mod config;
pub mod csv;
pub mod experiments;
pub mod slope;

pub use config::{parse_config, ConfigError, DriftConfig, Experiment, ExperimentConfig};
pub use experiments::{
    bias_ratio_verdict, run, run_bias_experiment, run_floor_experiment, run_margin_experiment,
    run_rate_experiment, run_tail_experiment, BiasOutcome, BiasReport, ExperimentOutcome,
    HarnessError, MarginReport, RateReport, RateRow, TailReport, TailRow, TailVerdict,
    SLOPE_WINDOW,
};
pub use slope::{fit_slope, SlopeError, SlopeFit};
