//! Scenario loading, simulation assembly, reports.

mod config;
pub mod presets;
mod report;
mod run;

use thiserror::Error;

pub use config::{
    load_scenario, parse_scenario, LinkSpec, Mode, ScenarioConfig, ScheduledAction, DEFAULT_CONTROL_LATENCY_MS,
    DEFAULT_MAX_TIME_MS,
};
pub use report::{emit_comparison, emit_report, render_comparison, render_table, Report, StepTiming, REPORT_COUNTERS};
pub use run::{run_handover_scenario, run_mec_scenario, run_scenario, Outcome, Simulation};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid scenario at {location}: {message}")]
    Validation { location: String, message: String },
    #[error("scenario mode is {actual}, expected {expected}")]
    WrongMode { expected: &'static str, actual: Mode },
}
