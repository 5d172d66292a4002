//! Scenario configuration, seeded Monte Carlo runs and reports.

pub mod config;
pub mod presets;
pub mod report;
mod run;
pub mod seeds;

pub use config::{ConfigError, FieldError, MessageSpec, ProfileSpec, ScenarioConfig};
pub use presets::{all_presets, preset, PRESET_NAMES};
pub use report::{emit_report, read_report, replay, ReplayOutcome, ReportError};
pub use run::{
    run_scenario, run_trial, Aggregates, RunError, RunSummary, ScenarioOutcome, TrialRecord,
    SUMMARY_SCHEMA,
};
