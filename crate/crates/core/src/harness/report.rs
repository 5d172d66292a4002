//! Report files.
//!
//! A report is a TOML document with the top-level keys in [`REPORT_KEYS`]:
//! `schema`, the full `config`, the `aggregates` table (keys in
//! [`AGGREGATE_KEYS`]) and one `[[trials]]` table per trial. Next to it, a
//! `<stem>.transcripts.jsonl` file holds every transcript entry, one JSON
//! object per line with fields `trial, seq, sender, kind, bits, payload`.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::run::{run_scenario, RunError, RunSummary, ScenarioOutcome, SUMMARY_SCHEMA};
use crate::protocols::transcript::entry_line;
use crate::protocols::Transcript;

pub const REPORT_KEYS: &[&str] = &["schema", "config", "aggregates", "trials"];

pub const AGGREGATE_KEYS: &[&str] = &[
    "trials",
    "mean_error_rate",
    "abort_fraction",
    "decode_accuracy",
    "detection_rate",
    "detection_rate_zd",
    "detection_rate_xd",
    "checked",
    "eta_q",
    "eta_t",
    "eta_t_photon_count",
    "loss_rate",
    "eve_accuracy",
    "eve_guessed",
];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Parse {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("{}: unsupported report schema {found:?}", path.display())]
    Schema { path: PathBuf, found: String },
    #[error(transparent)]
    Run(#[from] RunError),
}

/// Path of the transcript log that accompanies `report`.
pub fn transcript_log_path(report: &Path) -> PathBuf {
    report.with_extension("transcripts.jsonl")
}

pub fn transcripts_to_jsonl(transcripts: &[Vec<Transcript>]) -> String {
    let mut out = String::new();
    for (trial, sessions) in transcripts.iter().enumerate() {
        let mut seq = 0;
        for t in sessions {
            for e in t.entries() {
                out.push_str(&entry_line(seq, e, Some(trial)));
                out.push('\n');
                seq += 1;
            }
        }
    }
    out
}

fn write(path: &Path, contents: &str) -> Result<(), ReportError> {
    fs::write(path, contents).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Write the report to `path` and the transcript log beside it.
pub fn emit_report(outcome: &ScenarioOutcome, path: &Path) -> Result<PathBuf, ReportError> {
    write(path, &outcome.summary.to_toml())?;
    let log = transcript_log_path(path);
    write(&log, &transcripts_to_jsonl(&outcome.transcripts))?;
    Ok(log)
}

pub fn read_report(path: &Path) -> Result<RunSummary, ReportError> {
    let text = fs::read_to_string(path).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let summary: RunSummary = toml::from_str(&text).map_err(|source| ReportError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    if summary.schema != SUMMARY_SCHEMA {
        return Err(ReportError::Schema {
            path: path.to_path_buf(),
            found: summary.schema,
        });
    }
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayOutcome {
    pub identical: bool,
    /// Aggregate keys whose values differ from the stored report.
    pub differing: Vec<String>,
    pub rerun: RunSummary,
}

/// Re-run the scenario stored in a report and compare.
pub fn replay(path: &Path) -> Result<ReplayOutcome, ReportError> {
    let stored = read_report(path)?;
    let rerun = run_scenario(&stored.config)?.summary;
    let a = toml::Table::try_from(&stored.aggregates).expect("aggregates serialize");
    let b = toml::Table::try_from(&rerun.aggregates).expect("aggregates serialize");
    let differing = AGGREGATE_KEYS
        .iter()
        .filter(|k| a.get(**k) != b.get(**k))
        .map(|k| k.to_string())
        .collect();
    Ok(ReplayOutcome {
        identical: stored.to_toml() == rerun.to_toml(),
        differing,
        rerun,
    })
}
