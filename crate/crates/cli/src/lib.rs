//! File formats and commands for the `harq-sim` binary.
//!
//! - [`scenario_file`]: TOML scenario documents
//! - [`report`]: TOML run reports
//! - [`trace_file`]: CSV event traces
//! - [`sweep`]: parallel one-parameter sweeps
//! - [`explain`]: analytic timeline tables

pub mod error;
pub mod explain;
pub mod report;
pub mod scenario_file;
pub mod sweep;
pub mod trace_file;

use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use harq_core::sim_engine::{resolve, run, ResolvedScenario, Scenario, TraceRecord};

pub use error::CliError;
pub use scenario_file::ScenarioFile;

pub const PRESETS: [&str; 1] = ["lab-trial"];

pub fn parse_scenario(source_name: &str, text: &str) -> Result<ScenarioFile, CliError> {
    ScenarioFile::parse(text).map_err(|e| CliError::from_toml(source_name, text, &e))
}

/// Reads `path`, or falls back to a named preset. With neither, the
/// lab-trial preset is used.
pub fn load_scenario(path: Option<&Path>, preset: Option<&str>) -> Result<ScenarioFile, CliError> {
    match (path, preset) {
        (Some(_), Some(_)) => Err(CliError::BadValue {
            what: "--preset".into(),
            message: "cannot be combined with --scenario".into(),
        }),
        (Some(p), None) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            parse_scenario(&p.display().to_string(), &text)
        }
        (None, Some("lab-trial")) | (None, None) => Ok(ScenarioFile::default()),
        (None, Some(other)) => Err(CliError::BadValue {
            what: "--preset".into(),
            message: format!("unknown preset `{other}` (known: {})", PRESETS.join(", ")),
        }),
    }
}

pub fn lower(file: &ScenarioFile) -> Result<(Scenario, ResolvedScenario), CliError> {
    let scenario = file.to_scenario().map_err(CliError::Validation)?;
    let resolved = resolve(&scenario).map_err(CliError::Validation)?;
    Ok((scenario, resolved))
}

pub struct RunResult {
    pub report: String,
    pub trace: Vec<TraceRecord>,
}

/// Runs `file` and renders the report. `deterministic` drops the timestamp
/// so identical inputs give byte-identical reports.
pub fn run_file(file: &ScenarioFile, deterministic: bool) -> Result<RunResult, CliError> {
    let (scenario, resolved) = lower(file)?;
    let out = run(&scenario).map_err(|e| CliError::Simulation(e.to_string()))?;
    let generated_at =
        (!deterministic).then(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()));
    let report = report::build(file, &resolved, &out.report, generated_at);
    Ok(RunResult {
        report: report.to_toml(),
        trace: out.trace,
    })
}

/// Splits a comma-separated list; blank items are dropped.
pub fn split_values(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(String::from)
        .collect()
}
