use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::JobConfig;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    CheckFailed,
    ConfigError,
    SolverFailure,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::CheckFailed => 1,
            Status::ConfigError => 2,
            Status::SolverFailure => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StageStatus {
    Ok,
    Skipped,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub name: String,
    pub status: StageStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// A residual compared with its tolerance; `value` is absent when skipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
    pub passed: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub stages: Vec<Stage>,
    pub checks: Vec<Check>,
    /// Paths relative to the output directory.
    pub artifacts: Vec<String>,
    pub results: Value,
    pub config: JobConfig,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Timings {
    pub stages: Vec<(String, f64)>,
    pub total: f64,
}

/// Collects stages, checks, results and artifacts of one command.
pub struct Recorder {
    command: String,
    stages: Vec<Stage>,
    checks: Vec<Check>,
    results: serde_json::Map<String, Value>,
    files: Vec<(String, Vec<u8>)>,
    timings: Timings,
    started: Instant,
    last: Instant,
}

impl Recorder {
    pub fn new(command: &str) -> Self {
        let now = Instant::now();
        Self {
            command: command.to_string(),
            stages: Vec::new(),
            checks: Vec::new(),
            results: serde_json::Map::new(),
            files: Vec::new(),
            timings: Timings::default(),
            started: now,
            last: now,
        }
    }

    pub fn stage(&mut self, name: &str) {
        self.stage_with(name, StageStatus::Ok, None);
    }

    pub fn skip(&mut self, name: &str, note: &str) {
        self.stage_with(name, StageStatus::Skipped, Some(note.to_string()));
    }

    fn stage_with(&mut self, name: &str, status: StageStatus, note: Option<String>) {
        let now = Instant::now();
        self.timings
            .stages
            .push((name.to_string(), (now - self.last).as_secs_f64()));
        self.last = now;
        self.stages.push(Stage {
            name: name.to_string(),
            status,
            note,
        });
    }

    /// Records `value <= tolerance`; NaN fails.
    pub fn check(&mut self, name: &str, value: f64, tolerance: f64) -> bool {
        let passed = value <= tolerance;
        self.checks.push(Check {
            name: name.to_string(),
            value: Some(value),
            tolerance: Some(tolerance),
            passed: Some(passed),
            note: None,
        });
        passed
    }

    /// A check whose outcome is a predicate rather than a residual.
    pub fn check_that(&mut self, name: &str, passed: bool, note: impl Into<String>) -> bool {
        self.checks.push(Check {
            name: name.to_string(),
            value: None,
            tolerance: None,
            passed: Some(passed),
            note: Some(note.into()),
        });
        passed
    }

    pub fn skip_check(&mut self, name: &str, note: &str) {
        self.checks.push(Check {
            name: name.to_string(),
            value: None,
            tolerance: None,
            passed: None,
            note: Some(note.to_string()),
        });
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("results serialize");
        self.results.insert(key.to_string(), v);
    }

    pub fn file(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.files.push((name.into(), bytes.into()));
    }

    pub fn json_file(&mut self, name: &str, value: &impl Serialize) {
        let text = serde_json::to_string_pretty(value).expect("artifact serializes");
        self.file(name, text + "\n");
    }

    fn status(&self) -> Status {
        if self.checks.iter().all(|c| c.passed != Some(false))
            && self.stages.iter().all(|s| s.status != StageStatus::Failed)
        {
            Status::Pass
        } else {
            Status::CheckFailed
        }
    }

    /// Writes artifacts, `report.json` and `timings.json` into `out`.
    pub fn finish(mut self, config: &JobConfig, out: &Path) -> Result<RunReport, CliError> {
        self.timings.total = self.started.elapsed().as_secs_f64();
        let report = RunReport {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: self.command.clone(),
            status: self.status(),
            error: None,
            stages: std::mem::take(&mut self.stages),
            checks: std::mem::take(&mut self.checks),
            artifacts: self.files.iter().map(|(n, _)| n.clone()).collect(),
            results: Value::Object(std::mem::take(&mut self.results)),
            config: config.clone(),
        };
        std::fs::create_dir_all(out).map_err(|e| io_error(out, e))?;
        for (name, bytes) in &self.files {
            write(&out.join(name), bytes)?;
        }
        write_report(&report, out)?;
        let timings =
            serde_json::to_string_pretty(&self.timings).expect("timings serialize") + "\n";
        write(&out.join("timings.json"), timings.as_bytes())?;
        Ok(report)
    }
}

/// Report for a run that stopped with an error; no artifacts.
pub fn failure_report(command: &str, config: &JobConfig, err: &CliError) -> RunReport {
    RunReport {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        status: err.status(),
        error: Some(err.to_string()),
        stages: Vec::new(),
        checks: Vec::new(),
        artifacts: Vec::new(),
        results: Value::Object(serde_json::Map::new()),
        config: config.clone(),
    }
}

pub fn write_report(report: &RunReport, out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out).map_err(|e| io_error(out, e))?;
    let text = serde_json::to_string_pretty(report).expect("report serializes") + "\n";
    write(&out.join("report.json"), text.as_bytes())
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| io_error(path, e))
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", PathBuf::from(path).display()))
}
