//! Scenario runner: reads a configuration, runs one verification suite and
//! writes a JSON report plus CSV trajectories.

pub mod config;
pub mod scenarios;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spraylift::{CheckResult, Trajectory};

pub use config::{Manifold, PartialConfig, Scenario, ScenarioConfig, DEFAULT_SEED};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
        }
    }
}

/// Exit code when every check passed.
pub const EXIT_OK: u8 = 0;
/// Exit code when a check failed; the report is still written.
pub const EXIT_CHECK_FAILED: u8 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub pass: bool,
    pub version: String,
    pub config: ScenarioConfig,
    pub checks: Vec<CheckResult>,
    /// CSV files written next to the report.
    pub files: Vec<String>,
}

impl Report {
    pub fn exit_code(&self) -> u8 {
        if self.pass {
            EXIT_OK
        } else {
            EXIT_CHECK_FAILED
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn emit_csv(tr: &Trajectory, path: &Path) -> Result<(), CliError> {
    tr.write_csv(path).map_err(io_err(path))
}

pub fn emit_report(report: &Report, path: &Path) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

/// Loads the optional config file and overlays the flag values.
pub fn load_config(file: Option<&Path>, flags: PartialConfig) -> Result<ScenarioConfig, CliError> {
    let base = match file {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            PartialConfig::parse(&text)?
        }
        None => PartialConfig::default(),
    };
    base.overlay(flags).resolve()
}

/// Runs the suite and writes `report.json` and the CSV files into `cfg.out`.
pub fn run(cfg: &ScenarioConfig) -> Result<Report, CliError> {
    let output = scenarios::run_scenario(cfg);
    fs::create_dir_all(&cfg.out).map_err(io_err(&cfg.out))?;
    let mut files = Vec::new();
    for (name, contents) in &output.files {
        let path = cfg.out.join(name);
        fs::write(&path, contents).map_err(io_err(&path))?;
        files.push(name.clone());
    }
    let report = Report {
        pass: output.checks.iter().all(|c| c.pass),
        version: spraylift::VERSION.to_string(),
        config: cfg.clone(),
        checks: output.checks,
        files,
    };
    emit_report(&report, &cfg.out.join("report.json"))?;
    Ok(report)
}
