//! Configuration-driven runs of the `fibertrace` experiments.
//!
//! [`run_config`] executes one parsed configuration and returns the checks
//! together with the tables it produced; [`execute`] additionally writes
//! them and the [`RunManifest`] to disk.

use std::path::{Path, PathBuf};
use std::time::Instant;

pub mod config;
pub mod experiments;
pub mod report;

pub use config::{ExperimentConfig, ExperimentKind};
pub use report::{compare, Check, CsvTable, DiffReport, Outcome, RunManifest};

/// Environment variable that overrides the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "FIBERTRACE_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid config: {0}")]
    Validation(String),
    #[error("computation failed: {0}")]
    Compute(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } => 2,
            CliError::Validation(_) => 3,
            CliError::Compute(_) | CliError::Io(_) => 1,
        }
    }
}

pub(crate) fn compute<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Compute(e.to_string())
}

/// Parses and validates a configuration file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let src = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let cfg = ExperimentConfig::parse(&src)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Runs the experiment named by `cfg.kind`.
pub fn run_config(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let missing = || CliError::Validation(format!("missing [{}] section", cfg.kind.name()));
    match cfg.kind {
        ExperimentKind::Invariants => experiments::invariants::run(cfg.invariants.as_ref().ok_or_else(missing)?),
        ExperimentKind::Wavetrace => experiments::wavetrace::run(cfg.wavetrace.as_ref().ok_or_else(missing)?),
        ExperimentKind::Heattrace => experiments::heattrace::run(cfg.heattrace.as_ref().ok_or_else(missing)?),
        ExperimentKind::Spa => experiments::spa::run(cfg.spa.as_ref().ok_or_else(missing)?),
        ExperimentKind::Pushdown => experiments::pushdown::run(cfg.pushdown.as_ref().ok_or_else(missing)?),
        ExperimentKind::Matrixmodel => {
            experiments::matrixmodel::run(cfg.matrixmodel.as_ref().ok_or_else(missing)?, cfg.seed)
        }
        ExperimentKind::Ledger => experiments::ledger::run(cfg.ledger.as_ref().ok_or_else(missing)?),
    }
}

/// Output directory: explicit flag, then the environment, then the config,
/// then `fibertrace-out/<kind>`.
pub fn output_dir(cfg: &ExperimentConfig, flag: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(OUTPUT_DIR_ENV) {
        return PathBuf::from(p);
    }
    cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("fibertrace-out").join(cfg.kind.name()))
}

/// Runs, writes every artifact plus `manifest.json`, and returns the manifest.
pub fn execute(cfg: &ExperimentConfig, dir: &Path) -> Result<RunManifest, CliError> {
    let start = Instant::now();
    let outcome = run_config(cfg)?;
    let wall_time_s = start.elapsed().as_secs_f64();
    let artifacts = report::write_outcome(dir, &outcome)?;
    let manifest = RunManifest {
        kind: cfg.kind,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        config: cfg.echo(),
        wall_time_s,
        passed: outcome.passed(),
        checks: outcome.checks,
        artifacts,
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(dir.join("manifest.json"), text + "\n").map_err(|e| CliError::Io(e.to_string()))?;
    Ok(manifest)
}

pub fn read_manifest(path: &Path) -> Result<RunManifest, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse { line: e.line(), column: e.column(), message: e.to_string() })
}
