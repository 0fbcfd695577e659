//! CSV tables, pass/fail checks and the JSON run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentKind;
use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(x) => format!("{x:.17e}"),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as i64)
    }
}

impl From<i64> for Cell {
    fn from(n: i64) -> Self {
        Cell::Int(n)
    }
}

impl From<u32> for Cell {
    fn from(n: u32) -> Self {
        Cell::Int(n as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new(name: &str, header: &[&'static str]) -> Self {
        CsvTable { name: name.to_string(), header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, dir: &Path) -> Result<String, CliError> {
        let file = format!("{}.csv", self.name);
        let mut w = csv::Writer::from_path(dir.join(&file)).map_err(|e| CliError::Io(e.to_string()))?;
        w.write_record(&self.header).map_err(|e| CliError::Io(e.to_string()))?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(|e| CliError::Io(e.to_string()))?;
        }
        w.flush().map_err(|e| CliError::Io(e.to_string()))?;
        Ok(file)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// `None` when the quantity is not finite.
    pub residual: Option<f64>,
    pub tolerance: f64,
}

impl Check {
    /// Passes when `residual < tolerance`.
    pub fn below(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Check { name: name.into(), passed: residual < tolerance, residual: residual.is_finite().then_some(residual), tolerance }
    }

    /// A yes/no check, recorded with residual 0 or 1.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Check { name: name.into(), passed: ok, residual: Some(if ok { 0.0 } else { 1.0 }), tolerance: 0.5 }
    }
}

/// Everything an experiment produces before it is written out.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub tables: Vec<CsvTable>,
    pub documents: Vec<(String, serde_json::Value)>,
}

impl Outcome {
    pub fn check(&mut self, c: Check) {
        assert!(!self.checks.iter().any(|x| x.name == c.name), "duplicate check {}", c.name);
        self.checks.push(c);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn find(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub kind: ExperimentKind,
    pub tool_version: String,
    pub seed: u64,
    /// Canonical TOML of the configuration that was run.
    pub config: String,
    pub wall_time_s: f64,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub artifacts: Vec<String>,
}

impl RunManifest {
    pub fn residuals(&self) -> BTreeMap<&str, Option<f64>> {
        self.checks.iter().map(|c| (c.name.as_str(), c.residual)).collect()
    }
}

pub fn write_outcome(dir: &Path, outcome: &Outcome) -> Result<Vec<String>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for t in &outcome.tables {
        files.push(t.write(dir)?);
    }
    for (name, doc) in &outcome.documents {
        let file = format!("{name}.json");
        let text = serde_json::to_string_pretty(doc).map_err(|e| CliError::Io(e.to_string()))?;
        fs::write(dir.join(&file), text + "\n").map_err(|e| CliError::Io(e.to_string()))?;
        files.push(file);
    }
    Ok(files)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckDiff {
    pub name: String,
    pub left: Option<f64>,
    pub right: Option<f64>,
    pub difference: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiffReport {
    pub kind: ExperimentKind,
    pub diffs: Vec<CheckDiff>,
    pub max_difference: f64,
    pub within: bool,
}

/// Field-wise residual comparison of two manifests of the same experiment.
pub fn compare(a: &RunManifest, b: &RunManifest, tol: f64) -> Result<DiffReport, CliError> {
    if a.kind != b.kind {
        return Err(CliError::Validation(format!("kind mismatch: {} vs {}", a.kind.name(), b.kind.name())));
    }
    let (ra, rb) = (a.residuals(), b.residuals());
    if ra.keys().ne(rb.keys()) {
        return Err(CliError::Validation("manifests list different checks; parameters differ".into()));
    }
    let mut diffs = Vec::new();
    for (name, left) in &ra {
        let right = rb[name];
        let difference = match (left, right) {
            (Some(x), Some(y)) => (x - y).abs(),
            (None, None) => 0.0,
            _ => f64::INFINITY,
        };
        if difference > 0.0 {
            diffs.push(CheckDiff { name: name.to_string(), left: *left, right, difference });
        }
    }
    let max_difference = diffs.iter().map(|d| d.difference).fold(0.0, f64::max);
    Ok(DiffReport { kind: a.kind, diffs, max_difference, within: max_difference <= tol })
}
