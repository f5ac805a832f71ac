use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use klyshko_core::analysis::PatternMetrics;
use klyshko_core::CoincidencePattern;
use serde::Serialize;

use crate::config::Params;
use crate::error::CliError;
use crate::presets::{Check, Outcome};

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PatternEntry {
    pub name: String,
    pub csv: PathBuf,
    pub metrics: PatternMetrics,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunSection {
    pub patterns: Vec<PatternEntry>,
    pub values: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepPoint {
    pub value: f64,
    pub config: Params,
    #[serde(flatten)]
    pub run: RunSection,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepSection {
    pub param: String,
    pub points: Vec<SweepPoint>,
    /// Swept value whose main pattern is sharpest (`S_i` sweeps).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub argmax_sharpness: Option<f64>,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunReport {
    pub command: String,
    pub config: Params,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run: Option<RunSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    pub duration_seconds: f64,
}

impl RunReport {
    pub fn checks(&self) -> Vec<&Check> {
        let mut all: Vec<&Check> = Vec::new();
        if let Some(r) = &self.run {
            all.extend(&r.checks);
        }
        if let Some(s) = &self.sweep {
            for p in &s.points {
                all.extend(&p.run.checks);
            }
            all.extend(&s.checks);
        }
        all
    }
}

/// `x_m,rate` rows in shortest round-trip form.
pub fn csv_text(pattern: &CoincidencePattern) -> String {
    let mut s = String::with_capacity(pattern.len() * 48);
    s.push_str("x_m,rate\n");
    for (x, r) in pattern.coordinate().iter().zip(pattern.rate()) {
        let _ = writeln!(s, "{x:e},{r:e}");
    }
    s
}

/// Writes each pattern as `<stem>-<name>.csv` under `dir`.
pub fn write_outcome(dir: &Path, stem: &str, outcome: Outcome) -> Result<RunSection, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let mut patterns = Vec::new();
    for (name, pattern) in &outcome.patterns {
        let path = dir.join(format!("{stem}-{name}.csv"));
        std::fs::write(&path, csv_text(pattern))
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        patterns.push(PatternEntry { name: name.clone(), csv: path, metrics: PatternMetrics::measure(pattern) });
    }
    Ok(RunSection { patterns, values: outcome.values, checks: outcome.checks })
}

pub fn write_report(path: &Path, report: &RunReport) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(report).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}
