// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// JSON schema for [`Report`].
pub const REPORT_SCHEMA: &str = include_str!("../../schema/report.schema.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Csv,
    Json,
    Markdown,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
            ReportFormat::Markdown => "md",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub eps_p: f64,
    pub mechanism: String,
    pub metric: String,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub k: usize,
    pub rows: Vec<ReportRow>,
    pub runtime_secs: f64,
}

fn is_rate(metric: &str) -> bool {
    metric != "l1"
}

impl Report {
    /// Mean of `metric` for `mechanism` at `eps_p`.
    pub fn mean(&self, mechanism: &str, metric: &str, eps_p: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.mechanism == mechanism && r.metric == metric && r.eps_p == eps_p)
            .map(|r| r.mean)
    }

    pub fn eps_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = Vec::new();
        for r in &self.rows {
            if !v.contains(&r.eps_p) {
                v.push(r.eps_p);
            }
        }
        v
    }

    pub fn mechanisms(&self) -> Vec<String> {
        let mut v: Vec<String> = Vec::new();
        for r in &self.rows {
            if !v.contains(&r.mechanism) {
                v.push(r.mechanism.clone());
            }
        }
        v
    }

    pub fn metrics(&self) -> Vec<String> {
        let mut v: Vec<String> = Vec::new();
        for r in &self.rows {
            if !v.contains(&r.metric) {
                v.push(r.metric.clone());
            }
        }
        v
    }

    /// Checks a parsed JSON report against the schema's structure and the
    /// value ranges: rates in [0,1], errors non-negative.
    pub fn validate_json(value: &serde_json::Value) -> Result<Report> {
        let obj = value.as_object().ok_or_else(|| Error::validation("report must be an object"))?;
        for key in obj.keys() {
            if !["k", "rows", "runtime_secs"].contains(&key.as_str()) {
                return Err(Error::validation(format!("unexpected report field '{key}'")));
            }
        }
        let report: Report = serde_json::from_value(value.clone())?;
        if report.k == 0 || !(report.runtime_secs >= 0.0) {
            return Err(Error::validation("k must be positive and runtime non-negative"));
        }
        for r in &report.rows {
            let metric_ok = r.metric == "l1"
                || ["acc@", "hit_rate@", "ndcg@"].iter().any(|p| {
                    r.metric.strip_prefix(p).is_some_and(|n| !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()))
                });
            if !metric_ok || r.mechanism.is_empty() {
                return Err(Error::validation(format!("bad row labels {:?}/{:?}", r.mechanism, r.metric)));
            }
            if !(r.eps_p > 0.0) || !(r.mean >= 0.0) || !(r.stderr >= 0.0) || (is_rate(&r.metric) && r.mean > 1.0 + 1e-12) {
                return Err(Error::validation(format!("row out of range: {r:?}")));
            }
        }
        Ok(report)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        String::from_utf8(bytes).map_err(|e| Error::numeric(e.to_string()))
    }

    pub fn from_csv(text: &str) -> Result<Vec<ReportRow>> {
        csv::Reader::from_reader(text.as_bytes()).deserialize().map(|r| r.map_err(Error::from)).collect()
    }

    /// One row per ε_P, one column per (mechanism, metric).
    pub fn to_markdown(&self) -> String {
        let mechs = self.mechanisms();
        let metrics = self.metrics();
        let mut out = String::from("| eps_p |");
        let mut rule = String::from("|---|");
        for m in &mechs {
            for k in &metrics {
                let _ = write!(out, " {m} {k} |");
                rule.push_str("---|");
            }
        }
        out.push('\n');
        out.push_str(&rule);
        out.push('\n');
        for e in self.eps_values() {
            let _ = write!(out, "| {e} |");
            for m in &mechs {
                for k in &metrics {
                    match self.rows.iter().find(|r| r.eps_p == e && &r.mechanism == m && &r.metric == k) {
                        Some(r) => {
                            let _ = write!(out, " {:.4} ± {:.4} |", r.mean, r.stderr);
                        }
                        None => out.push_str(" - |"),
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

pub fn render_report(report: &Report, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Csv => report.to_csv(),
        ReportFormat::Json => Ok(serde_json::to_string_pretty(report)? + "\n"),
        ReportFormat::Markdown => Ok(report.to_markdown()),
    }
}

/// Writes the rendered report to `path`.
pub fn emit_report(report: &Report, format: ReportFormat, path: &Path) -> Result<()> {
    std::fs::write(path, render_report(report, format)?)?;
    Ok(())
}
