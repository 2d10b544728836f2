use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::OutputFormat;

/// Parameters a check ran at; absent fields do not apply.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spin: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
}

impl CheckParams {
    pub fn spin(spin: u32) -> Self {
        Self {
            spin: Some(spin),
            ..Self::default()
        }
    }

    pub fn theta(mut self, theta: i64) -> Self {
        self.theta = Some(theta);
        self
    }

    pub fn k(mut self, k: u32) -> Self {
        self.k = Some(k);
        self
    }

    pub fn margin(mut self, margin: u32) -> Self {
        self.margin = Some(margin);
        self
    }

    pub fn family(mut self, family: impl ToString) -> Self {
        self.family = Some(family.to_string());
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    /// Relative residual compared against a tolerance.
    Residual,
    /// Exact statement, true or false.
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub anchor: String,
    pub params: CheckParams,
    pub kind: CheckKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

/// A formula in circulation that the computation contradicts, with the
/// form that holds instead.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub topic: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spin: Option<u32>,
    pub stated: String,
    pub derived: String,
    pub evidence: String,
}

/// The configuration fields that affect results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub spins: Vec<u32>,
    pub n_max: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerance_overrides: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub config: ReportConfig,
    pub overall_pass: bool,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<CheckRecord>,
    pub discrepancies: Vec<Discrepancy>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    check: &'a str,
    anchor: &'a str,
    spin: Option<u32>,
    theta: Option<i64>,
    k: Option<u32>,
    margin: Option<u32>,
    family: Option<&'a str>,
    kind: CheckKind,
    residual: Option<f64>,
    tolerance: Option<f64>,
    pass: bool,
    error: Option<&'a str>,
}

impl VerificationReport {
    pub fn new(config: ReportConfig, checks: Vec<CheckRecord>, discrepancies: Vec<Discrepancy>) -> Self {
        let passed = checks.iter().filter(|c| c.pass).count();
        let failed = checks.len() - passed;
        Self {
            config,
            overall_pass: failed == 0,
            passed,
            failed,
            checks,
            discrepancies,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// 0 when everything passed, otherwise the failure count capped at
    /// 254; 255 is left for runs that could not produce a report.
    pub fn exit_code(&self) -> i32 {
        self.failed.min(254) as i32
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Parses a JSON report and checks that its summary fields agree with
    /// its checks.
    pub fn from_json(text: &str) -> Result<Self> {
        let report: Self = serde_json::from_str(text)?;
        let passed = report.checks.iter().filter(|c| c.pass).count();
        let failed = report.checks.len() - passed;
        if report.passed != passed || report.failed != failed || report.overall_pass != (failed == 0) {
            return Err(Error::Parse(format!(
                "summary says {} passed / {} failed, checks say {passed} / {failed}",
                report.passed, report.failed
            )));
        }
        Ok(report)
    }

    /// One row per check: name, anchor, parameters, residual, tolerance,
    /// pass flag and error.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for c in &self.checks {
            w.serialize(CsvRow {
                check: &c.name,
                anchor: &c.anchor,
                spin: c.params.spin,
                theta: c.params.theta,
                k: c.params.k,
                margin: c.params.margin,
                family: c.params.family.as_deref(),
                kind: c.kind,
                residual: c.residual,
                tolerance: c.tolerance,
                pass: c.pass,
                error: c.error.as_deref(),
            })?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => self.to_csv(),
        }
    }
}

pub fn export_report(report: &VerificationReport, path: &Path, format: OutputFormat) -> Result<()> {
    let text = report.render(format)?;
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
