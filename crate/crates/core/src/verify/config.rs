use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable read by the command line for the default
/// tolerance of every residual check.
pub const TOLERANCE_ENV: &str = "SU2LADDER_TOLERANCE";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(Error::Parse(format!("unknown output format {other:?}"))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Json => "json",
            Self::Csv => "csv",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub spins: Vec<u32>,
    pub n_max: u32,
    /// Replaces the built-in tolerance of every residual check.
    pub tolerance: Option<f64>,
    /// Per check name; wins over `tolerance`.
    pub tolerance_overrides: BTreeMap<String, f64>,
    pub output_format: OutputFormat,
    /// Worker threads; 0 uses the global pool.
    pub parallelism: usize,
    /// Record wall time per check. Reports then differ between runs.
    pub timings: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            spins: vec![1, 2],
            n_max: 4,
            tolerance: None,
            tolerance_overrides: BTreeMap::new(),
            output_format: OutputFormat::Json,
            parallelism: 0,
            timings: false,
        }
    }
}

fn check_tolerance(what: &str, t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{what} must be positive and finite, got {t}")))
    }
}

impl SuiteConfig {
    /// Spins must be distinct and at least 1, `n_max` at least 1. An
    /// `n_max` of 1 is accepted but leaves the margin-2 checks without an
    /// interior, so they fail.
    pub fn validate(&self) -> Result<()> {
        if self.spins.is_empty() {
            return Err(Error::InvalidConfig("no spins given".into()));
        }
        for (i, &s) in self.spins.iter().enumerate() {
            if s == 0 {
                return Err(Error::InvalidConfig("spin 0 has no ladder structure; need s >= 1".into()));
            }
            if self.spins[..i].contains(&s) {
                return Err(Error::InvalidConfig(format!("spin {s} listed twice")));
            }
        }
        if self.n_max == 0 {
            return Err(Error::InvalidConfig("n_max must be at least 1".into()));
        }
        if let Some(t) = self.tolerance {
            check_tolerance("tolerance", t)?;
        }
        for (name, &t) in &self.tolerance_overrides {
            check_tolerance(name, t)?;
        }
        Ok(())
    }

    pub fn tolerance_for(&self, name: &str, default: f64) -> f64 {
        self.tolerance_overrides
            .get(name)
            .copied()
            .or(self.tolerance)
            .unwrap_or(default)
    }
}

/// Parses `name=value` into a tolerance override.
pub fn parse_override(text: &str) -> Result<(String, f64)> {
    let (name, value) = text
        .split_once('=')
        .ok_or_else(|| Error::Parse(format!("expected name=value, got {text:?}")))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|e| Error::Parse(format!("tolerance {value:?}: {e}")))?;
    check_tolerance(name, value)?;
    Ok((name.trim().to_string(), value))
}
