//! The machine-readable report. Everything except `timing` is a pure function of the
//! configuration, so two runs with the same seed serialize identically outside it.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::config::RunConfig;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// Stable identifier of the claim this check exercises.
    pub anchor: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    /// Structured payload, e.g. a serialized kernel result.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<serde_json::Value>,
}

impl Check {
    /// Passes iff `residual ≤ tolerance`. Non-finite residuals fail and are stored as
    /// `f64::MAX` so the report stays valid JSON.
    pub fn new(name: &str, anchor: &str, residual: f64, tolerance: f64) -> Self {
        let (residual, passed, detail) = if residual.is_finite() {
            (residual, residual <= tolerance, None)
        } else {
            (f64::MAX, false, Some(format!("non-finite residual {residual}")))
        };
        Self {
            name: name.to_string(),
            anchor: anchor.to_string(),
            residual,
            tolerance,
            passed,
            detail,
            data: None,
        }
    }

    pub fn data<T: Serialize>(mut self, value: &T) -> Self {
        self.data = serde_json::to_value(value).ok();
        self
    }

    pub fn detail(mut self, text: impl Into<String>) -> Self {
        let text = text.into();
        self.detail = Some(match self.detail.take() {
            Some(prev) => format!("{prev}; {text}"),
            None => text,
        });
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteRecord {
    pub suite: String,
    pub anchor: String,
    pub seed: u64,
    pub checks_run: usize,
    pub max_residual: f64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteRecord {
    pub fn new(suite: &str, anchor: &str, seed: u64, checks: Vec<Check>) -> Self {
        Self {
            suite: suite.to_string(),
            anchor: anchor.to_string(),
            seed,
            checks_run: checks.len(),
            max_residual: checks.iter().map(|c| c.residual).fold(0.0, f64::max),
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Timing {
    pub timestamp_unix: u64,
    pub total_seconds: f64,
    pub suite_seconds: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema: u32,
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    pub passed: bool,
    pub suites: Vec<SuiteRecord>,
    pub artifacts: Vec<String>,
    pub timing: Timing,
}

impl Report {
    pub fn new(command: &str, config: RunConfig, suites: Vec<SuiteRecord>, artifacts: Vec<String>, timing: Timing) -> Self {
        Self {
            schema: SCHEMA,
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
            passed: suites.iter().all(|s| s.passed),
            suites,
            artifacts,
            timing,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is plain data") + "\n"
    }

    /// One row per check.
    pub fn checks_csv(&self) -> String {
        let mut s = String::from("suite,check,anchor,residual,tolerance,passed\n");
        for suite in &self.suites {
            for c in &suite.checks {
                s.push_str(&format!(
                    "{},{},{},{:e},{:e},{}\n",
                    suite.suite, c.name, c.anchor, c.residual, c.tolerance, c.passed
                ));
            }
        }
        s
    }
}
