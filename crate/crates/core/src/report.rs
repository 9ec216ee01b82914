//! Machine-readable check results shared by tests and the CLI.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: String,
    pub spray: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub residuals: BTreeMap<String, f64>,
    pub pass: bool,
}

impl CheckResult {
    pub fn new(check: impl Into<String>, spray: impl Into<String>) -> Self {
        CheckResult {
            check: check.into(),
            spray: spray.into(),
            params: BTreeMap::new(),
            residuals: BTreeMap::new(),
            pass: true,
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.params.insert(key.to_string(), v);
        self
    }

    /// Records `value` and fails the check unless `value <= tol`.
    pub fn bound(mut self, key: &str, value: f64, tol: f64) -> Self {
        self.residuals.insert(key.to_string(), value);
        self.pass &= value <= tol;
        self
    }

    pub fn residual(mut self, key: &str, value: f64) -> Self {
        self.residuals.insert(key.to_string(), value);
        self
    }

    pub fn require(mut self, ok: bool) -> Self {
        self.pass &= ok;
        self
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.values().cloned().fold(0.0, f64::max)
    }
}
