use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::numeric::Tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub pass: bool,
    pub residual: f64,
}

/// Named residuals with a shared threshold; insertion order is kept for output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub tolerance: f64,
    pub checks: IndexMap<String, Check>,
}

impl ConditionReport {
    pub fn new(tol: &Tolerance) -> Self {
        ConditionReport { tolerance: tol.abs_eps, checks: IndexMap::new() }
    }

    pub fn with_threshold(threshold: f64) -> Self {
        ConditionReport { tolerance: threshold, checks: IndexMap::new() }
    }

    /// Record a residual; NaN counts as failure.
    pub fn record(&mut self, name: impl Into<String>, residual: f64) {
        let pass = residual <= self.tolerance;
        self.checks.insert(name.into(), Check { pass, residual });
    }

    /// Record a check whose pass flag is decided elsewhere.
    pub fn record_flag(&mut self, name: impl Into<String>, pass: bool, residual: f64) {
        self.checks.insert(name.into(), Check { pass, residual });
    }

    pub fn merge(&mut self, other: &ConditionReport) {
        for (k, v) in &other.checks {
            self.checks.insert(k.clone(), *v);
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.values().all(|c| c.pass)
    }

    pub fn residual(&self, name: &str) -> Option<f64> {
        self.checks.get(name).map(|c| c.residual)
    }

    pub fn pass_of(&self, name: &str) -> Option<bool> {
        self.checks.get(name).map(|c| c.pass)
    }

    pub fn worst(&self) -> f64 {
        self.checks.values().fold(0.0, |a, c| a.max(c.residual))
    }

    pub fn failures(&self) -> Vec<(&str, f64)> {
        self.checks
            .iter()
            .filter(|(_, c)| !c.pass)
            .map(|(k, c)| (k.as_str(), c.residual))
            .collect()
    }
}

/// Running maximum that treats NaN as infinitely bad.
#[derive(Debug, Clone, Copy, Default)]
pub struct MaxResidual(pub f64);

impl MaxResidual {
    pub fn update(&mut self, x: f64) {
        if x.is_nan() {
            self.0 = f64::INFINITY;
        } else if x > self.0 {
            self.0 = x;
        }
    }
}
