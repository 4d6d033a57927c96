//! Machine-readable verification records.

use serde::{Deserialize, Serialize};

/// One verified identity: defect value against a tolerance.
///
/// `pass` always equals `defect <= tolerance`; wall time is informational
/// and excluded from determinism comparisons.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DefectReport {
    pub check: String,
    pub system: String,
    pub params: serde_json::Value,
    pub defect: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub wall_time_ms: f64,
}

impl DefectReport {
    pub fn new(
        check: impl Into<String>,
        system: impl Into<String>,
        params: serde_json::Value,
        defect: f64,
        tolerance: f64,
    ) -> Self {
        DefectReport {
            check: check.into(),
            system: system.into(),
            params,
            defect,
            tolerance,
            pass: defect <= tolerance,
            wall_time_ms: 0.0,
        }
    }

    /// Copy with the wall time zeroed, for value comparisons across runs.
    pub fn normalized(&self) -> Self {
        DefectReport { wall_time_ms: 0.0, ..self.clone() }
    }
}

/// Aggregate of a full verification run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub tool_version: String,
    pub system: String,
    pub depth: usize,
    pub rng_seed: u64,
    pub all_pass: bool,
    pub reports: Vec<DefectReport>,
}

impl RunReport {
    pub fn new(system: &str, depth: usize, rng_seed: u64, reports: Vec<DefectReport>) -> Self {
        RunReport {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            system: system.to_string(),
            depth,
            rng_seed,
            all_pass: reports.iter().all(|r| r.pass),
            reports,
        }
    }

    pub fn normalized(&self) -> Self {
        RunReport {
            reports: self.reports.iter().map(DefectReport::normalized).collect(),
            ..self.clone()
        }
    }
}
