use std::collections::BTreeMap;

use jetsym::oracle::Verdict;
use jetsym::{JetSpace, Oracle};
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct OracleSettings {
    pub seed: u64,
    pub trials: usize,
    pub tol: f64,
}

impl From<&Oracle> for OracleSettings {
    fn from(o: &Oracle) -> Self {
        OracleSettings { seed: o.seed, trials: o.trials, tol: o.tol }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClaimReport {
    pub name: String,
    pub holds: bool,
    pub max_residual: f64,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub witness: BTreeMap<String, f64>,
}

impl ClaimReport {
    pub fn new(name: impl Into<String>, holds: bool, max_residual: f64) -> ClaimReport {
        ClaimReport { name: name.into(), holds, max_residual, witness: BTreeMap::new() }
    }

    pub fn from_verdict(name: impl Into<String>, v: &Verdict, space: &JetSpace) -> ClaimReport {
        let witness = v
            .failure
            .as_ref()
            .map(|f| jetsym::error::witness_from(&f.point, Some(space)).into_iter().collect())
            .unwrap_or_default();
        ClaimReport { name: name.into(), holds: v.holds, max_residual: v.max_residual, witness }
    }

    pub fn with_witness(mut self, witness: &[(String, f64)]) -> ClaimReport {
        self.witness = witness.iter().cloned().collect();
        self
    }
}

/// Machine-readable outcome of one command.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub op: String,
    pub args: serde_json::Value,
    pub oracle: OracleSettings,
    pub passed: bool,
    pub claims: Vec<ClaimReport>,
    pub result: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub elapsed_ms: u128,
}
