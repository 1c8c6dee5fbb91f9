//! Machine-readable run reports. A report round-trips losslessly through
//! its JSON serialization, and two runs with identical configs and seeds
//! produce byte-identical reports apart from the `timestamp` field.

use serde::{Deserialize, Serialize};

use crate::classify::{LinearClassifier, TuningResult};
use crate::error::{Error, Result};
use crate::metrics::{EvalReport, StabilityReport};
use crate::permutation::{SetPValue, SetPValueTable};
use crate::reduction::{ReductionTrace, Signature};
use crate::sim::ReplicateSummary;

pub const SCHEMA_VERSION: u32 = 1;

/// FNV-1a 64-bit hash; stable across platforms and releases, used for
/// config and fold fingerprints.
pub struct Fnv1a(u64);

impl Fnv1a {
    pub fn new() -> Self {
        Fnv1a(0xcbf2_9ce4_8422_2325)
    }

    pub fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    pub fn write_usize(&mut self, v: usize) {
        self.write(&v.to_le_bytes());
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}

impl Default for Fnv1a {
    fn default() -> Self {
        Self::new()
    }
}

pub fn fnv1a_hex(bytes: &[u8]) -> String {
    let mut h = Fnv1a::new();
    h.write(bytes);
    format!("{:016x}", h.finish())
}

/// One named metric bundle inside a report (e.g. "test", "subtype-test").
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedEval {
    pub name: String,
    pub eval: EvalReport<f64>,
}

/// Summary of a connectivity-weight computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightReport {
    pub n_genes: usize,
    pub n_edges: usize,
    pub dropped_edges: usize,
    pub merged_duplicates: usize,
    pub self_loops: usize,
    /// Spearman correlation between set-membership counts and weights,
    /// when gene sets were supplied.
    pub setcount_spearman: Option<f64>,
    pub weights: Vec<GeneWeight>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneWeight {
    pub gene: String,
    pub weight: f64,
}

/// Everything one CLI run writes to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub software_version: String,
    /// Seconds since the Unix epoch at write time; the only field allowed
    /// to differ between otherwise identical runs.
    pub timestamp: String,
    pub command: String,
    pub config_fingerprint: String,
    pub config: serde_json::Value,
    pub warnings: Vec<String>,
    pub pvalues: Option<SetPValueTable<f64>>,
    pub screened: Option<Vec<SetPValue<f64>>>,
    pub traces: Option<Vec<ReductionTrace<f64>>>,
    pub signature: Option<Signature<f64>>,
    pub model: Option<LinearClassifier<f64>>,
    pub tuning: Option<TuningResult<f64>>,
    pub evals: Option<Vec<NamedEval>>,
    pub stability: Option<StabilityReport<f64>>,
    pub replicates: Option<ReplicateSummary<f64>>,
    pub weights: Option<WeightReport>,
}

impl RunReport {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        let fingerprint = fnv1a_hex(config.to_string().as_bytes());
        RunReport {
            schema_version: SCHEMA_VERSION,
            software_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: unix_timestamp(),
            command: command.to_string(),
            config_fingerprint: fingerprint,
            config,
            warnings: Vec::new(),
            pvalues: None,
            screened: None,
            traces: None,
            signature: None,
            model: None,
            tuning: None,
            evals: None,
            stability: None,
            replicates: None,
            weights: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("malformed run report: {e}")))
    }
}

fn unix_timestamp() -> String {
    use std::time::{SystemTime, UNIX_EPOCH};
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs().to_string())
        .unwrap_or_else(|_| "0".to_string())
}
