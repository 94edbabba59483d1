//! Benchmark report model and its JSON, CSV and text renderings.

mod csv_out;
mod json;
mod txt;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::catalog::{Category, Direction, MetricId, Unit};
use crate::error::{Error, Result};
use crate::mode::Mode;
use crate::scoring::Grade;
use crate::stats::Statistics;

pub use csv_out::{emit_csv, CSV_HEADER};
pub use json::{emit_json, parse_json};
pub use txt::{emit_comparison_txt, emit_txt};

/// Timestamp substituted by [`BenchmarkReport::normalized`].
pub const NORMALIZED_TIMESTAMP: &str = "1970-01-01T00:00:00Z";

/// Current UTC time, RFC 3339 with second precision.
pub fn timestamp_now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
}

impl From<bool> for Outcome {
    fn from(pass: bool) -> Self {
        if pass {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

impl Outcome {
    pub fn passed(self) -> bool {
        self == Outcome::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemInfo {
    pub name: Mode,
    pub display_name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub iterations: usize,
    pub warmup: usize,
    pub tenants: usize,
    pub contended_tenants: usize,
    pub memory_limit_mb: Option<u64>,
    pub compute_limit_percent: Option<f64>,
    pub seed: u64,
    /// Present only for filtered runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Vec<MetricId>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MigComparison {
    pub mig_expected: f64,
    /// Signed: negative means worse than the baseline.
    pub mig_deviation_percent: f64,
    /// Absolute value of the deviation.
    pub mig_gap_percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub id: MetricId,
    pub name: String,
    pub category: Category,
    pub unit: Unit,
    pub direction: Direction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statistics: Option<Statistics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<Outcome>,
    /// Secondary figures, e.g. inter-token latency next to TTFT.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, f64>,
    pub score: f64,
    pub mig_comparison: MigComparison,
}

impl MetricResult {
    /// The scored figure: sample mean, scalar value, or 1/0 for pass/fail.
    pub fn primary_value(&self) -> f64 {
        match (&self.statistics, self.value, self.outcome) {
            (Some(s), _, _) => s.mean,
            (None, Some(v), _) => v,
            (None, None, Some(o)) => f64::from(u8::from(o.passed())),
            (None, None, None) => f64::NAN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryScore {
    pub category: Category,
    pub name: String,
    pub weight: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Overall {
    pub weighted_score: f64,
    /// Mean of all metric scores; absent for native runs.
    pub unweighted_parity: Option<f64>,
    /// Category-weighted parity with the MIG baseline; absent for native runs.
    pub mig_parity: Option<f64>,
    pub grade: Grade,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub benchmark_version: String,
    pub calibration_version: Option<f64>,
    pub system: SystemInfo,
    pub config: ConfigEcho,
    pub metrics: Vec<MetricResult>,
    pub categories: Vec<CategoryScore>,
    pub overall: Overall,
    pub generated_at: String,
}

impl BenchmarkReport {
    pub fn metric(&self, id: MetricId) -> Option<&MetricResult> {
        self.metrics.iter().find(|m| m.id == id)
    }

    /// Copy with the timestamp replaced by [`NORMALIZED_TIMESTAMP`], the only
    /// field that varies between runs at a fixed seed.
    pub fn normalized(&self) -> BenchmarkReport {
        BenchmarkReport {
            generated_at: NORMALIZED_TIMESTAMP.to_string(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeltaStatus {
    Unchanged,
    Improved,
    Regressed,
    /// Within the threshold but lower.
    Declined,
    /// Absent from the baseline.
    New,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricDelta {
    pub id: MetricId,
    pub status: DeltaStatus,
    pub baseline_mean: Option<f64>,
    pub current_mean: f64,
    pub mean_delta: Option<f64>,
    /// Score change in points (0-100 scale).
    pub score_delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub baseline_path: PathBuf,
    pub baseline_system: Mode,
    pub current_system: Mode,
    pub threshold_points: f64,
    pub overall_delta: f64,
    pub deltas: Vec<MetricDelta>,
}

impl ComparisonReport {
    pub fn regressions(&self) -> impl Iterator<Item = &MetricDelta> {
        self.deltas.iter().filter(|d| d.status == DeltaStatus::Regressed)
    }
}

/// Writes `<prefix>.json`, `<prefix>.csv` and `<prefix>.txt`, creating
/// parent directories. Returns the paths in that order.
pub fn write_outputs(report: &BenchmarkReport, prefix: &Path) -> Result<[PathBuf; 3]> {
    if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let path = |ext: &str| {
        let mut s = prefix.as_os_str().to_owned();
        s.push(".");
        s.push(ext);
        PathBuf::from(s)
    };
    let out = [path("json"), path("csv"), path("txt")];
    let bodies = [emit_json(report)?, emit_csv(report)?, emit_txt(report)];
    for (p, body) in out.iter().zip(bodies) {
        fs::write(p, body).map_err(|e| Error::io(p, e))?;
    }
    Ok(out)
}
