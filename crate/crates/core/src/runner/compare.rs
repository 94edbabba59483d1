//! Comparison of a fresh report against a saved one.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::report::{parse_json, BenchmarkReport, ComparisonReport, DeltaStatus};

pub use crate::report::MetricDelta;

/// Score drop, in points on the 0-100 scale, that counts as a regression.
pub const DEFAULT_REGRESSION_THRESHOLD: f64 = 5.0;

pub fn compare_reports(current: &BenchmarkReport, baseline_path: &Path) -> Result<ComparisonReport> {
    compare_with_threshold(current, baseline_path, DEFAULT_REGRESSION_THRESHOLD)
}

pub fn compare_with_threshold(
    current: &BenchmarkReport,
    baseline_path: &Path,
    threshold_points: f64,
) -> Result<ComparisonReport> {
    let fail = |message: String| Error::Compare {
        path: baseline_path.to_path_buf(),
        message,
    };
    let text = fs::read_to_string(baseline_path).map_err(|e| fail(e.to_string()))?;
    let baseline = parse_json(&text).map_err(|e| fail(e.to_string()))?;
    if baseline.benchmark_version != current.benchmark_version {
        return Err(fail(format!(
            "report version {} does not match {}",
            baseline.benchmark_version, current.benchmark_version
        )));
    }
    Ok(diff(current, &baseline, baseline_path, threshold_points))
}

/// Per-metric deltas of `current` relative to `baseline`.
pub fn diff(
    current: &BenchmarkReport,
    baseline: &BenchmarkReport,
    baseline_path: &Path,
    threshold_points: f64,
) -> ComparisonReport {
    let deltas = current
        .metrics
        .iter()
        .map(|m| {
            let cur = m.primary_value();
            match baseline.metric(m.id) {
                None => MetricDelta {
                    id: m.id,
                    status: DeltaStatus::New,
                    baseline_mean: None,
                    current_mean: cur,
                    mean_delta: None,
                    score_delta: None,
                },
                Some(b) => {
                    let base = b.primary_value();
                    let ds = (m.score - b.score) * 100.0;
                    let status = if ds < -threshold_points {
                        DeltaStatus::Regressed
                    } else if ds < 0.0 {
                        DeltaStatus::Declined
                    } else if ds > 0.0 {
                        DeltaStatus::Improved
                    } else {
                        DeltaStatus::Unchanged
                    };
                    MetricDelta {
                        id: m.id,
                        status,
                        baseline_mean: Some(base),
                        current_mean: cur,
                        mean_delta: Some(cur - base),
                        score_delta: Some(ds),
                    }
                }
            }
        })
        .collect();
    ComparisonReport {
        baseline_path: baseline_path.to_path_buf(),
        baseline_system: baseline.system.name,
        current_system: current.system.name,
        threshold_points,
        overall_delta: (current.overall.weighted_score - baseline.overall.weighted_score) * 100.0,
        deltas,
    }
}
