use crate::error::{Error, Result};

use super::BenchmarkReport;

pub const CSV_HEADER: [&str; 14] = [
    "metric_id",
    "name",
    "category",
    "unit",
    "mean",
    "stddev",
    "median",
    "p95",
    "p99",
    "cv",
    "score",
    "mig_expected",
    "mig_deviation_percent",
    "mig_gap_percent",
];

// Same digits serde_json prints.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// One row per metric. Scalar and pass/fail metrics fill only the `mean`
/// column of the statistics block.
pub fn emit_csv(report: &BenchmarkReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for m in &report.metrics {
        let s = m.statistics.as_ref();
        let unit = serde_json::to_value(m.unit)?;
        w.write_record([
            m.id.to_string(),
            m.name.clone(),
            m.category.key().to_string(),
            unit.as_str().unwrap_or_default().to_string(),
            num(m.primary_value()),
            opt(s.map(|s| s.stddev)),
            opt(s.map(|s| s.median)),
            opt(s.map(|s| s.p95)),
            opt(s.map(|s| s.p99)),
            opt(s.and_then(|s| s.cv)),
            num(m.score),
            num(m.mig_comparison.mig_expected),
            num(m.mig_comparison.mig_deviation_percent),
            num(m.mig_comparison.mig_gap_percent),
        ])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits the UTF-8 it was given"))
}
