use crate::error::Result;

use super::BenchmarkReport;

/// Pretty-printed JSON with a trailing newline. Field order follows the
/// struct definitions, and floats use the shortest round-trip form.
pub fn emit_json(report: &BenchmarkReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

pub fn parse_json(text: &str) -> Result<BenchmarkReport> {
    Ok(serde_json::from_str(text)?)
}
