use std::fmt::Write;

use super::{BenchmarkReport, ComparisonReport, DeltaStatus};

const WORST: usize = 5;

fn pct(v: f64) -> String {
    format!("{:.1}%", v * 100.0)
}

/// Human-readable summary.
pub fn emit_txt(r: &BenchmarkReport) -> String {
    let mut o = String::new();
    let c = &r.config;
    let _ = writeln!(
        o,
        "virtbench {} | {} ({}) | seed {}",
        r.benchmark_version, r.system.display_name, r.system.name, c.seed
    );
    let _ = writeln!(o, "Generated: {}", r.generated_at);
    let _ = writeln!(
        o,
        "Iterations: {} (warmup {})  Tenants: {} (contended {})",
        c.iterations, c.warmup, c.tenants, c.contended_tenants
    );
    let _ = writeln!(o);
    let _ = writeln!(o, "{:<30} {:>7} {:>8}", "Category", "Weight", "Score");
    for cat in &r.categories {
        let _ = writeln!(o, "{:<30} {:>7} {:>8}", cat.name, pct(cat.weight), pct(cat.score));
    }
    let _ = writeln!(o);
    let parity = r.overall.mig_parity.map_or_else(|| "--".to_string(), pct);
    let _ = writeln!(
        o,
        "Overall: {}  Grade: {}  MIG parity: {}",
        pct(r.overall.weighted_score),
        r.overall.grade,
        parity
    );
    let _ = writeln!(o);
    let mut worst: Vec<_> = r.metrics.iter().collect();
    worst.sort_by(|a, b| a.score.total_cmp(&b.score));
    let _ = writeln!(o, "Lowest scores:");
    for m in worst.into_iter().take(WORST) {
        let unit = serde_json::to_value(m.unit).ok();
        let unit = unit.as_ref().and_then(|u| u.as_str()).unwrap_or("");
        let shown = match m.outcome {
            Some(out) if out.passed() => "pass".to_string(),
            Some(_) => "fail".to_string(),
            None => format!("{:.4} {unit}", m.primary_value()),
        };
        let cv = m
            .statistics
            .as_ref()
            .and_then(|s| s.cv)
            .map_or_else(|| "n/a".to_string(), |v| format!("{v:.3}"));
        let _ = writeln!(
            o,
            "  {:<10} {:<34} {:>7}  {:<20} cv {}",
            m.id.to_string(),
            m.name,
            pct(m.score),
            shown,
            cv
        );
    }
    o
}

pub fn emit_comparison_txt(c: &ComparisonReport) -> String {
    let mut o = String::new();
    let _ = writeln!(
        o,
        "Comparison: {} (current) vs {} ({})",
        c.current_system,
        c.baseline_system,
        c.baseline_path.display()
    );
    let _ = writeln!(o, "Overall change: {:+.1} points", c.overall_delta);
    for d in &c.deltas {
        let status = match d.status {
            DeltaStatus::Unchanged => "unchanged",
            DeltaStatus::Improved => "improved",
            DeltaStatus::Declined => "declined",
            DeltaStatus::Regressed => "REGRESSED",
            DeltaStatus::New => "new",
        };
        let mean = d.mean_delta.map_or_else(|| "--".to_string(), |v| format!("{v:+.4}"));
        let score = d.score_delta.map_or_else(|| "--".to_string(), |v| format!("{v:+.1}"));
        let _ = writeln!(o, "  {:<10} {:<10} mean {:>14}  score {:>7}", d.id.to_string(), status, mean, score);
    }
    let n = c.regressions().count();
    let _ = writeln!(o, "{n} regression(s) beyond {} points", c.threshold_points);
    o
}
