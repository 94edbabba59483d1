use std::fs;
use std::sync::OnceLock;

use proptest::prelude::*;
use virtbench::report::{emit_csv, emit_json, emit_txt, parse_json, write_outputs, DeltaStatus, CSV_HEADER};
use virtbench::runner::{compare_reports, diff};
use virtbench::{run_benchmark, BenchmarkReport, Calibration, Catalog, MetricId, Mode, RunConfig};

fn cal() -> &'static Calibration {
    static CAL: OnceLock<Calibration> = OnceLock::new();
    CAL.get_or_init(Calibration::builtin)
}

fn catalog() -> &'static Catalog {
    static CAT: OnceLock<Catalog> = OnceLock::new();
    CAT.get_or_init(|| Catalog::from_calibration(cal()).unwrap())
}

fn run(mode: Mode, metrics: Option<&[&str]>) -> BenchmarkReport {
    let mut c = RunConfig::for_system(mode);
    c.metric_filter = metrics.map(|ids| ids.iter().map(|s| s.parse().unwrap()).collect());
    run_benchmark(&c, catalog(), cal()).unwrap()
}

fn full(mode: Mode) -> &'static BenchmarkReport {
    static R: OnceLock<Vec<BenchmarkReport>> = OnceLock::new();
    let all = R.get_or_init(|| Mode::ALL.iter().map(|m| run(*m, None)).collect());
    &all[Mode::ALL.iter().position(|m| *m == mode).unwrap()]
}

fn id(s: &str) -> MetricId {
    s.parse().unwrap()
}

#[test]
fn single_metric_report() {
    let r = run(Mode::Hami, Some(&["OH-001"]));
    assert_eq!(r.metrics.len(), 1);
    assert_eq!(r.categories.len(), 1);
    assert_eq!(r.overall.weighted_score, r.metrics[0].score);
    assert_eq!(r.config.metrics.as_deref(), Some(&[id("OH-001")][..]));
}

#[test]
fn comparing_with_self_changes_nothing() {
    let r = full(Mode::Fcsp);
    let c = diff(r, r, "self.json".as_ref(), 5.0);
    assert_eq!(c.overall_delta, 0.0);
    assert!(c.deltas.iter().all(|d| d.status == DeltaStatus::Unchanged && d.score_delta == Some(0.0)));
    assert!(c.regressions().next().is_none());
}

#[test]
fn fcsp_against_hami_baseline() {
    let c = diff(full(Mode::Fcsp), full(Mode::Hami), "hami.json".as_ref(), 5.0);
    let oh = c.deltas.iter().find(|d| d.id == id("OH-001")).unwrap();
    let delta = oh.mean_delta.unwrap();
    assert!((delta + 6.6).abs() < 0.3, "OH-001 mean delta {delta}");
    assert_eq!(oh.status, DeltaStatus::Improved);
    assert!(c.overall_delta > 10.0);
}

#[test]
fn metric_missing_from_baseline_is_new() {
    let base = run(Mode::Hami, Some(&["OH-001"]));
    let cur = run(Mode::Hami, Some(&["OH-001", "OH-002"]));
    let c = diff(&cur, &base, "b.json".as_ref(), 5.0);
    let new = c.deltas.iter().find(|d| d.id == id("OH-002")).unwrap();
    assert_eq!(new.status, DeltaStatus::New);
    assert_eq!(new.baseline_mean, None);
}

#[test]
fn compare_reads_saved_report() {
    let dir = tempfile::tempdir().unwrap();
    let paths = write_outputs(full(Mode::Hami), &dir.path().join("hami")).unwrap();
    let c = compare_reports(full(Mode::Fcsp), &paths[0]).unwrap();
    assert_eq!(c.deltas.len(), 56);
    let garbage = dir.path().join("garbage.json");
    fs::write(&garbage, "{").unwrap();
    let err = compare_reports(full(Mode::Fcsp), &garbage).unwrap_err().to_string();
    assert!(err.contains("garbage.json"), "{err}");
}

#[test]
fn mig_scores_are_perfect() {
    let r = full(Mode::Mig);
    assert!(r.metrics.iter().all(|m| m.score == 1.0));
    assert!(r.categories.iter().all(|c| c.score == 1.0));
    assert_eq!(r.overall.mig_parity, Some(1.0));
}

#[test]
fn fault_handling_is_graceful_everywhere() {
    for m in Mode::ALL {
        assert_eq!(full(m).metric(id("ERR-003")).unwrap().primary_value(), 100.0, "{m}");
    }
}

#[test]
fn isolation_checks_pass_for_shipped_systems() {
    for m in Mode::ALL {
        for check in ["IS-005", "IS-010"] {
            assert_eq!(full(m).metric(id(check)).unwrap().score, 1.0, "{m} {check}");
        }
    }
}

#[test]
fn csv_agrees_with_json() {
    let r = full(Mode::Hami);
    let text = emit_csv(r).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rows.headers().unwrap().iter().collect::<Vec<_>>(), CSV_HEADER);
    let records: Vec<_> = rows.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), 56);
    assert_eq!(text.lines().count(), 57);
    for (rec, m) in records.iter().zip(&r.metrics) {
        assert_eq!(&rec[0], m.id.to_string());
        assert_eq!(rec[4].parse::<f64>().unwrap(), m.primary_value());
        assert_eq!(rec[10].parse::<f64>().unwrap(), m.score);
        assert_eq!(rec[11].parse::<f64>().unwrap(), m.mig_comparison.mig_expected);
    }
}

#[test]
fn json_round_trip_is_exact() {
    for m in Mode::ALL {
        let text = emit_json(full(m)).unwrap();
        let back = parse_json(&text).unwrap();
        assert_eq!(&back, full(m));
        assert_eq!(emit_json(&back).unwrap(), text);
    }
}

#[test]
fn text_summary() {
    let fcsp = emit_txt(full(Mode::Fcsp));
    assert!(fcsp.contains("Grade: B+"), "{fcsp}");
    assert!(fcsp.contains("Lowest scores:"));
    let mig = emit_txt(full(Mode::Mig));
    assert!(mig.contains("Overall: 100.0%"), "{mig}");
    assert!(emit_txt(full(Mode::Hami)).contains("Grade: C"));
}

#[test]
fn files_are_written_with_all_extensions() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("nested/native-42");
    let paths = write_outputs(full(Mode::Native), &prefix).unwrap();
    for (p, ext) in paths.iter().zip(["json", "csv", "txt"]) {
        assert_eq!(p.extension().unwrap(), ext);
        assert!(p.is_file());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn filtered_runs_match_full_runs(mask in prop::collection::vec(any::<bool>(), 56), mode in 0usize..4) {
        let mode = Mode::ALL[mode];
        let ids: Vec<MetricId> = MetricId::all().zip(&mask).filter(|(_, k)| **k).map(|(i, _)| i).collect();
        prop_assume!(!ids.is_empty());
        let mut c = RunConfig::for_system(mode);
        c.metric_filter = Some(ids.clone());
        c.parallel = false;
        let r = run_benchmark(&c, catalog(), cal()).unwrap();
        prop_assert_eq!(r.metrics.len(), ids.len());
        for m in &r.metrics {
            prop_assert_eq!(Some(m), full(mode).metric(m.id));
        }
        prop_assert!((0.0..=1.0).contains(&r.overall.weighted_score));
    }
}
