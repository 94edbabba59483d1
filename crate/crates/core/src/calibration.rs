//! Calibration files: MIG baselines, calibration targets, category weights
//! and simulator parameters.
//!
//! The format is line-oriented `key = value` text. `#` starts a comment.
//! Recognized keys:
//!
//! ```text
//! calibration.version = 1
//! OH-001.mig_expected = 5.0
//! OH-001.hami.target = 15.3
//! IS-005.fcsp.target = pass
//! weights.overhead = 0.15
//! sim.hami.hook_ns = 85
//! ```
//!
//! Unknown keys and keys repeated within one file are errors. When a user file
//! is layered over the built-in profiles its entries replace the built-in
//! values.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::catalog::{Category, MetricId};
use crate::mode::Mode;
use crate::sim::BackendModel;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalibrationError {
    #[error("{origin}:{line}: expected `key = value`")]
    Syntax { origin: String, line: usize },
    #[error("{origin}:{line}: unknown metric id in key `{key}`")]
    UnknownMetric {
        origin: String,
        line: usize,
        key: String,
    },
    #[error("{origin}:{line}: unknown key `{key}`")]
    UnknownKey {
        origin: String,
        line: usize,
        key: String,
    },
    #[error("{origin}:{line}: duplicate key `{key}`")]
    Duplicate {
        origin: String,
        line: usize,
        key: String,
    },
    #[error("{origin}:{line}: `{value}` is not a finite number")]
    Value {
        origin: String,
        line: usize,
        value: String,
    },
    #[error("cannot read calibration file {path}: {message}")]
    Read { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Version,
    MigExpected(MetricId),
    Target(MetricId, Mode),
    Weight(Category),
    Sim(Mode, &'static str),
}

/// A merged set of calibration entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Calibration {
    entries: BTreeMap<Key, f64>,
}

const BUILTIN: [(&str, &str); 5] = [
    ("builtin:metrics.cal", include_str!("../calibration/metrics.cal")),
    ("builtin:native.cal", include_str!("../calibration/native.cal")),
    ("builtin:hami.cal", include_str!("../calibration/hami.cal")),
    ("builtin:fcsp.cal", include_str!("../calibration/fcsp.cal")),
    ("builtin:mig.cal", include_str!("../calibration/mig.cal")),
];

impl Calibration {
    /// The shipped profiles for all four modes.
    pub fn builtin() -> Calibration {
        let mut cal = Calibration::default();
        for (origin, text) in BUILTIN {
            let layer = Calibration::parse(text, origin)
                .unwrap_or_else(|e| panic!("shipped calibration is invalid: {e}"));
            cal.overlay(layer);
        }
        cal
    }

    /// Built-in profiles, overridden by `path` when given.
    pub fn load(path: Option<&Path>) -> Result<Calibration, CalibrationError> {
        let mut cal = Calibration::builtin();
        if let Some(path) = path {
            let text = fs::read_to_string(path).map_err(|e| CalibrationError::Read {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            cal.overlay(Calibration::parse(&text, &path.display().to_string())?);
        }
        Ok(cal)
    }

    /// Parses one file. `origin` is used in error messages.
    pub fn parse(text: &str, origin: &str) -> Result<Calibration, CalibrationError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content.split_once('=').ok_or_else(|| CalibrationError::Syntax {
                origin: origin.to_string(),
                line,
            })?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                return Err(CalibrationError::Syntax {
                    origin: origin.to_string(),
                    line,
                });
            }
            let key = parse_key(k).map_err(|unknown_metric| {
                if unknown_metric {
                    CalibrationError::UnknownMetric {
                        origin: origin.to_string(),
                        line,
                        key: k.to_string(),
                    }
                } else {
                    CalibrationError::UnknownKey {
                        origin: origin.to_string(),
                        line,
                        key: k.to_string(),
                    }
                }
            })?;
            let value = parse_value(v).ok_or_else(|| CalibrationError::Value {
                origin: origin.to_string(),
                line,
                value: v.to_string(),
            })?;
            if entries.insert(key, value).is_some() {
                return Err(CalibrationError::Duplicate {
                    origin: origin.to_string(),
                    line,
                    key: k.to_string(),
                });
            }
        }
        Ok(Calibration { entries })
    }

    /// Replaces entries of `self` with those present in `other`.
    pub fn overlay(&mut self, other: Calibration) {
        self.entries.extend(other.entries);
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn version(&self) -> Option<f64> {
        self.entries.get(&Key::Version).copied()
    }

    pub fn mig_expected(&self, id: MetricId) -> Option<f64> {
        self.entries.get(&Key::MigExpected(id)).copied()
    }

    pub fn target(&self, id: MetricId, mode: Mode) -> Option<f64> {
        self.entries.get(&Key::Target(id, mode)).copied()
    }

    pub fn weight(&self, c: Category) -> Option<f64> {
        self.entries.get(&Key::Weight(c)).copied()
    }

    pub fn sim_param(&self, mode: Mode, name: &str) -> Option<f64> {
        self.entries
            .iter()
            .find_map(|(k, v)| match k {
                Key::Sim(m, n) if *m == mode && *n == name => Some(*v),
                _ => None,
            })
    }

    /// All `(metric, mode) -> target` entries.
    pub fn targets(&self) -> impl Iterator<Item = ((MetricId, Mode), f64)> + '_ {
        self.entries.iter().filter_map(|(k, v)| match k {
            Key::Target(id, m) => Some(((*id, *m), *v)),
            _ => None,
        })
    }

    /// All simulator parameters declared for `mode`.
    pub fn sim_params(&self, mode: Mode) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        self.entries.iter().filter_map(move |(k, v)| match k {
            Key::Sim(m, n) if *m == mode => Some((*n, *v)),
            _ => None,
        })
    }
}

/// `Err(true)` flags an unknown metric id, `Err(false)` any other bad key.
fn parse_key(k: &str) -> Result<Key, bool> {
    let parts: Vec<&str> = k.split('.').collect();
    match parts.as_slice() {
        ["calibration", "version"] => Ok(Key::Version),
        ["weights", cat] => Category::from_key(cat).map(Key::Weight).ok_or(false),
        ["sim", mode, param] => {
            let mode: Mode = mode.parse().map_err(|_| false)?;
            let name = BackendModel::param_name(param).ok_or(false)?;
            Ok(Key::Sim(mode, name))
        }
        [id, "mig_expected"] => {
            let id: MetricId = id.parse().map_err(|_| true)?;
            Ok(Key::MigExpected(id))
        }
        [id, mode, "target"] => {
            let id: MetricId = id.parse().map_err(|_| true)?;
            let mode: Mode = mode.parse().map_err(|_| false)?;
            Ok(Key::Target(id, mode))
        }
        _ => Err(false),
    }
}

fn parse_value(v: &str) -> Option<f64> {
    match v {
        "pass" | "true" => Some(1.0),
        "fail" | "false" => Some(0.0),
        _ => v.parse::<f64>().ok().filter(|x| x.is_finite()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> MetricId {
        s.parse().unwrap()
    }

    #[test]
    fn builtin_profiles_parse() {
        let cal = Calibration::builtin();
        assert!(cal.version().is_some());
        assert_eq!(cal.mig_expected(id("OH-001")), Some(5.0));
        assert_eq!(cal.target(id("OH-001"), Mode::Hami), Some(15.3));
        assert_eq!(cal.target(id("IS-005"), Mode::Fcsp), Some(1.0));
        assert_eq!(cal.weight(Category::Isolation), Some(0.20));
        assert_eq!(cal.sim_param(Mode::Hami, "hook_ns"), Some(85.0));
        assert_eq!(cal.sim_param(Mode::Native, "hook_ns"), Some(0.0));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let cal = Calibration::parse(
            "# header\n\nOH-001.mig_expected = 6.5   # trailing\n  weights.cache=0.08\n",
            "t",
        )
        .unwrap();
        assert_eq!(cal.mig_expected(id("OH-001")), Some(6.5));
        assert_eq!(cal.weight(Category::Cache), Some(0.08));
    }

    #[test]
    fn unknown_metric_is_named() {
        let err = Calibration::parse("XX-999.mig_expected = 1", "f.cal").unwrap_err();
        assert!(matches!(err, CalibrationError::UnknownMetric { .. }));
        assert!(err.to_string().contains("XX-999"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for text in [
            "OH-001.baseline = 1",
            "weights.gpu = 0.1",
            "sim.hami.warp_speed = 9",
            "sim.vgpu.hook_ns = 1",
            "OH-001.vgpu.target = 1",
            "colour = blue",
        ] {
            let err = Calibration::parse(text, "t").unwrap_err();
            assert!(matches!(err, CalibrationError::UnknownKey { .. }), "{text}: {err}");
        }
    }

    #[test]
    fn duplicates_within_a_file_are_rejected() {
        let err = Calibration::parse("OH-001.mig_expected = 1\nOH-001.mig_expected = 2", "t")
            .unwrap_err();
        assert!(matches!(err, CalibrationError::Duplicate { line: 2, .. }));
    }

    #[test]
    fn syntax_and_value_errors() {
        assert!(matches!(
            Calibration::parse("OH-001.mig_expected", "t"),
            Err(CalibrationError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            Calibration::parse("OH-001.mig_expected = fast", "t"),
            Err(CalibrationError::Value { .. })
        ));
        assert!(matches!(
            Calibration::parse("OH-001.mig_expected = NaN", "t"),
            Err(CalibrationError::Value { .. })
        ));
    }

    #[test]
    fn user_file_overrides_builtin() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("override.cal");
        fs::write(&path, "OH-002.mig_expected = 99\nsim.fcsp.hook_ns = 1\n").unwrap();
        let cal = Calibration::load(Some(&path)).unwrap();
        assert_eq!(cal.mig_expected(id("OH-002")), Some(99.0));
        assert_eq!(cal.sim_param(Mode::Fcsp, "hook_ns"), Some(1.0));
        assert_eq!(cal.mig_expected(id("OH-001")), Some(5.0));
    }

    #[test]
    fn missing_file_is_a_read_error() {
        let err = Calibration::load(Some(Path::new("/nonexistent/x.cal"))).unwrap_err();
        assert!(matches!(err, CalibrationError::Read { .. }));
    }
}
