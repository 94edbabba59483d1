//! Per-metric scores, MIG deviation, category aggregation and grading.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Category, CategoryWeights, Direction, MetricId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScoreError {
    #[error("expected value must be positive, got {0}")]
    NonPositiveExpected(f64),
    #[error("actual value {0} is not positive for a lower-is-better metric")]
    NonPositiveActual(f64),
    #[error("boolean metric outcome must be 0 or 1, got {0}")]
    NotBoolean(f64),
    #[error("value {0} is not finite")]
    NonFinite(f64),
    #[error("no scores for category")]
    EmptyCategory,
    #[error("missing score for category {0}")]
    MissingCategory(Category),
    #[error("overall score {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error(transparent)]
    Weights(#[from] crate::catalog::CatalogError),
}

fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

fn check(actual: f64, expected: f64, direction: Direction) -> Result<(), ScoreError> {
    if !actual.is_finite() {
        return Err(ScoreError::NonFinite(actual));
    }
    match direction {
        Direction::BooleanTrue => {
            if actual != 0.0 && actual != 1.0 {
                return Err(ScoreError::NotBoolean(actual));
            }
        }
        _ => {
            if !(expected > 0.0) || !expected.is_finite() {
                return Err(ScoreError::NonPositiveExpected(expected));
            }
        }
    }
    Ok(())
}

/// Normalized score in [0, 1].
pub fn metric_score(actual: f64, expected: f64, direction: Direction) -> Result<f64, ScoreError> {
    check(actual, expected, direction)?;
    match direction {
        Direction::LowerBetter => {
            if actual <= 0.0 {
                return Err(ScoreError::NonPositiveActual(actual));
            }
            Ok(clamp01(expected / actual))
        }
        Direction::HigherBetter => Ok(clamp01(actual / expected)),
        Direction::BooleanTrue => Ok(actual),
    }
}

/// Signed percent deviation from the MIG baseline; positive means better than
/// the baseline. Boolean metrics deviate by 0 on pass and -100 on fail.
pub fn mig_deviation(actual: f64, expected: f64, direction: Direction) -> Result<f64, ScoreError> {
    check(actual, expected, direction)?;
    Ok(match direction {
        Direction::HigherBetter => (actual - expected) / expected * 100.0,
        Direction::LowerBetter => (expected - actual) / expected * 100.0,
        Direction::BooleanTrue => (actual - 1.0) * 100.0,
    })
}

/// Score plus MIG comparison for one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricScore {
    pub id: MetricId,
    pub score: f64,
    pub mig_deviation_percent: f64,
    pub mig_gap_percent: f64,
}

impl MetricScore {
    pub fn compute(id: MetricId, actual: f64, expected: f64, direction: Direction) -> Result<MetricScore, ScoreError> {
        let deviation = mig_deviation(actual, expected, direction)?;
        Ok(MetricScore {
            id,
            score: metric_score(actual, expected, direction)?,
            mig_deviation_percent: deviation,
            mig_gap_percent: deviation.abs(),
        })
    }
}

pub fn category_score(scores: &[f64]) -> Result<f64, ScoreError> {
    if scores.is_empty() {
        return Err(ScoreError::EmptyCategory);
    }
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Weighted sum over all ten categories.
pub fn overall_score(category_scores: &BTreeMap<Category, f64>, weights: &CategoryWeights) -> Result<f64, ScoreError> {
    weights.validate()?;
    let mut total = 0.0;
    for (c, w) in weights.iter() {
        let s = category_scores
            .get(&c)
            .ok_or(ScoreError::MissingCategory(c))?;
        total += w * s;
    }
    Ok(clamp01(total))
}

/// Weighted sum over the categories that are present, renormalized by their
/// total weight. Used for filtered runs.
pub fn partial_overall_score(category_scores: &BTreeMap<Category, f64>, weights: &CategoryWeights) -> Result<f64, ScoreError> {
    if category_scores.is_empty() {
        return Err(ScoreError::EmptyCategory);
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (c, s) in category_scores {
        num += weights.get(*c) * s;
        den += weights.get(*c);
    }
    if den <= 0.0 {
        return category_score(&category_scores.values().copied().collect::<Vec<_>>());
    }
    Ok(clamp01(num / den))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Grade {
    APlus,
    A,
    BPlus,
    B,
    C,
    D,
    F,
}

impl Grade {
    pub fn letter(self) -> &'static str {
        match self {
            Grade::APlus => "A+",
            Grade::A => "A",
            Grade::BPlus => "B+",
            Grade::B => "B",
            Grade::C => "C",
            Grade::D => "D",
            Grade::F => "F",
        }
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.letter())
    }
}

impl FromStr for Grade {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Grade::APlus, Grade::A, Grade::BPlus, Grade::B, Grade::C, Grade::D, Grade::F]
            .into_iter()
            .find(|g| g.letter() == s)
            .ok_or_else(|| format!("unknown grade `{s}`"))
    }
}

impl Serialize for Grade {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.letter())
    }
}

impl<'de> Deserialize<'de> for Grade {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Letter grade for an overall score in [0, 1]. Lower bounds are inclusive.
pub fn grade_of(overall: f64) -> Result<Grade, ScoreError> {
    if !(0.0..=1.0).contains(&overall) {
        return Err(ScoreError::OutOfRange(overall));
    }
    // Round away binary noise so 0.95 lands on 95 exactly.
    let pct = (overall * 100.0 * 1e9).round() / 1e9;
    Ok(match pct {
        p if p >= 95.0 => Grade::APlus,
        p if p >= 90.0 => Grade::A,
        p if p >= 85.0 => Grade::BPlus,
        p if p >= 80.0 => Grade::B,
        p if p >= 70.0 => Grade::C,
        p if p >= 60.0 => Grade::D,
        _ => Grade::F,
    })
}

/// Weighted graceful-handling score in percent.
pub fn graceful_degradation_score(no_crash: bool, error_returned: bool, recovered: bool) -> f64 {
    let b = |x: bool| if x { 1.0 } else { 0.0 };
    100.0 * (0.4 * b(no_crash) + 0.3 * b(error_returned) + 0.3 * b(recovered))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    use Direction::*;

    #[test]
    fn metric_score_examples() {
        assert_eq!(metric_score(5.0, 5.0, LowerBetter).unwrap(), 1.0);
        assert_eq!(metric_score(10.0, 5.0, LowerBetter).unwrap(), 0.5);
        let s = metric_score(15.3, 5.0, LowerBetter).unwrap();
        assert!((s - 5.0 / 15.3).abs() < 1e-12);
        assert!((s - 0.3268).abs() < 1e-4);
        assert_eq!(metric_score(2.0, 5.0, LowerBetter).unwrap(), 1.0);
        assert_eq!(metric_score(50.0, 100.0, HigherBetter).unwrap(), 0.5);
        assert_eq!(metric_score(1.0, 1.0, BooleanTrue).unwrap(), 1.0);
        assert_eq!(metric_score(0.0, 1.0, BooleanTrue).unwrap(), 0.0);
    }

    #[test]
    fn metric_score_errors() {
        assert!(matches!(metric_score(0.0, 5.0, LowerBetter), Err(ScoreError::NonPositiveActual(_))));
        assert!(matches!(metric_score(1.0, 0.0, HigherBetter), Err(ScoreError::NonPositiveExpected(_))));
        assert!(matches!(metric_score(0.5, 1.0, BooleanTrue), Err(ScoreError::NotBoolean(_))));
    }

    #[test]
    fn deviation_examples() {
        assert_eq!(mig_deviation(5.0, 5.0, LowerBetter).unwrap(), 0.0);
        assert!((mig_deviation(15.3, 5.0, LowerBetter).unwrap() + 206.0).abs() < 1e-9);
        assert!((mig_deviation(110.0, 100.0, HigherBetter).unwrap() - 10.0).abs() < 1e-9);
        let ms = MetricScore::compute("OH-001".parse().unwrap(), 15.3, 5.0, LowerBetter).unwrap();
        assert!((ms.mig_gap_percent - 206.0).abs() < 1e-9);
    }

    #[test]
    fn category_examples() {
        assert_eq!(category_score(&[1.0, 1.0]).unwrap(), 1.0);
        assert!((category_score(&[0.2, 0.4, 0.6]).unwrap() - 0.4).abs() < 1e-12);
        assert!(category_score(&[]).is_err());
    }

    fn all(v: f64) -> BTreeMap<Category, f64> {
        Category::ALL.into_iter().map(|c| (c, v)).collect()
    }

    fn defaults() -> CategoryWeights {
        CategoryWeights::new([0.15, 0.20, 0.20, 0.10, 0.08, 0.07, 0.05, 0.07, 0.04, 0.04]).unwrap()
    }

    #[test]
    fn overall_examples() {
        assert!((overall_score(&all(1.0), &defaults()).unwrap() - 1.0).abs() < 1e-12);
        assert!((overall_score(&all(0.5), &defaults()).unwrap() - 0.5).abs() < 1e-12);
        let mut missing = all(1.0);
        missing.remove(&Category::Cache);
        assert!(matches!(
            overall_score(&missing, &defaults()),
            Err(ScoreError::MissingCategory(Category::Cache))
        ));
    }

    #[test]
    fn grade_examples() {
        assert_eq!(grade_of(0.852).unwrap(), Grade::BPlus);
        assert_eq!(grade_of(0.720).unwrap(), Grade::C);
        let bounds = [(0.95, "A+"), (0.90, "A"), (0.85, "B+"), (0.80, "B"), (0.70, "C"), (0.60, "D")];
        for (x, g) in bounds {
            assert_eq!(grade_of(x).unwrap().letter(), g, "{x}");
        }
        assert_eq!(grade_of(0.5999).unwrap(), Grade::F);
        assert_eq!(grade_of(0.0).unwrap(), Grade::F);
        assert!(grade_of(1.01).is_err());
        assert!(grade_of(-0.01).is_err());
    }

    #[test]
    fn graceful_examples() {
        assert_eq!(graceful_degradation_score(true, true, true), 100.0);
        assert_eq!(graceful_degradation_score(false, false, false), 0.0);
        assert!((graceful_degradation_score(true, false, true) - 70.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn lower_better_is_monotone(e in 0.1f64..100.0, a in 0.01f64..1e3, d in 0.0f64..1e3) {
            let s1 = metric_score(a, e, LowerBetter).unwrap();
            let s2 = metric_score(a + d, e, LowerBetter).unwrap();
            prop_assert!(s2 <= s1);
        }

        #[test]
        fn higher_better_is_monotone(e in 0.1f64..100.0, a in 0.0f64..1e3, d in 0.0f64..1e3) {
            let s1 = metric_score(a, e, HigherBetter).unwrap();
            let s2 = metric_score(a + d, e, HigherBetter).unwrap();
            prop_assert!(s2 >= s1);
        }

        #[test]
        fn deviation_sign_matches_unclamped_score(e in 0.1f64..100.0, a in 0.01f64..1e3, higher in any::<bool>()) {
            let dir = if higher { HigherBetter } else { LowerBetter };
            let raw = if higher { a / e } else { e / a };
            let dev = mig_deviation(a, e, dir).unwrap();
            prop_assert_eq!(dev > 0.0, raw > 1.0);
        }

        #[test]
        fn overall_ignores_order_and_equals_mean_for_uniform_weights(v in prop::collection::vec(0.0f64..1.0, 10)) {
            let map: BTreeMap<Category, f64> = Category::ALL.into_iter().zip(v.iter().copied()).collect();
            let rev: BTreeMap<Category, f64> = Category::ALL.into_iter().rev().zip(v.iter().rev().copied()).collect();
            let w = CategoryWeights::uniform();
            let a = overall_score(&map, &w).unwrap();
            prop_assert!((a - overall_score(&rev, &w).unwrap()).abs() < 1e-12);
            let mean = v.iter().sum::<f64>() / 10.0;
            prop_assert!((a - mean).abs() < 1e-12);
        }
    }
}
