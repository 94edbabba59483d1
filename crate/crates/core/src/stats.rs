//! Sample aggregation and the shared fairness / efficiency formulas.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("sample set is empty")]
    Empty,
    #[error("sample {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("percentile {0} outside (0, 100]")]
    PercentileRange(f64),
    #[error("coefficient of variation undefined for mean {0}")]
    UndefinedCv(f64),
    #[error("fairness index undefined: {0}")]
    Degenerate(&'static str),
    #[error("baseline must be positive, got {0}")]
    NonPositiveBaseline(f64),
    #[error("count must be at least 1")]
    ZeroCount,
}

/// An ordered, non-empty list of finite measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet(Vec<f64>);

impl SampleSet {
    pub fn new(values: Vec<f64>) -> Result<SampleSet, StatsError> {
        if values.is_empty() {
            return Err(StatsError::Empty);
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(StatsError::NonFinite { index, value });
        }
        Ok(SampleSet(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }

    /// Sample standard deviation (n-1 divisor), 0 for a single sample.
    pub fn stddev(&self) -> f64 {
        let n = self.0.len();
        if n < 2 {
            return 0.0;
        }
        let mean = self.mean();
        let ss: f64 = self.0.iter().map(|x| (x - mean) * (x - mean)).sum();
        (ss / (n - 1) as f64).sqrt()
    }

    fn sorted(&self) -> Vec<f64> {
        let mut v = self.0.clone();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// Summary statistics of a [`SampleSet`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Statistics {
    pub mean: f64,
    pub stddev: f64,
    pub median: f64,
    pub p95: f64,
    pub p99: f64,
    /// `None` when the mean is not positive.
    pub cv: Option<f64>,
    pub n: usize,
}

pub fn compute_stats(samples: &SampleSet) -> Statistics {
    let sorted = samples.sorted();
    let mean = samples.mean();
    let stddev = samples.stddev();
    Statistics {
        mean,
        stddev,
        median: nearest_rank(&sorted, 50.0),
        p95: nearest_rank(&sorted, 95.0),
        p99: nearest_rank(&sorted, 99.0),
        cv: (mean > 0.0).then(|| stddev / mean),
        n: samples.len(),
    }
}

/// Nearest-rank percentile: the value at 1-based index ceil(p/100 * n) of the
/// ascending sort.
pub fn percentile(samples: &SampleSet, p: f64) -> Result<f64, StatsError> {
    if !(p > 0.0 && p <= 100.0) {
        return Err(StatsError::PercentileRange(p));
    }
    Ok(nearest_rank(&samples.sorted(), p))
}

fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = ((p / 100.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

pub fn coefficient_of_variation(samples: &SampleSet) -> Result<f64, StatsError> {
    let mean = samples.mean();
    if mean <= 0.0 {
        return Err(StatsError::UndefinedCv(mean));
    }
    Ok(samples.stddev() / mean)
}

/// Jain's fairness index `(sum x)^2 / (n * sum x^2)`.
pub fn jains_index(throughputs: &[f64]) -> Result<f64, StatsError> {
    if throughputs.is_empty() {
        return Err(StatsError::Empty);
    }
    if throughputs.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(StatsError::Degenerate("throughputs must be finite and non-negative"));
    }
    let sum: f64 = throughputs.iter().sum();
    let sq: f64 = throughputs.iter().map(|x| x * x).sum();
    if sq == 0.0 {
        return Err(StatsError::Degenerate("all throughputs are zero"));
    }
    let n = throughputs.len() as f64;
    Ok(((sum * sum) / (n * sq)).min(1.0))
}

/// `thr_n / (n * thr_1)`; 1.0 is linear scaling.
pub fn scaling_efficiency(throughput_at_n: f64, throughput_at_1: f64, n: u32) -> Result<f64, StatsError> {
    if n == 0 {
        return Err(StatsError::ZeroCount);
    }
    if throughput_at_1 <= 0.0 {
        return Err(StatsError::NonPositiveBaseline(throughput_at_1));
    }
    Ok(throughput_at_n / (n as f64 * throughput_at_1))
}

/// Percent lost relative to `baseline`.
pub fn degradation_percent(baseline: f64, observed: f64) -> Result<f64, StatsError> {
    if baseline <= 0.0 {
        return Err(StatsError::NonPositiveBaseline(baseline));
    }
    Ok((baseline - observed) / baseline * 100.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(v: &[f64]) -> SampleSet {
        SampleSet::new(v.to_vec()).unwrap()
    }

    #[test]
    fn constant_samples() {
        let s = compute_stats(&set(&[5.0; 4]));
        assert_eq!((s.mean, s.stddev, s.cv), (5.0, 0.0, Some(0.0)));
    }

    #[test]
    fn odd_median() {
        assert_eq!(compute_stats(&set(&[1.0, 2.0, 3.0, 4.0, 5.0])).median, 3.0);
    }

    #[test]
    fn one_to_hundred() {
        let s = set(&(1..=100).map(f64::from).collect::<Vec<_>>());
        let st = compute_stats(&s);
        assert_eq!((st.p95, st.p99, st.median), (95.0, 99.0, 50.0));
        assert_eq!(percentile(&s, 50.0).unwrap(), 50.0);
    }

    #[test]
    fn percentile_edges() {
        assert_eq!(percentile(&set(&[10.0]), 99.0).unwrap(), 10.0);
        assert_eq!(percentile(&set(&[3.0, 1.0, 2.0]), 100.0).unwrap(), 3.0);
        for p in [0.0, -1.0, 100.5, f64::NAN] {
            assert!(percentile(&set(&[1.0]), p).is_err(), "{p}");
        }
    }

    #[test]
    fn cv_examples() {
        assert_eq!(coefficient_of_variation(&set(&[10.0; 3])).unwrap(), 0.0);
        let cv = coefficient_of_variation(&set(&[8.0, 12.0])).unwrap();
        assert!((cv - 8f64.sqrt() / 10.0).abs() < 1e-12);
        assert!(matches!(
            coefficient_of_variation(&set(&[0.0, 0.0])),
            Err(StatsError::UndefinedCv(_))
        ));
        assert_eq!(compute_stats(&set(&[-1.0, 0.0])).cv, None);
    }

    #[test]
    fn sample_set_rejects_bad_input() {
        assert_eq!(SampleSet::new(vec![]), Err(StatsError::Empty));
        assert!(matches!(
            SampleSet::new(vec![1.0, f64::INFINITY]),
            Err(StatsError::NonFinite { index: 1, .. })
        ));
    }

    #[test]
    fn jains_examples() {
        assert_eq!(jains_index(&[7.0; 4]).unwrap(), 1.0);
        assert_eq!(jains_index(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 0.25);
        assert!(jains_index(&[0.0; 3]).is_err());
        assert!(jains_index(&[]).is_err());
        assert!(jains_index(&[-1.0, 2.0]).is_err());
    }

    #[test]
    fn scaling_examples() {
        assert_eq!(scaling_efficiency(100.0, 100.0, 1).unwrap(), 1.0);
        assert_eq!(scaling_efficiency(400.0, 100.0, 4).unwrap(), 1.0);
        assert!((scaling_efficiency(312.0, 100.0, 4).unwrap() - 0.78).abs() < 1e-12);
        assert!(scaling_efficiency(1.0, 0.0, 4).is_err());
        assert!(scaling_efficiency(1.0, 1.0, 0).is_err());
    }

    #[test]
    fn degradation_examples() {
        assert_eq!(degradation_percent(100.0, 100.0).unwrap(), 0.0);
        assert!((degradation_percent(100.0, 81.5).unwrap() - 18.5).abs() < 1e-9);
        assert!((degradation_percent(100.0, 90.8).unwrap() - 9.2).abs() < 1e-9);
        assert!(degradation_percent(0.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn stats_are_permutation_invariant(mut v in prop::collection::vec(-1e6f64..1e6, 1..64), seed in any::<u64>()) {
            let a = compute_stats(&set(&v));
            // deterministic shuffle
            let mut s = seed;
            for i in (1..v.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                v.swap(i, (s >> 33) as usize % (i + 1));
            }
            let b = compute_stats(&set(&v));
            prop_assert_eq!(a.median, b.median);
            prop_assert_eq!(a.p95, b.p95);
            prop_assert_eq!(a.p99, b.p99);
            prop_assert!((a.mean - b.mean).abs() <= 1e-9 * (1.0 + a.mean.abs()));
            prop_assert!((a.stddev - b.stddev).abs() <= 1e-6 * (1.0 + a.stddev));
        }

        #[test]
        fn percentiles_are_ordered(v in prop::collection::vec(-1e6f64..1e6, 1..64)) {
            let s = compute_stats(&set(&v));
            prop_assert!(s.median <= s.p95 && s.p95 <= s.p99);
            prop_assert!(s.stddev >= 0.0);
        }

        #[test]
        fn jains_range_and_scale(v in prop::collection::vec(0.0f64..1e3, 1..32), k in 1e-3f64..1e3) {
            prop_assume!(v.iter().any(|x| *x > 0.0));
            let n = v.len() as f64;
            let j = jains_index(&v).unwrap();
            prop_assert!(j >= 1.0 / n - 1e-12 && j <= 1.0);
            let scaled: Vec<f64> = v.iter().map(|x| x * k).collect();
            prop_assert!((jains_index(&scaled).unwrap() - j).abs() < 1e-9);
        }

        #[test]
        fn degradation_antisymmetric(b in 1e-3f64..1e6, d in -1e6f64..1e6) {
            prop_assert_eq!(degradation_percent(b, b).unwrap(), 0.0);
            let up = degradation_percent(b, b + d).unwrap();
            let down = degradation_percent(b, b - d).unwrap();
            prop_assert!((up + down).abs() < 1e-6 * (1.0 + up.abs()));
        }
    }
}
