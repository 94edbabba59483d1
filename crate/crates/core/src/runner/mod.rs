//! Benchmark orchestration: configuration, per-metric backends, warmup and
//! result assembly.

mod compare;
mod contention;
mod isolation;
mod llm;
mod memory;
mod overhead;
mod scheduling;

use std::collections::BTreeMap;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::Calibration;
use crate::catalog::{Catalog, Category, Direction, MetricId};
use crate::error::{Error, Result};
use crate::mode::Mode;
use crate::report::{BenchmarkReport, CategoryScore, ConfigEcho, MetricResult, MigComparison, Overall, SystemInfo};
use crate::scoring::{self, MetricScore};
use crate::sim::{rng::derive_seed, BackendModel, SimGpu, MIB};
use crate::stats::{compute_stats, SampleSet};

pub use compare::{compare_reports, compare_with_threshold, diff, MetricDelta, DEFAULT_REGRESSION_THRESHOLD};

/// Tenant count used by multi-tenant metrics when the run is single-tenant.
pub const DEFAULT_CONTENDED_TENANTS: usize = 4;

/// Fixed workload shapes. Defaults describe a small decoder-only inference
/// workload; all of them can be overridden.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Workload {
    pub batch: u32,
    pub seq_len: u32,
    pub embed_dim: u32,
    /// Sustained attention kernel throughput of the device.
    pub attention_tflops: f64,
    pub gen_tokens: u32,
    pub launches_per_token: u32,
    pub prefill_kv_pages: u32,
    pub prefill_compute_us: f64,
    pub decode_compute_us: f64,
    pub batch_schedule: Vec<u32>,
    pub batch_compute_us: f64,
    pub scaling_batch: u32,
    pub frag_rounds: u32,
    pub frag_allocs_per_round: u32,
    pub frag_min_bytes: u64,
    pub frag_max_bytes: u64,
}

impl Default for Workload {
    fn default() -> Self {
        Workload {
            batch: 8,
            seq_len: 1024,
            embed_dim: 512,
            attention_tflops: 17.9,
            gen_tokens: 128,
            launches_per_token: 672,
            prefill_kv_pages: 704,
            prefill_compute_us: 2400.0,
            decode_compute_us: 2520.0,
            batch_schedule: vec![1, 4, 2, 8, 1, 16],
            batch_compute_us: 1600.0,
            scaling_batch: 8,
            frag_rounds: 5,
            frag_allocs_per_round: 2000,
            frag_min_bytes: 1_000_000,
            frag_max_bytes: 64_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: Mode,
    pub iterations: usize,
    pub warmup: usize,
    /// Concurrent tenant streams. Multi-tenant metrics use
    /// [`DEFAULT_CONTENDED_TENANTS`] when this is 1.
    pub tenants: usize,
    pub memory_limit_mb: Option<u64>,
    pub compute_limit_percent: Option<f64>,
    pub metric_filter: Option<Vec<MetricId>>,
    pub seed: u64,
    pub compare_path: Option<PathBuf>,
    pub workload: Workload,
    /// Evaluate metrics on the rayon pool. Output is identical either way.
    pub parallel: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            system: Mode::Native,
            iterations: 100,
            warmup: 10,
            tenants: 1,
            memory_limit_mb: None,
            compute_limit_percent: None,
            metric_filter: None,
            seed: 42,
            compare_path: None,
            workload: Workload::default(),
            parallel: true,
        }
    }
}

impl RunConfig {
    pub fn for_system(system: Mode) -> RunConfig {
        RunConfig {
            system,
            ..RunConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.iterations == 0 {
            return bad("iterations must be at least 1");
        }
        if self.tenants == 0 {
            return bad("tenant count must be at least 1");
        }
        if let Some(c) = self.compute_limit_percent {
            if !(c > 0.0 && c <= 100.0) {
                return bad("compute limit must be in (0, 100]");
            }
        }
        if self.memory_limit_mb == Some(0) {
            return bad("memory limit must be positive");
        }
        if matches!(&self.metric_filter, Some(f) if f.is_empty()) {
            return bad("metric filter is empty");
        }
        let w = &self.workload;
        if w.batch == 0 || w.seq_len == 0 || w.embed_dim == 0 || w.gen_tokens < 2 || w.scaling_batch == 0 {
            return bad("workload shapes must be positive and generate at least 2 tokens");
        }
        if w.batch_schedule.len() < 2 || w.batch_schedule.contains(&0) {
            return bad("batch schedule needs at least two positive entries");
        }
        if !(w.attention_tflops > 0.0) || w.frag_min_bytes == 0 || w.frag_min_bytes > w.frag_max_bytes {
            return bad("invalid workload parameters");
        }
        Ok(())
    }

    /// Tenant count for metrics that need contention.
    pub fn contended_tenants(&self) -> usize {
        if self.tenants >= 2 {
            self.tenants
        } else {
            DEFAULT_CONTENDED_TENANTS
        }
    }

    /// Metrics this run evaluates, in catalog order without duplicates.
    pub fn selected_metrics(&self) -> Vec<MetricId> {
        match &self.metric_filter {
            None => MetricId::all().collect(),
            Some(f) => MetricId::all().filter(|id| f.contains(id)).collect(),
        }
    }
}

/// One metric's raw measurement.
#[derive(Debug, Clone, PartialEq)]
pub enum Measurement {
    Samples(SampleSet),
    Scalar(f64),
    Outcome(bool),
}

impl Measurement {
    /// The value that gets scored.
    pub fn value(&self) -> f64 {
        match self {
            Measurement::Samples(s) => s.mean(),
            Measurement::Scalar(v) => *v,
            Measurement::Outcome(p) => f64::from(u8::from(*p)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluated {
    pub measurement: Measurement,
    pub extra: BTreeMap<String, f64>,
}

impl From<Measurement> for Evaluated {
    fn from(measurement: Measurement) -> Self {
        Evaluated {
            measurement,
            extra: BTreeMap::new(),
        }
    }
}

impl Evaluated {
    fn with(mut self, key: &str, value: f64) -> Self {
        self.extra.insert(key.to_string(), value);
        self
    }
}

/// Runs `warmup + iterations` trials and keeps the last `iterations`.
pub fn sample_with_warmup(
    iterations: usize,
    warmup: usize,
    mut trial: impl FnMut(usize) -> Result<f64>,
) -> Result<SampleSet> {
    let mut kept = Vec::with_capacity(iterations);
    for i in 0..warmup + iterations {
        let v = trial(i)?;
        if i >= warmup {
            kept.push(v);
        }
    }
    Ok(SampleSet::new(kept)?)
}

/// Everything an evaluator needs for one metric.
pub(crate) struct MetricCtx<'a> {
    pub id: MetricId,
    pub config: &'a RunConfig,
    pub model: &'a BackendModel,
    pub native: &'a BackendModel,
    pub seed: u64,
}

impl MetricCtx<'_> {
    pub fn gpu(&self, tenants: usize) -> Result<SimGpu> {
        let mut m = self.model.clone();
        m.rng_seed = self.seed;
        Ok(SimGpu::new(m, tenants)?)
    }

    /// Native backend replaying the same random stream.
    pub fn reference(&self, tenants: usize) -> Result<SimGpu> {
        let mut m = self.native.clone();
        m.rng_seed = self.seed;
        Ok(SimGpu::new(m, tenants)?)
    }

    pub fn sampled(&self, trial: impl FnMut(usize) -> Result<f64>) -> Result<Evaluated> {
        let s = sample_with_warmup(self.config.iterations, self.config.warmup, trial)?;
        Ok(Measurement::Samples(s).into())
    }

    pub fn workload(&self) -> &Workload {
        &self.config.workload
    }

    pub fn contended(&self) -> usize {
        self.config.contended_tenants()
    }

    pub fn fail(&self, message: impl Into<String>) -> Error {
        Error::Run {
            metric: self.id.to_string(),
            message: message.into(),
        }
    }
}

pub(crate) const KV_PAGE_BYTES: u64 = 2 * MIB;

fn evaluate(ctx: &MetricCtx) -> Result<Evaluated> {
    match ctx.id.category() {
        Category::Overhead => overhead::evaluate(ctx),
        Category::Isolation => isolation::evaluate(ctx),
        Category::Llm => llm::evaluate(ctx),
        Category::MemoryBandwidth | Category::Cache | Category::Pcie | Category::NcclP2p => contention::evaluate(ctx),
        Category::Scheduling => scheduling::evaluate(ctx),
        Category::Fragmentation | Category::ErrorRecovery => memory::evaluate(ctx),
    }
}

/// Builds the backend model for `config.system`, applying limit overrides.
pub fn system_model(config: &RunConfig, cal: &Calibration) -> Result<BackendModel> {
    let mut m = BackendModel::from_calibration(cal, config.system, 0)?;
    if let Some(mb) = config.memory_limit_mb {
        m.mem_limit_bytes = (mb * MIB) as f64;
    }
    if let Some(pct) = config.compute_limit_percent {
        m.sm_limit_percent = pct;
    }
    m.validate()
        .map_err(|e| Error::Config(format!("limits do not fit the {} profile: {e}", config.system)))?;
    Ok(m)
}

/// Evaluates one metric and scores it against the catalog baseline.
pub fn evaluate_metric(
    id: MetricId,
    config: &RunConfig,
    catalog: &Catalog,
    model: &BackendModel,
    native: &BackendModel,
) -> Result<MetricResult> {
    let ctx = MetricCtx {
        id,
        config,
        model,
        native,
        seed: derive_seed(config.seed, &id.to_string()),
    };
    let ev = evaluate(&ctx)?;
    let def = catalog.def(id);
    let actual = ev.measurement.value();
    if !actual.is_finite() {
        return Err(ctx.fail(format!("measurement is not finite ({actual})")));
    }
    let ms = score_value(id, actual, def.mig_expected, def.direction)?;
    let (statistics, value, outcome) = match &ev.measurement {
        Measurement::Samples(s) => (Some(compute_stats(s)), None, None),
        Measurement::Scalar(v) => (None, Some(*v), None),
        Measurement::Outcome(p) => (None, None, Some((*p).into())),
    };
    Ok(MetricResult {
        id,
        name: def.name.clone(),
        category: def.category(),
        unit: def.unit,
        direction: def.direction,
        statistics,
        value,
        outcome,
        extra: ev.extra,
        score: ms.score,
        mig_comparison: MigComparison {
            mig_expected: def.mig_expected,
            mig_deviation_percent: ms.mig_deviation_percent,
            mig_gap_percent: ms.mig_gap_percent,
        },
    })
}

/// Scores a measured value. A lower-is-better metric that measured zero or
/// less cannot be beaten and scores 1.
pub fn score_value(id: MetricId, actual: f64, expected: f64, direction: Direction) -> Result<MetricScore> {
    if direction == Direction::LowerBetter && actual <= 0.0 {
        let deviation = scoring::mig_deviation(actual, expected, direction)?;
        return Ok(MetricScore {
            id,
            score: 1.0,
            mig_deviation_percent: deviation,
            mig_gap_percent: deviation.abs(),
        });
    }
    Ok(MetricScore::compute(id, actual, expected, direction)?)
}

/// Runs every selected metric and assembles the report.
pub fn run_benchmark(config: &RunConfig, catalog: &Catalog, cal: &Calibration) -> Result<BenchmarkReport> {
    config.validate()?;
    let model = system_model(config, cal)?;
    let native = BackendModel::from_calibration(cal, Mode::Native, 0)?;
    let ids = config.selected_metrics();
    if ids.is_empty() {
        return Err(Error::Config("no metrics selected".into()));
    }
    let eval = |id: &MetricId| evaluate_metric(*id, config, catalog, &model, &native);
    let metrics: Vec<MetricResult> = if config.parallel {
        ids.par_iter().map(eval).collect::<Result<_>>()?
    } else {
        ids.iter().map(eval).collect::<Result<_>>()?
    };
    assemble(config, catalog, cal, metrics)
}

fn assemble(config: &RunConfig, catalog: &Catalog, cal: &Calibration, metrics: Vec<MetricResult>) -> Result<BenchmarkReport> {
    let mut by_cat: BTreeMap<Category, Vec<f64>> = BTreeMap::new();
    for m in &metrics {
        by_cat.entry(m.category).or_default().push(m.score);
    }
    let mut cat_scores = BTreeMap::new();
    for (c, scores) in &by_cat {
        cat_scores.insert(*c, scoring::category_score(scores)?);
    }
    let weighted = if cat_scores.len() == Category::ALL.len() {
        scoring::overall_score(&cat_scores, catalog.weights())?
    } else {
        scoring::partial_overall_score(&cat_scores, catalog.weights())?
    };
    let all_scores: Vec<f64> = metrics.iter().map(|m| m.score).collect();
    let unweighted = scoring::category_score(&all_scores)?;
    let parity = config.system.reports_mig_parity();
    Ok(BenchmarkReport {
        benchmark_version: crate::BENCHMARK_VERSION.to_string(),
        calibration_version: cal.version(),
        system: SystemInfo {
            name: config.system,
            display_name: config.system.display_name().to_string(),
        },
        config: ConfigEcho {
            iterations: config.iterations,
            warmup: config.warmup,
            tenants: config.tenants,
            contended_tenants: config.contended_tenants(),
            memory_limit_mb: config.memory_limit_mb,
            compute_limit_percent: config.compute_limit_percent,
            seed: config.seed,
            metrics: config
                .metric_filter
                .as_ref()
                .map(|_| config.selected_metrics()),
        },
        metrics,
        categories: cat_scores
            .iter()
            .map(|(c, s)| CategoryScore {
                category: *c,
                name: c.display_name().to_string(),
                weight: catalog.weights().get(*c),
                score: *s,
            })
            .collect(),
        overall: Overall {
            weighted_score: weighted,
            unweighted_parity: parity.then_some(unweighted),
            mig_parity: parity.then_some(weighted),
            grade: scoring::grade_of(weighted)?,
        },
        generated_at: crate::report::timestamp_now(),
    })
}
