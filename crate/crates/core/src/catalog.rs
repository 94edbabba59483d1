//! The fixed 56-metric taxonomy, its MIG baselines and category weights.
//!
//! Names, units and directions live in code because they never change.
//! Baselines, calibration targets and weights come from a [`Calibration`],
//! which ships with built-in defaults and can be overridden from a file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calibration::Calibration;
use crate::mode::Mode;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("unknown metric id `{0}`")]
    UnknownId(String),
    #[error("metric {0} not found in catalog")]
    NotFound(String),
    #[error("duplicate metric id {0}")]
    Duplicate(String),
    #[error("metric {id}: MIG baseline {value} is invalid ({reason})")]
    Baseline {
        id: String,
        value: f64,
        reason: &'static str,
    },
    #[error("category weights are invalid: {0}")]
    Weights(String),
    #[error("missing calibration value `{0}`")]
    Missing(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Overhead,
    Isolation,
    Llm,
    MemoryBandwidth,
    Cache,
    Pcie,
    NcclP2p,
    Scheduling,
    Fragmentation,
    ErrorRecovery,
}

impl Category {
    pub const ALL: [Category; 10] = [
        Category::Overhead,
        Category::Isolation,
        Category::Llm,
        Category::MemoryBandwidth,
        Category::Cache,
        Category::Pcie,
        Category::NcclP2p,
        Category::Scheduling,
        Category::Fragmentation,
        Category::ErrorRecovery,
    ];

    /// Id prefix, e.g. `OH` for `OH-001`.
    pub fn tag(self) -> &'static str {
        match self {
            Category::Overhead => "OH",
            Category::Isolation => "IS",
            Category::Llm => "LLM",
            Category::MemoryBandwidth => "BW",
            Category::Cache => "CACHE",
            Category::Pcie => "PCIE",
            Category::NcclP2p => "NCCL",
            Category::Scheduling => "SCHED",
            Category::Fragmentation => "FRAG",
            Category::ErrorRecovery => "ERR",
        }
    }

    /// Key used in calibration files (`weights.<key>`).
    pub fn key(self) -> &'static str {
        match self {
            Category::Overhead => "overhead",
            Category::Isolation => "isolation",
            Category::Llm => "llm",
            Category::MemoryBandwidth => "memory_bandwidth",
            Category::Cache => "cache",
            Category::Pcie => "pcie",
            Category::NcclP2p => "nccl_p2p",
            Category::Scheduling => "scheduling",
            Category::Fragmentation => "fragmentation",
            Category::ErrorRecovery => "error_recovery",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Category::Overhead => "Overhead",
            Category::Isolation => "Isolation",
            Category::Llm => "LLM",
            Category::MemoryBandwidth => "Memory Bandwidth",
            Category::Cache => "Cache",
            Category::Pcie => "PCIe",
            Category::NcclP2p => "NCCL/P2P",
            Category::Scheduling => "Scheduling",
            Category::Fragmentation => "Fragmentation",
            Category::ErrorRecovery => "Error Recovery",
        }
    }

    /// Number of metrics in the category.
    pub fn size(self) -> u8 {
        match self {
            Category::Overhead | Category::Isolation | Category::Llm => 10,
            Category::Fragmentation | Category::ErrorRecovery => 3,
            _ => 4,
        }
    }

    pub fn from_tag(tag: &str) -> Option<Category> {
        Category::ALL.into_iter().find(|c| c.tag() == tag)
    }

    pub fn from_key(key: &str) -> Option<Category> {
        Category::ALL.into_iter().find(|c| c.key() == key)
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

/// A metric identifier such as `OH-001`. Only the 56 catalog ids can be
/// constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MetricId {
    category: Category,
    ordinal: u8,
}

impl MetricId {
    pub fn new(category: Category, ordinal: u8) -> Option<MetricId> {
        (1..=category.size())
            .contains(&ordinal)
            .then_some(MetricId { category, ordinal })
    }

    pub fn category(self) -> Category {
        self.category
    }

    pub fn ordinal(self) -> u8 {
        self.ordinal
    }

    /// All 56 ids in catalog order.
    pub fn all() -> impl Iterator<Item = MetricId> {
        Category::ALL
            .into_iter()
            .flat_map(|c| (1..=c.size()).map(move |o| MetricId { category: c, ordinal: o }))
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{:03}", self.category.tag(), self.ordinal)
    }
}

impl FromStr for MetricId {
    type Err = CatalogError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CatalogError::UnknownId(s.to_string());
        let (tag, num) = s.split_once('-').ok_or_else(bad)?;
        if num.len() != 3 || !num.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let category = Category::from_tag(tag).ok_or_else(bad)?;
        let ordinal: u8 = num.parse().map_err(|_| bad())?;
        MetricId::new(category, ordinal).ok_or_else(bad)
    }
}

impl Serialize for MetricId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MetricId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Unit {
    #[serde(rename = "us")]
    Microseconds,
    #[serde(rename = "ns")]
    Nanoseconds,
    #[serde(rename = "ms")]
    Milliseconds,
    #[serde(rename = "%")]
    Percent,
    #[serde(rename = "0-1")]
    Ratio01,
    #[serde(rename = "ratio")]
    Ratio,
    #[serde(rename = "GB/s")]
    GBps,
    #[serde(rename = "TFLOPS")]
    Tflops,
    #[serde(rename = "count")]
    Count,
    #[serde(rename = "bool")]
    Boolean,
    #[serde(rename = "allocs/s")]
    AllocsPerSec,
    #[serde(rename = "CV")]
    Cv,
    #[serde(rename = "variance")]
    Variance,
    #[serde(rename = "factor")]
    Factor,
}

impl Unit {
    pub fn symbol(self) -> &'static str {
        match self {
            Unit::Microseconds => "us",
            Unit::Nanoseconds => "ns",
            Unit::Milliseconds => "ms",
            Unit::Percent => "%",
            Unit::Ratio01 => "0-1",
            Unit::Ratio => "ratio",
            Unit::GBps => "GB/s",
            Unit::Tflops => "TFLOPS",
            Unit::Count => "count",
            Unit::Boolean => "bool",
            Unit::AllocsPerSec => "allocs/s",
            Unit::Cv => "CV",
            Unit::Variance => "variance",
            Unit::Factor => "factor",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    LowerBetter,
    HigherBetter,
    BooleanTrue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricDef {
    pub id: MetricId,
    pub name: String,
    pub description: String,
    pub unit: Unit,
    pub direction: Direction,
    /// Simulated MIG baseline in the metric's unit. Boolean metrics store the
    /// pass value, 1.0.
    pub mig_expected: f64,
}

impl MetricDef {
    pub fn category(&self) -> Category {
        self.id.category()
    }
}

struct Row(&'static str, &'static str, &'static str, Unit, Direction);

use Direction::{BooleanTrue as T, HigherBetter as H, LowerBetter as L};

#[rustfmt::skip]
const TAXONOMY: [Row; 56] = [
    Row("OH-001", "Kernel Launch Latency", "Time from cuLaunchKernel to execution", Unit::Microseconds, L),
    Row("OH-002", "Memory Allocation Latency", "cuMemAlloc completion time", Unit::Microseconds, L),
    Row("OH-003", "Memory Free Latency", "cuMemFree completion time", Unit::Microseconds, L),
    Row("OH-004", "Context Creation Overhead", "Additional context creation time", Unit::Microseconds, L),
    Row("OH-005", "API Interception Overhead", "dlsym hook overhead per call", Unit::Nanoseconds, L),
    Row("OH-006", "Shared Region Lock Contention", "Semaphore wait time", Unit::Microseconds, L),
    Row("OH-007", "Memory Tracking Overhead", "Per-allocation accounting cost", Unit::Nanoseconds, L),
    Row("OH-008", "Rate Limiter Overhead", "Token bucket check latency", Unit::Nanoseconds, L),
    Row("OH-009", "NVML Polling Overhead", "CPU cycles in monitoring", Unit::Percent, L),
    Row("OH-010", "Total Throughput Degradation", "End-to-end performance loss", Unit::Percent, L),
    Row("IS-001", "Memory Limit Accuracy", "Actual vs configured limit", Unit::Percent, H),
    Row("IS-002", "Memory Limit Enforcement", "Over-allocation detection time", Unit::Microseconds, L),
    Row("IS-003", "SM Utilization Accuracy", "Actual vs configured SM limit", Unit::Percent, H),
    Row("IS-004", "SM Limit Response Time", "Utilization adjustment latency", Unit::Milliseconds, L),
    Row("IS-005", "Cross-Tenant Memory Isolation", "Memory leak detection", Unit::Boolean, T),
    Row("IS-006", "Cross-Tenant Compute Isolation", "Compute interference ratio", Unit::Ratio01, H),
    Row("IS-007", "QoS Consistency", "Performance variance under contention", Unit::Cv, L),
    Row("IS-008", "Fairness Index", "Jain's fairness across tenants", Unit::Ratio01, H),
    Row("IS-009", "Noisy Neighbor Impact", "Degradation from aggressive neighbor", Unit::Percent, L),
    Row("IS-010", "Fault Isolation", "Error propagation prevention", Unit::Boolean, T),
    Row("LLM-001", "Attention Kernel Throughput", "Transformer attention performance", Unit::Tflops, H),
    Row("LLM-002", "KV Cache Allocation Speed", "Dynamic cache growth handling", Unit::AllocsPerSec, H),
    Row("LLM-003", "Batch Size Scaling", "Throughput vs batch size curve", Unit::Ratio, H),
    Row("LLM-004", "Token Generation Latency", "TTFT and inter-token latency", Unit::Milliseconds, L),
    Row("LLM-005", "Memory Pool Efficiency", "Pool allocation overhead", Unit::Percent, L),
    Row("LLM-006", "Multi-Stream Performance", "Pipeline parallel efficiency", Unit::Percent, H),
    Row("LLM-007", "Large Tensor Allocation", "Large allocation handling", Unit::Milliseconds, L),
    Row("LLM-008", "Mixed Precision Support", "FP16/BF16 kernel ratio", Unit::Ratio, H),
    Row("LLM-009", "Dynamic Batching Impact", "Variable batch handling", Unit::Variance, L),
    Row("LLM-010", "Multi-GPU Scaling", "Tensor parallel efficiency", Unit::Factor, H),
    Row("BW-001", "Memory Bandwidth Isolation", "Bandwidth under contention", Unit::Percent, H),
    Row("BW-002", "Bandwidth Fairness Index", "Jain's fairness for bandwidth", Unit::Ratio01, H),
    Row("BW-003", "Memory Bus Saturation Point", "Streams to reach 95% BW", Unit::Count, L),
    Row("BW-004", "Bandwidth Interference Impact", "BW drop from competition", Unit::Percent, L),
    Row("CACHE-001", "L2 Cache Hit Rate", "Hit rate under multi-tenant load", Unit::Percent, H),
    Row("CACHE-002", "Cache Eviction Rate", "Evictions from other tenants", Unit::Percent, L),
    Row("CACHE-003", "Working Set Collision Impact", "Perf drop from cache overlap", Unit::Percent, L),
    Row("CACHE-004", "Cache Contention Overhead", "Latency from L2 contention", Unit::Percent, L),
    Row("PCIE-001", "Host-to-Device Bandwidth", "H2D transfer rate", Unit::GBps, H),
    Row("PCIE-002", "Device-to-Host Bandwidth", "D2H transfer rate", Unit::GBps, H),
    Row("PCIE-003", "PCIe Contention Impact", "BW drop under multi-tenant", Unit::Percent, L),
    Row("PCIE-004", "Pinned Memory Performance", "Pinned vs pageable ratio", Unit::Ratio, H),
    Row("NCCL-001", "AllReduce Latency", "Collective allreduce time", Unit::Microseconds, L),
    Row("NCCL-002", "AllGather Bandwidth", "Allgather achieved bandwidth", Unit::GBps, H),
    Row("NCCL-003", "P2P GPU Bandwidth", "Direct GPU-to-GPU transfer", Unit::GBps, H),
    Row("NCCL-004", "Broadcast Bandwidth", "Broadcast collective bandwidth", Unit::GBps, H),
    Row("SCHED-001", "Context Switch Latency", "CUDA context switch time", Unit::Microseconds, L),
    Row("SCHED-002", "Kernel Launch Overhead", "Minimal kernel launch time", Unit::Microseconds, L),
    Row("SCHED-003", "Stream Concurrency Efficiency", "Concurrent stream efficiency", Unit::Percent, H),
    Row("SCHED-004", "Preemption Latency", "High-priority preemption delay", Unit::Milliseconds, L),
    Row("FRAG-001", "Fragmentation Index", "Memory fragmentation level", Unit::Percent, L),
    Row("FRAG-002", "Allocation Latency Degradation", "Latency increase with fragmentation", Unit::Ratio, L),
    Row("FRAG-003", "Memory Compaction Efficiency", "Memory reclaimed after defrag", Unit::Percent, H),
    Row("ERR-001", "Error Detection Latency", "Time to detect CUDA errors", Unit::Microseconds, L),
    Row("ERR-002", "Error Recovery Time", "Time to recover GPU state", Unit::Microseconds, L),
    Row("ERR-003", "Graceful Degradation Score", "Resource exhaustion handling", Unit::Percent, H),
];

/// Per-category weights for the overall score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryWeights([f64; 10]);

impl CategoryWeights {
    pub const SUM_TOLERANCE: f64 = 1e-9;

    pub fn new(weights: [f64; 10]) -> Result<Self, CatalogError> {
        let w = CategoryWeights(weights);
        w.validate()?;
        Ok(w)
    }

    /// Equal weight (0.1) for every category.
    pub fn uniform() -> Self {
        CategoryWeights([0.1; 10])
    }

    pub fn get(&self, c: Category) -> f64 {
        self.0[c.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Category, f64)> + '_ {
        Category::ALL.into_iter().map(|c| (c, self.get(c)))
    }

    pub fn validate(&self) -> Result<(), CatalogError> {
        for (c, w) in self.iter() {
            if !(0.0..=1.0).contains(&w) {
                return Err(CatalogError::Weights(format!("{} weight {w} outside [0,1]", c.key())));
            }
        }
        let sum: f64 = self.0.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(CatalogError::Weights(format!("weights sum to {sum}, expected 1")));
        }
        Ok(())
    }
}

/// The loaded, immutable metric catalog.
#[derive(Debug, Clone)]
pub struct Catalog {
    defs: Vec<MetricDef>,
    weights: CategoryWeights,
    targets: BTreeMap<(MetricId, Mode), f64>,
}

impl Catalog {
    /// Builds the catalog from a merged calibration. Every metric must have a
    /// `mig_expected` entry and every category a weight.
    pub fn from_calibration(cal: &Calibration) -> Result<Catalog, CatalogError> {
        let mut defs = Vec::with_capacity(TAXONOMY.len());
        for row in &TAXONOMY {
            let id: MetricId = row.0.parse()?;
            if defs.iter().any(|d: &MetricDef| d.id == id) {
                return Err(CatalogError::Duplicate(row.0.to_string()));
            }
            let mig_expected = cal
                .mig_expected(id)
                .ok_or_else(|| CatalogError::Missing(format!("{id}.mig_expected")))?;
            validate_baseline(id, row.4, mig_expected)?;
            defs.push(MetricDef {
                id,
                name: row.1.to_string(),
                description: row.2.to_string(),
                unit: row.3,
                direction: row.4,
                mig_expected,
            });
        }
        let mut weights = [0.0; 10];
        for c in Category::ALL {
            weights[c.index()] = cal
                .weight(c)
                .ok_or_else(|| CatalogError::Missing(format!("weights.{}", c.key())))?;
        }
        Ok(Catalog {
            defs,
            weights: CategoryWeights::new(weights)?,
            targets: cal.targets().collect(),
        })
    }

    pub fn defs(&self) -> &[MetricDef] {
        &self.defs
    }

    pub fn weights(&self) -> &CategoryWeights {
        &self.weights
    }

    /// Infallible lookup for an id that is known to be valid.
    pub fn def(&self, id: MetricId) -> &MetricDef {
        self.defs
            .iter()
            .find(|d| d.id == id)
            .expect("catalog holds every valid metric id")
    }

    /// Lookup by textual id.
    pub fn lookup(&self, id: &str) -> Result<&MetricDef, CatalogError> {
        let parsed: MetricId = id
            .parse()
            .map_err(|_| CatalogError::NotFound(id.to_string()))?;
        Ok(self.def(parsed))
    }

    /// Calibration target for `id` on `mode`, if the calibration declares one.
    pub fn target(&self, id: MetricId, mode: Mode) -> Option<f64> {
        self.targets.get(&(id, mode)).copied()
    }

    pub fn in_category(&self, c: Category) -> impl Iterator<Item = &MetricDef> {
        self.defs.iter().filter(move |d| d.category() == c)
    }
}

fn validate_baseline(id: MetricId, direction: Direction, value: f64) -> Result<(), CatalogError> {
    let err = |reason| CatalogError::Baseline {
        id: id.to_string(),
        value,
        reason,
    };
    if !value.is_finite() {
        return Err(err("not finite"));
    }
    match direction {
        Direction::BooleanTrue if value != 1.0 => Err(err("boolean baseline must be 1 (pass)")),
        Direction::LowerBetter | Direction::HigherBetter if value <= 0.0 => {
            Err(err("must be positive"))
        }
        _ => Ok(()),
    }
}

/// Loads the built-in catalog, applying overrides from `baseline_file` when
/// given.
pub fn load_catalog(baseline_file: Option<&Path>) -> crate::Result<Catalog> {
    let cal = Calibration::load(baseline_file)?;
    Ok(Catalog::from_calibration(&cal)?)
}
