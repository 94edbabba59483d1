//! Simulation-backed benchmark suite for GPU virtualization layers.
//!
//! The crate evaluates a fixed catalog of 56 metrics across ten categories
//! against pluggable system models (native, HAMi-core, BUD-FCSP and an
//! idealized MIG partition), scores each metric relative to the MIG baseline
//! and emits JSON, CSV and plain-text reports.
//!
//! Everything runs in virtual time: a [`sim::SimGpu`] advances its own clock
//! by calibrated costs, so two runs with the same seed produce identical
//! numbers on any machine.

pub mod calibration;
pub mod catalog;
pub mod error;
pub mod mode;
pub mod report;
pub mod runner;
pub mod scoring;
pub mod sim;
pub mod stats;

pub use calibration::Calibration;
pub use catalog::{Catalog, Category, CategoryWeights, Direction, MetricDef, MetricId, Unit};
pub use error::{Error, Result};
pub use mode::Mode;
pub use report::{BenchmarkReport, ComparisonReport, MetricResult};
pub use runner::{run_benchmark, RunConfig};

/// Version string stamped into every report.
pub const BENCHMARK_VERSION: &str = "1.0.0";
