//! Deterministic virtual-time model of a GPU and its virtualization layer.

pub mod backend;
pub mod clock;
pub mod heap;
pub mod model;
pub mod rng;
pub mod token_bucket;

use thiserror::Error;

pub use backend::{AllocOutcome, BufferId, FaultKind, FaultReport, KernelOutcome, SimGpu, TenantId};
pub use clock::VirtualClock;
pub use heap::{Block, HeapHandle, SimHeap};
pub use model::BackendModel;
pub use rng::SimRng;
pub use token_bucket::TokenBucket;

pub const MIB: u64 = 1 << 20;
pub const GIB: u64 = 1 << 30;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("clock regression: now {now_ns} ns, requested {requested_ns} ns")]
    ClockRegression { now_ns: u64, requested_ns: u64 },
    #[error("invalid free of handle {0}")]
    InvalidFree(u64),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("backend model: {0}")]
    Model(String),
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("no tenant {0}")]
    UnknownTenant(usize),
    #[error("tenant {0} is in a faulted state")]
    TenantFaulted(usize),
}
