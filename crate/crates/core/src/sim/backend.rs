//! The simulated device: memory domains, per-tenant limiters and cost models.
//!
//! Every costed operation consumes exactly three random draws (driver jitter,
//! virtualization jitter, lock wait) whatever the mode, so two backends built
//! from the same seed stay aligned draw-for-draw across modes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::clock::VirtualClock;
use super::heap::{HeapHandle, SimHeap};
use super::model::BackendModel;
use super::rng::SimRng;
use super::token_bucket::TokenBucket;
use super::{SimError, GIB, MIB};
use crate::mode::Mode;

pub type TenantId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BufferId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AllocOutcome {
    Granted { buffer: BufferId, latency_us: f64 },
    /// Rejected by the interposer's quota check before touching the heap.
    QuotaDenied { latency_us: f64 },
    /// Quota allowed it but no free block was large enough.
    Oom { latency_us: f64 },
}

impl AllocOutcome {
    pub fn latency_us(&self) -> f64 {
        match *self {
            AllocOutcome::Granted { latency_us, .. }
            | AllocOutcome::QuotaDenied { latency_us }
            | AllocOutcome::Oom { latency_us } => latency_us,
        }
    }

    pub fn buffer(&self) -> Option<BufferId> {
        match *self {
            AllocOutcome::Granted { buffer, .. } => Some(buffer),
            _ => None,
        }
    }

    pub fn is_denied(&self) -> bool {
        !matches!(self, AllocOutcome::Granted { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelOutcome {
    pub admitted_at_ns: u64,
    pub launch_overhead_us: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultKind {
    OomExhaustion,
    KernelError,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaultReport {
    pub detect_us: f64,
    pub recover_us: f64,
    pub no_crash: bool,
    pub error_returned: bool,
    pub recovered: bool,
}

#[derive(Debug, Clone)]
struct Tenant {
    used: u64,
    bucket: TokenBucket,
    faulted: bool,
}

#[derive(Debug, Clone, Copy)]
struct Buffer {
    tenant: TenantId,
    domain: usize,
    handle: HeapHandle,
    offset: u64,
    bytes: u64,
}

#[derive(Debug, Clone, Copy)]
struct Stamp {
    len: u64,
    tenant: TenantId,
    pattern: u64,
}

/// One simulated device shared by `tenants` virtual-time tenant streams.
#[derive(Debug, Clone)]
pub struct SimGpu {
    model: BackendModel,
    clock: VirtualClock,
    rng: SimRng,
    domains: Vec<SimHeap>,
    stamps: Vec<BTreeMap<u64, Stamp>>,
    tenants: Vec<Tenant>,
    buffers: BTreeMap<BufferId, Buffer>,
    next_buffer: u64,
}

/// Tokens are SM-microseconds: the whole device supplies 1e6 per second.
pub const TOKENS_PER_DEVICE_SECOND: f64 = 1e6;

impl SimGpu {
    pub fn new(model: BackendModel, tenants: usize) -> Result<SimGpu, SimError> {
        model.validate()?;
        if tenants == 0 {
            return Err(SimError::InvalidRequest("at least one tenant is required".into()));
        }
        let domains = if model.mode == Mode::Mig {
            let slice = model.mem_limit().min(model.mem_capacity() / tenants as u64);
            (0..tenants).map(|_| SimHeap::new(slice)).collect::<Result<Vec<_>, _>>()?
        } else {
            vec![SimHeap::new(model.mem_capacity())?]
        };
        let limit = effective_sm_limit(&model);
        let tenants = (0..tenants)
            .map(|_| {
                let (rate, max) = bucket_params(&model, limit);
                Ok(Tenant {
                    used: 0,
                    bucket: TokenBucket::new(rate, max, 0.0, 0)?,
                    faulted: false,
                })
            })
            .collect::<Result<Vec<_>, SimError>>()?;
        Ok(SimGpu {
            rng: SimRng::new(model.rng_seed),
            stamps: vec![BTreeMap::new(); domains.len()],
            model,
            clock: VirtualClock::new(),
            domains,
            tenants,
            buffers: BTreeMap::new(),
            next_buffer: 1,
        })
    }

    pub fn model(&self) -> &BackendModel {
        &self.model
    }

    pub fn mode(&self) -> Mode {
        self.model.mode
    }

    pub fn now_ns(&self) -> u64 {
        self.clock.now_ns()
    }

    pub fn tenant_count(&self) -> usize {
        self.tenants.len()
    }

    /// Advances virtual time by device work that involves no API call.
    pub fn run_for_us(&mut self, us: f64) {
        self.clock.advance_us(us);
    }

    fn tenant(&self, t: TenantId) -> Result<&Tenant, SimError> {
        self.tenants.get(t).ok_or(SimError::UnknownTenant(t))
    }

    fn healthy(&self, t: TenantId) -> Result<(), SimError> {
        if self.tenant(t)?.faulted {
            return Err(SimError::TenantFaulted(t));
        }
        Ok(())
    }

    fn domain_of(&self, t: TenantId) -> usize {
        if self.model.mode == Mode::Mig {
            t
        } else {
            0
        }
    }

    /// The heap backing tenant `t`'s allocations.
    pub fn heap(&self, t: TenantId) -> Result<&SimHeap, SimError> {
        self.tenant(t)?;
        Ok(&self.domains[self.domain_of(t)])
    }

    /// Bytes the interposer lets tenant `t` allocate, if it enforces a quota.
    pub fn quota(&self) -> Option<u64> {
        self.model
            .mode
            .is_software()
            .then(|| self.model.mem_limit() - self.model.quota_reserved())
    }

    pub fn tenant_used(&self, t: TenantId) -> Result<u64, SimError> {
        Ok(self.tenant(t)?.used)
    }

    // Draws shared by every costed operation.
    fn draws(&mut self) -> (f64, f64, f64) {
        (self.rng.symmetric(), self.rng.symmetric(), self.rng.symmetric())
    }

    fn driver(&self, base_us: f64, u: f64) -> f64 {
        base_us * (1.0 + self.model.driver_jitter * u)
    }

    fn virt(&self, overhead_us: f64, u: f64) -> f64 {
        overhead_us * (1.0 + self.model.virt_jitter * u)
    }

    fn lock_from(&self, tenants: usize, u: f64) -> f64 {
        let m = &self.model;
        if tenants < 2 || m.lock_mean_us == 0.0 {
            return 0.0;
        }
        (m.lock_mean_us * (tenants - 1) as f64 + m.lock_jitter_us * u).max(0.0)
    }

    fn op_lock(&self, u: f64) -> f64 {
        self.lock_from(self.tenants.len(), u)
    }

    fn launch_virt_us(&self) -> f64 {
        (self.model.hook_ns + self.model.rate_check_ns) / 1000.0
    }

    /// Shared-region wait for `tenants` contending streams; does not advance
    /// the clock.
    pub fn sample_lock_wait(&mut self, tenants: usize) -> f64 {
        let (_, _, ul) = self.draws();
        self.lock_from(tenants, ul)
    }

    /// Launch of an empty kernel; returns its CPU-side latency.
    pub fn launch(&mut self, t: TenantId) -> Result<f64, SimError> {
        self.launch_batch(t, 1)
    }

    /// `count` back-to-back launches sharing one set of draws.
    pub fn launch_batch(&mut self, t: TenantId, count: u32) -> Result<f64, SimError> {
        self.healthy(t)?;
        let (ud, uv, ul) = self.draws();
        let n = count as f64;
        let lat = n * (self.driver(self.model.base_launch_us, ud)
            + self.virt(self.launch_virt_us(), uv)
            + self.op_lock(ul));
        self.clock.advance_us(lat);
        Ok(lat)
    }

    /// Launches a kernel that needs `work_tokens` SM-microseconds and waits
    /// for the tenant's limiter to admit it.
    pub fn submit_kernel(&mut self, t: TenantId, work_tokens: f64) -> Result<KernelOutcome, SimError> {
        let overhead = self.launch(t)?;
        let now = self.clock.now_ns();
        let admitted = self.tenants[t].bucket.admit(work_tokens, now)?;
        self.clock.advance_to(admitted)?;
        Ok(KernelOutcome {
            admitted_at_ns: admitted,
            launch_overhead_us: overhead,
        })
    }

    /// Admits `work_tokens` through tenant `t`'s limiter at time `at_ns`
    /// without API costs. Used to replay saturating streams.
    pub fn admit_at(&mut self, t: TenantId, work_tokens: f64, at_ns: u64) -> Result<u64, SimError> {
        self.tenant(t)?;
        self.tenants[t].bucket.admit(work_tokens, at_ns)
    }

    /// Applies a new SM limit to tenant `t` at the current time. Native
    /// execution has no limiter and ignores it.
    pub fn set_sm_limit(&mut self, t: TenantId, percent: f64) -> Result<(), SimError> {
        self.set_sm_limit_at(t, percent, self.clock.now_ns())
    }

    pub fn set_sm_limit_at(&mut self, t: TenantId, percent: f64, at_ns: u64) -> Result<(), SimError> {
        self.tenant(t)?;
        if !(percent > 0.0 && percent <= 100.0) {
            return Err(SimError::InvalidRequest(format!("SM limit {percent} outside (0, 100]")));
        }
        if !self.model.mode.enforces_limits() {
            return Ok(());
        }
        let (rate, max) = bucket_params(&self.model, percent);
        self.tenants[t].bucket.reconfigure(rate, max, at_ns)
    }

    pub fn bucket(&self, t: TenantId) -> Result<&TokenBucket, SimError> {
        Ok(&self.tenant(t)?.bucket)
    }

    fn map_us(&self, bytes: u64) -> f64 {
        bytes.saturating_sub(2 * MIB) as f64 / GIB as f64 * self.model.map_us_per_gib
    }

    pub fn alloc(&mut self, t: TenantId, bytes: u64) -> Result<AllocOutcome, SimError> {
        self.healthy(t)?;
        if bytes == 0 {
            return Err(SimError::InvalidRequest("zero-byte allocation".into()));
        }
        let (ud, uv, ul) = self.draws();
        let m = &self.model;
        let check_us = (m.hook_ns + m.quota_check_ns) / 1000.0 + m.shared_region_us;
        let tracking_us = m.tracking_ns / 1000.0;
        let (base_us, scan_ns) = (m.base_alloc_us, m.heap_scan_ns);
        let scan_us = |blocks: usize| blocks.saturating_sub(1) as f64 * scan_ns / 1000.0;
        let lock = self.op_lock(ul);
        if let Some(quota) = self.quota() {
            if self.tenants[t].used + bytes > quota {
                let lat = self.virt(check_us, uv) + lock;
                self.clock.advance_us(lat);
                return Ok(AllocOutcome::QuotaDenied { latency_us: lat });
            }
        }
        let domain = self.domain_of(t);
        match self.domains[domain].alloc(bytes) {
            Ok(p) => {
                let lat = self.driver(base_us + scan_us(p.blocks_scanned) + self.map_us(bytes), ud)
                    + self.virt(check_us + tracking_us, uv)
                    + lock;
                let id = BufferId(self.next_buffer);
                self.next_buffer += 1;
                self.buffers.insert(
                    id,
                    Buffer {
                        tenant: t,
                        domain,
                        handle: p.handle,
                        offset: p.offset,
                        bytes,
                    },
                );
                self.tenants[t].used += bytes;
                self.clock.advance_us(lat);
                Ok(AllocOutcome::Granted { buffer: id, latency_us: lat })
            }
            Err(e) => {
                let lat = self.driver(base_us + scan_us(e.blocks_scanned + 1), ud)
                    + self.virt(check_us, uv)
                    + lock;
                self.clock.advance_us(lat);
                Ok(AllocOutcome::Oom { latency_us: lat })
            }
        }
    }

    pub fn free(&mut self, buffer: BufferId) -> Result<f64, SimError> {
        let b = *self
            .buffers
            .get(&buffer)
            .ok_or(SimError::InvalidFree(buffer.0))?;
        self.healthy(b.tenant)?;
        self.domains[b.domain].free(b.handle)?;
        self.buffers.remove(&buffer);
        self.tenants[b.tenant].used -= b.bytes;
        if self.model.flag("scrub_on_free") {
            self.clear_stamps(b.domain, b.offset, b.bytes);
        }
        let (ud, uv, ul) = self.draws();
        let m = &self.model;
        let virt_us = (m.hook_ns + m.tracking_ns) / 1000.0 + m.shared_region_us;
        let lat = self.driver(m.base_free_us, ud) + self.virt(virt_us, uv) + self.op_lock(ul);
        self.clock.advance_us(lat);
        Ok(lat)
    }

    /// Frees every live buffer owned by `t`, ignoring costs.
    pub fn release_all(&mut self, t: TenantId) -> Result<(), SimError> {
        let ids: Vec<BufferId> = self
            .buffers
            .iter()
            .filter(|(_, b)| b.tenant == t)
            .map(|(id, _)| *id)
            .collect();
        for id in ids {
            let b = self.buffers.remove(&id).expect("listed above");
            self.domains[b.domain].free(b.handle)?;
            self.tenants[t].used -= b.bytes;
            if self.model.flag("scrub_on_free") {
                self.clear_stamps(b.domain, b.offset, b.bytes);
            }
        }
        Ok(())
    }

    pub fn buffer_range(&self, buffer: BufferId) -> Option<(TenantId, u64, u64)> {
        self.buffers.get(&buffer).map(|b| (b.tenant, b.offset, b.bytes))
    }

    /// Allocation served from a pre-reserved pool.
    pub fn pool_alloc(&mut self, t: TenantId) -> Result<f64, SimError> {
        self.healthy(t)?;
        let (ud, uv, ul) = self.draws();
        let m = &self.model;
        let virt_us = (m.hook_ns + m.quota_check_ns + m.tracking_ns) / 1000.0 + m.shared_region_us + m.pool_query_us;
        let lat = self.driver(m.base_pool_alloc_us, ud) + self.virt(virt_us, uv) + self.op_lock(ul);
        self.clock.advance_us(lat);
        Ok(lat)
    }

    /// A call the interposer forwards without checks: driver cost plus hook.
    pub fn passthrough_call(&mut self) -> f64 {
        let (ud, uv, _) = self.draws();
        let lat = self.driver(self.model.base_call_us, ud) + self.virt(self.model.hook_ns / 1000.0, uv);
        self.clock.advance_us(lat);
        lat
    }

    pub fn create_context(&mut self) -> f64 {
        let (ud, uv, ul) = self.draws();
        let lat = self.driver(self.model.base_context_us, ud)
            + self.virt(self.model.context_init_us, uv)
            + self.op_lock(ul);
        self.clock.advance_us(lat);
        lat
    }

    /// Per-allocation accounting cost in nanoseconds.
    pub fn tracking_cost_ns(&mut self) -> f64 {
        let (_, uv, _) = self.draws();
        self.virt(self.model.tracking_ns, uv)
    }

    /// Limiter check cost in nanoseconds.
    pub fn rate_check_cost_ns(&mut self) -> f64 {
        let (_, uv, _) = self.draws();
        self.virt(self.model.rate_check_ns, uv)
    }

    /// Share of one CPU spent polling utilization, in percent.
    pub fn polling_overhead_percent(&self) -> f64 {
        self.model.poll_cost_us / (self.model.poll_interval_ms * 1000.0) * 100.0
    }

    /// Multiplicative noise on one tenant's measured throughput.
    pub fn tenant_noise(&mut self) -> f64 {
        1.0 + self.model.tenant_jitter * self.rng.symmetric()
    }

    /// Throughput factor for a tenant competing against `pressure` units of
    /// foreign load.
    pub fn interference_factor(&self, pressure: f64) -> f64 {
        1.0 / (1.0 + self.model.compute_interference * pressure)
    }

    /// Throughputs of `n` equal tenants sharing the device, relative to one
    /// tenant running alone.
    pub fn tenant_throughputs(&mut self, n: usize) -> Vec<f64> {
        let eta = self.interference_factor(n.saturating_sub(1) as f64);
        let skew = self.model.share_skew;
        spread(n)
            .into_iter()
            .map(|c| (1.0 + skew * c) * self.tenant_noise() * eta)
            .collect()
    }

    /// Per-tenant bandwidth with `n` tenants streaming.
    pub fn effective_bandwidth(&self, n: usize) -> f64 {
        let m = &self.model;
        m.solo_bandwidth_gbps / (1.0 + m.contention_alpha * n.saturating_sub(1) as f64)
    }

    /// Device bandwidth delivered to `n` concurrent streams.
    pub fn aggregate_bandwidth(&self, n: usize) -> f64 {
        (n as f64 * self.effective_bandwidth(n)).min(self.model.peak_bandwidth_gbps)
    }

    /// Bandwidth shares of `n` tenants relative to an equal split.
    pub fn bandwidth_shares(&mut self, n: usize) -> Vec<f64> {
        let skew = self.model.bw_share_skew;
        spread(n)
            .into_iter()
            .map(|c| (1.0 + skew * c) * self.tenant_noise())
            .collect()
    }

    pub fn cache_hit_rate(&self, n: usize, overlap: f64) -> f64 {
        let m = &self.model;
        (m.l2_hit_solo - m.l2_eviction_per_tenant * n.saturating_sub(1) as f64 * overlap).max(0.0)
    }

    /// Mean memory access time in units of an L2 hit.
    pub fn access_time(&self, hit_rate: f64) -> f64 {
        hit_rate + (1.0 - hit_rate) * self.model.cache_miss_penalty
    }

    /// Host/device copy of `bytes`; returns microseconds.
    pub fn transfer_us(&mut self, bytes: u64, to_device: bool, pinned: bool) -> f64 {
        let (ud, uv, _) = self.draws();
        let m = &self.model;
        let mut gbps = if to_device { m.pcie_h2d_gbps } else { m.pcie_d2h_gbps };
        if !pinned {
            gbps /= m.pinned_speedup;
        }
        let wire_us = bytes as f64 / (gbps * 1e9) * 1e6;
        let virt_us = (m.hook_ns + m.tracking_ns) / 1000.0;
        let lat = wire_us + self.driver(m.base_memcpy_us, ud) + self.virt(virt_us, uv);
        self.clock.advance_us(lat);
        lat
    }

    /// PCIe bandwidth retained by one tenant among `n`.
    pub fn pcie_share(&self, n: usize) -> f64 {
        1.0 / (1.0 + self.model.pcie_alpha * n.saturating_sub(1) as f64)
    }

    /// One allreduce; collectives launch two kernels through the interposer.
    pub fn allreduce_us(&mut self) -> f64 {
        let (ud, uv, _) = self.draws();
        let lat = self.driver(self.model.nccl_allreduce_us, ud) + 2.0 * self.virt(self.launch_virt_us(), uv);
        self.clock.advance_us(lat);
        lat
    }

    pub fn context_switch_us(&mut self) -> f64 {
        let (ud, _, _) = self.draws();
        let lat = self.driver(self.model.ctx_switch_us, ud);
        self.clock.advance_us(lat);
        lat
    }

    pub fn preempt_ms(&mut self) -> f64 {
        let (ud, _, _) = self.draws();
        let lat = self.driver(self.model.preempt_ms, ud);
        self.clock.advance_us(lat * 1000.0);
        lat
    }

    fn clear_stamps(&mut self, domain: usize, offset: u64, len: u64) {
        let end = offset + len;
        let stamps = &mut self.stamps[domain];
        let hits: Vec<u64> = stamps
            .range(..end)
            .filter(|(o, s)| **o + s.len > offset)
            .map(|(o, _)| *o)
            .collect();
        for o in hits {
            stamps.remove(&o);
        }
    }

    /// Fills `buffer` with a tenant-specific pattern.
    pub fn write_pattern(&mut self, buffer: BufferId, pattern: u64) -> Result<(), SimError> {
        let b = *self
            .buffers
            .get(&buffer)
            .ok_or_else(|| SimError::InvalidRequest(format!("unknown buffer {}", buffer.0)))?;
        self.clear_stamps(b.domain, b.offset, b.bytes);
        self.stamps[b.domain].insert(
            b.offset,
            Stamp {
                len: b.bytes,
                tenant: b.tenant,
                pattern,
            },
        );
        Ok(())
    }

    /// Patterns visible through `buffer` that another tenant wrote.
    pub fn foreign_patterns(&self, buffer: BufferId) -> Result<Vec<(TenantId, u64)>, SimError> {
        let b = self
            .buffers
            .get(&buffer)
            .ok_or_else(|| SimError::InvalidRequest(format!("unknown buffer {}", buffer.0)))?;
        let end = b.offset + b.bytes;
        Ok(self.stamps[b.domain]
            .range(..end)
            .filter(|(o, s)| **o + s.len > b.offset && s.tenant != b.tenant)
            .map(|(_, s)| (s.tenant, s.pattern))
            .collect())
    }

    /// Whether live buffers of different tenants never overlap.
    pub fn tenants_disjoint(&self) -> bool {
        let mut spans: Vec<(usize, u64, u64, TenantId)> = self
            .buffers
            .values()
            .map(|b| (b.domain, b.offset, b.offset + b.bytes, b.tenant))
            .collect();
        spans.sort();
        spans
            .windows(2)
            .all(|w| w[0].0 != w[1].0 || w[0].2 <= w[1].1)
    }

    /// Induces a fault in tenant `t` and reports how the system coped.
    pub fn inject_fault(&mut self, t: TenantId, kind: FaultKind) -> Result<FaultReport, SimError> {
        self.healthy(t)?;
        let (ud, _, _) = self.draws();
        let (ud2, _, _) = self.draws();
        let detect_us = self.driver(self.model.detect_us, ud);
        let recover_us = self.driver(self.model.recover_us, ud2);
        let crash = self.model.flag("crash_on_fault");
        let mut error_returned = false;
        if kind == FaultKind::OomExhaustion && !crash {
            let chunk = 64 * MIB;
            for _ in 0..100_000 {
                if self.alloc(t, chunk)?.is_denied() {
                    error_returned = true;
                    break;
                }
            }
            self.release_all(t)?;
        } else if kind == FaultKind::KernelError {
            error_returned = !crash;
        }
        if self.model.flag("fault_propagates") {
            for (i, tenant) in self.tenants.iter_mut().enumerate() {
                if i != t {
                    tenant.faulted = true;
                }
            }
        }
        if crash {
            self.tenants[t].faulted = true;
            self.clock.advance_us(detect_us);
            return Ok(FaultReport {
                detect_us,
                recover_us,
                no_crash: false,
                error_returned: false,
                recovered: false,
            });
        }
        self.clock.advance_us(detect_us + recover_us);
        let recovered = match self.alloc(t, 2 * MIB)? {
            AllocOutcome::Granted { buffer, .. } => {
                self.free(buffer)?;
                true
            }
            _ => false,
        };
        Ok(FaultReport {
            detect_us,
            recover_us,
            no_crash: true,
            error_returned,
            recovered,
        })
    }

    /// Whether tenant `t` can still allocate and launch.
    pub fn tenant_operational(&mut self, t: TenantId) -> Result<bool, SimError> {
        if self.tenant(t)?.faulted {
            return Ok(false);
        }
        let ok = match self.alloc(t, 2 * MIB)? {
            AllocOutcome::Granted { buffer, .. } => {
                self.free(buffer)?;
                true
            }
            _ => false,
        };
        Ok(ok && self.launch(t).is_ok())
    }

    /// Defragments tenant `t`'s memory domain.
    pub fn compact(&mut self, t: TenantId) -> Result<(), SimError> {
        self.tenant(t)?;
        let domain = self.domain_of(t);
        let moves = self.domains[domain].compact();
        for (handle, _, new_offset) in moves {
            if let Some(b) = self
                .buffers
                .values_mut()
                .find(|b| b.domain == domain && b.handle == handle)
            {
                b.offset = new_offset;
            }
        }
        self.stamps[domain].clear();
        Ok(())
    }
}

/// SM limit the device actually enforces.
fn effective_sm_limit(model: &BackendModel) -> f64 {
    if model.mode.enforces_limits() {
        model.sm_limit_percent
    } else {
        100.0
    }
}

fn bucket_params(model: &BackendModel, percent: f64) -> (f64, f64) {
    let rate = percent / 100.0 * TOKENS_PER_DEVICE_SECOND;
    (rate, rate * model.burst_ms / 1000.0)
}

/// `n` points spread evenly over [-1, 1]; a single point sits at 0.
fn spread(n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![0.0; n];
    }
    (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect()
}
