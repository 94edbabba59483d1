//! Shared-resource contention: memory bandwidth, L2 cache, PCIe and
//! collectives.

use crate::catalog::Category;
use crate::error::Result;
use crate::sim::MIB;
use crate::stats::{degradation_percent, jains_index};

use super::{Evaluated, Measurement, MetricCtx};

const MAX_STREAMS: usize = 32;
const SATURATION: f64 = 0.95;
const WORKING_SET_OVERLAP: f64 = 0.5;
const TRANSFER_BYTES: u64 = 64 * MIB;

pub(super) fn evaluate(ctx: &MetricCtx) -> Result<Evaluated> {
    match ctx.id.category() {
        Category::MemoryBandwidth => bandwidth(ctx),
        Category::Cache => cache(ctx),
        Category::Pcie => pcie(ctx),
        _ => collectives(ctx),
    }
}

fn scalar(v: f64) -> Result<Evaluated> {
    Ok(Measurement::Scalar(v).into())
}

fn bandwidth(ctx: &MetricCtx) -> Result<Evaluated> {
    let n = ctx.contended();
    let mut g = ctx.gpu(n)?;
    let solo = g.model().solo_bandwidth_gbps;
    let ev = match ctx.id.ordinal() {
        1 => {
            let share = g.effective_bandwidth(n) / solo * 100.0;
            ctx.sampled(|_| Ok(share * g.tenant_noise()))?
        }
        2 => ctx.sampled(|_| Ok(jains_index(&g.bandwidth_shares(n))?))?,
        3 => {
            let agg: Vec<f64> = (1..=MAX_STREAMS).map(|k| g.aggregate_bandwidth(k)).collect();
            let peak = agg.iter().copied().fold(0.0, f64::max);
            let k = agg
                .iter()
                .position(|a| *a >= SATURATION * peak)
                .expect("the maximum itself qualifies");
            return Ok(Evaluated::from(Measurement::Scalar((k + 1) as f64)).with("peak_gbps", peak));
        }
        _ => return Ok(scalar(degradation_percent(solo, g.effective_bandwidth(2))?)?.with("solo_gbps", solo)),
    };
    Ok(ev.with("tenants", n as f64))
}

fn cache(ctx: &MetricCtx) -> Result<Evaluated> {
    let n = ctx.contended();
    let g = ctx.gpu(n)?;
    let solo = g.cache_hit_rate(1, WORKING_SET_OVERLAP);
    let shared = g.cache_hit_rate(n, WORKING_SET_OVERLAP);
    let (t_solo, t_shared) = (g.access_time(solo), g.access_time(shared));
    let v = match ctx.id.ordinal() {
        1 => shared * 100.0,
        2 => (solo - shared) / solo * 100.0,
        3 => degradation_percent(1.0 / t_solo, 1.0 / t_shared)?,
        _ => (t_shared - t_solo) / t_solo * 100.0,
    };
    Ok(scalar(v)?.with("tenants", n as f64))
}

fn pcie(ctx: &MetricCtx) -> Result<Evaluated> {
    let mut g = ctx.gpu(ctx.config.tenants)?;
    let gbps = |us: f64| TRANSFER_BYTES as f64 / (us * 1e-6) / 1e9;
    match ctx.id.ordinal() {
        1 => ctx.sampled(|_| Ok(gbps(g.transfer_us(TRANSFER_BYTES, true, true)))),
        2 => ctx.sampled(|_| Ok(gbps(g.transfer_us(TRANSFER_BYTES, false, true)))),
        3 => {
            let n = ctx.contended();
            Ok(scalar((1.0 - g.pcie_share(n)) * 100.0)?.with("tenants", n as f64))
        }
        _ => ctx.sampled(|_| {
            let pinned = g.transfer_us(TRANSFER_BYTES, true, true);
            let pageable = g.transfer_us(TRANSFER_BYTES, true, false);
            Ok(pageable / pinned)
        }),
    }
}

fn collectives(ctx: &MetricCtx) -> Result<Evaluated> {
    let mut g = ctx.gpu(ctx.config.tenants)?;
    let m = g.model().clone();
    match ctx.id.ordinal() {
        1 => ctx.sampled(|_| Ok(g.allreduce_us())),
        2 => scalar(m.nccl_gather_gbps),
        3 => scalar(m.p2p_gbps),
        _ => scalar(m.bcast_gbps),
    }
}
