//! Fragmentation under allocation churn, and fault handling.

use crate::catalog::Category;
use crate::error::Result;
use crate::scoring::graceful_degradation_score;
use crate::sim::{rng::derive_seed, AllocOutcome, FaultKind, SimGpu, SimRng};

use super::{Evaluated, Measurement, MetricCtx};

pub(super) fn evaluate(ctx: &MetricCtx) -> Result<Evaluated> {
    if ctx.id.category() == Category::Fragmentation {
        fragmentation(ctx)
    } else {
        errors(ctx)
    }
}

/// Latencies of granted allocations during churn, in order.
fn churn(ctx: &MetricCtx, g: &mut SimGpu) -> Result<Vec<f64>> {
    let w = ctx.workload();
    let mut rng = SimRng::derived(ctx.seed, "churn");
    let mut lat = Vec::new();
    for _ in 0..w.frag_rounds {
        let mut round = Vec::with_capacity(w.frag_allocs_per_round as usize);
        for _ in 0..w.frag_allocs_per_round {
            let bytes = rng.range_inclusive(w.frag_min_bytes, w.frag_max_bytes);
            if let AllocOutcome::Granted { buffer, latency_us } = g.alloc(0, bytes)? {
                lat.push(latency_us);
                round.push(buffer);
            }
        }
        for b in round.into_iter().skip(1).step_by(2) {
            g.free(b)?;
        }
    }
    Ok(lat)
}

fn fragmentation(ctx: &MetricCtx) -> Result<Evaluated> {
    let mut g = ctx.gpu(ctx.config.tenants)?;
    let lat = churn(ctx, &mut g)?;
    if lat.len() < 10 {
        return Err(ctx.fail("churn produced too few allocations"));
    }
    let live = g.heap(0)?.live_count() as f64;
    let before = g.heap(0)?.fragmentation_index()?;
    let v = match ctx.id.ordinal() {
        1 => before * 100.0,
        2 => {
            let k = lat.len() / 10;
            let first = lat[..k].iter().sum::<f64>() / k as f64;
            let last = lat[lat.len() - k..].iter().sum::<f64>() / k as f64;
            last / first
        }
        _ => {
            let free_before = g.heap(0)?.largest_free() as f64;
            g.compact(0)?;
            let heap = g.heap(0)?;
            let total = heap.total_free() as f64;
            let gained = heap.largest_free() as f64 - free_before;
            let possible = total - free_before;
            if possible > 0.0 {
                gained / possible * 100.0
            } else {
                100.0
            }
        }
    };
    Ok(Evaluated::from(Measurement::Scalar(v))
        .with("allocations", lat.len() as f64)
        .with("live_buffers", live))
}

fn errors(ctx: &MetricCtx) -> Result<Evaluated> {
    let tenants = ctx.config.tenants;
    let fresh = |label: String| -> Result<SimGpu> {
        let mut m = ctx.model.clone();
        m.rng_seed = derive_seed(ctx.seed, &label);
        Ok(SimGpu::new(m, tenants)?)
    };
    match ctx.id.ordinal() {
        1 | 2 => {
            let detect = ctx.id.ordinal() == 1;
            ctx.sampled(|i| {
                let r = fresh(format!("fault-{i}"))?.inject_fault(0, FaultKind::KernelError)?;
                Ok(if detect { r.detect_us } else { r.recover_us })
            })
        }
        _ => {
            let r = fresh("exhaustion".into())?.inject_fault(0, FaultKind::OomExhaustion)?;
            let score = graceful_degradation_score(r.no_crash, r.error_returned, r.recovered);
            Ok(Evaluated::from(Measurement::Scalar(score))
                .with("no_crash", f64::from(u8::from(r.no_crash)))
                .with("error_returned", f64::from(u8::from(r.error_returned)))
                .with("recovered", f64::from(u8::from(r.recovered))))
        }
    }
}
