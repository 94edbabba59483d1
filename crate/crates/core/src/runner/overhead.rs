//! OH-001 .. OH-010.

use crate::error::Result;
use crate::sim::{AllocOutcome, SimGpu, MIB};
use crate::stats::degradation_percent;

use super::{Evaluated, Measurement, MetricCtx};

const STEP_KERNEL_US: f64 = 280.0;
const PROBE_BYTES: u64 = MIB;

pub(super) fn evaluate(ctx: &MetricCtx) -> Result<Evaluated> {
    let tenants = ctx.config.tenants;
    match ctx.id.ordinal() {
        1 => {
            let mut g = ctx.gpu(tenants)?;
            ctx.sampled(|_| Ok(g.launch(0)?))
        }
        2 | 3 => {
            let want_alloc = ctx.id.ordinal() == 2;
            let mut g = ctx.gpu(tenants)?;
            ctx.sampled(|_| {
                let (buffer, alloc_us) = granted(ctx, &mut g, PROBE_BYTES)?;
                let free_us = g.free(buffer)?;
                Ok(if want_alloc { alloc_us } else { free_us })
            })
        }
        4 => {
            let mut g = ctx.gpu(tenants)?;
            ctx.sampled(|_| Ok(g.create_context()))
        }
        5 => {
            let mut g = ctx.gpu(tenants)?;
            let mut r = ctx.reference(tenants)?;
            ctx.sampled(|_| Ok((g.passthrough_call() - r.passthrough_call()) * 1000.0))
        }
        6 => {
            let n = ctx.contended();
            let mut g = ctx.gpu(1)?;
            Ok(ctx.sampled(|_| Ok(g.sample_lock_wait(n)))?.with("tenants", n as f64))
        }
        7 => {
            let mut g = ctx.gpu(tenants)?;
            ctx.sampled(|_| Ok(g.tracking_cost_ns()))
        }
        8 => {
            let mut g = ctx.gpu(tenants)?;
            ctx.sampled(|_| Ok(g.rate_check_cost_ns()))
        }
        9 => {
            let g = ctx.gpu(1)?;
            Ok(Evaluated::from(Measurement::Scalar(g.polling_overhead_percent()))
                .with("poll_interval_ms", g.model().poll_interval_ms))
        }
        10 => {
            let mut g = ctx.gpu(tenants)?;
            let mut r = ctx.reference(tenants)?;
            ctx.sampled(|_| {
                let virt = step_us(ctx, &mut g)?;
                let native = step_us(ctx, &mut r)?;
                Ok(degradation_percent(1.0 / native, 1.0 / virt)?)
            })
        }
        _ => unreachable!("overhead has ten metrics"),
    }
}

pub(super) fn granted(ctx: &MetricCtx, g: &mut SimGpu, bytes: u64) -> Result<(crate::sim::BufferId, f64)> {
    match g.alloc(0, bytes)? {
        AllocOutcome::Granted { buffer, latency_us } => Ok((buffer, latency_us)),
        other => Err(ctx.fail(format!("allocation of {bytes} bytes was refused: {other:?}"))),
    }
}

/// One synthetic training step: allocate, launch, compute, free.
fn step_us(ctx: &MetricCtx, g: &mut SimGpu) -> Result<f64> {
    let (buffer, alloc_us) = granted(ctx, g, PROBE_BYTES)?;
    let launch_us = g.launch(0)?;
    g.run_for_us(STEP_KERNEL_US);
    let free_us = g.free(buffer)?;
    Ok(alloc_us + launch_us + STEP_KERNEL_US + free_us)
}
