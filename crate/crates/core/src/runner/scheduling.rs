//! SCHED-001 .. SCHED-004.

use crate::error::Result;

use super::{Evaluated, MetricCtx};

const CONCURRENT_KERNEL_US: f64 = 20.0;

pub(super) fn evaluate(ctx: &MetricCtx) -> Result<Evaluated> {
    let mut g = ctx.gpu(ctx.config.tenants)?;
    match ctx.id.ordinal() {
        1 => ctx.sampled(|_| Ok(g.context_switch_us())),
        2 => ctx.sampled(|_| Ok(g.launch(0)?)),
        3 => ctx.sampled(|_| {
            let l = g.launch(0)?;
            Ok((l + CONCURRENT_KERNEL_US) / (2.0 * l + CONCURRENT_KERNEL_US) * 100.0)
        }),
        _ => ctx.sampled(|_| Ok(g.preempt_ms())),
    }
}
