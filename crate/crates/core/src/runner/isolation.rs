//! IS-001 .. IS-010.

use crate::error::Result;
use crate::sim::{
    backend::TOKENS_PER_DEVICE_SECOND, AllocOutcome, FaultKind, SimGpu, SimRng, MIB,
};
use crate::stats::{degradation_percent, jains_index, SampleSet};

use super::{Evaluated, Measurement, MetricCtx};

const PROBE_CHUNK: u64 = 2 * MIB;
const KERNEL_TOKENS: f64 = 20.0;
const UTIL_WINDOW_MS: u64 = 100;
const RESPONSE_WINDOW_MS: u64 = 1;
const SETTLE_BAND: f64 = 0.05;
const MS: u64 = 1_000_000;

pub(super) fn evaluate(ctx: &MetricCtx) -> Result<Evaluated> {
    let n = ctx.contended();
    match ctx.id.ordinal() {
        1 => limit_accuracy(ctx),
        2 => {
            let mut g = ctx.gpu(1)?;
            fill(&mut g, 256 * MIB)?;
            fill(&mut g, PROBE_CHUNK)?;
            ctx.sampled(|_| match g.alloc(0, PROBE_CHUNK)? {
                AllocOutcome::Granted { .. } => Err(ctx.fail("over-limit allocation was granted")),
                denied => Ok(denied.latency_us()),
            })
        }
        3 => utilization_accuracy(ctx),
        4 => limit_response(ctx),
        5 => memory_isolation(ctx, n),
        6 | 7 | 8 => {
            let which = ctx.id.ordinal();
            let mut g = ctx.gpu(n)?;
            Ok(ctx
                .sampled(|_| {
                    let x = g.tenant_throughputs(n);
                    Ok(match which {
                        6 => (x.iter().sum::<f64>() / n as f64).clamp(0.0, 1.0),
                        7 => {
                            let s = SampleSet::new(x)?;
                            s.stddev() / s.mean()
                        }
                        _ => jains_index(&x)?,
                    })
                })?
                .with("tenants", n as f64))
        }
        9 => {
            let mut g = ctx.gpu(n)?;
            Ok(ctx
                .sampled(|_| {
                    let quiet = g.tenant_noise();
                    let noisy = g.tenant_noise() * g.interference_factor(n as f64);
                    Ok(degradation_percent(quiet, noisy)?)
                })?
                .with("tenants", n as f64))
        }
        10 => {
            let mut g = ctx.gpu(n.max(2))?;
            let report = g.inject_fault(0, FaultKind::KernelError)?;
            let mut ok = true;
            for t in 1..g.tenant_count() {
                ok &= g.tenant_operational(t)?;
            }
            Ok(Evaluated::from(Measurement::Outcome(ok)).with("detect_us", report.detect_us))
        }
        _ => unreachable!("isolation has ten metrics"),
    }
}

/// Allocates `chunk`-sized blocks until the system refuses.
fn fill(g: &mut SimGpu, chunk: u64) -> Result<u64> {
    let mut granted = 0;
    while let AllocOutcome::Granted { .. } = g.alloc(0, chunk)? {
        granted += chunk;
    }
    Ok(granted)
}

fn limit_accuracy(ctx: &MetricCtx) -> Result<Evaluated> {
    let mut g = ctx.gpu(1)?;
    let configured = ctx.model.mem_limit() as f64;
    let observed = fill(&mut g, PROBE_CHUNK)? as f64;
    let acc = observed.min(configured) / observed.max(configured) * 100.0;
    Ok(Evaluated::from(Measurement::Scalar(acc))
        .with("configured_mb", configured / MIB as f64)
        .with("observed_mb", observed / MIB as f64))
}

/// A saturating stream of equal kernels replayed through one tenant's
/// limiter.
struct Stream {
    next_ns: u64,
    pending: Option<u64>,
}

impl Stream {
    fn new(start_ns: u64) -> Stream {
        Stream {
            next_ns: start_ns,
            pending: None,
        }
    }

    /// Tokens admitted in `[.., end_ns)`.
    fn run_until(&mut self, g: &mut SimGpu, end_ns: u64) -> Result<f64> {
        let mut tokens = 0.0;
        loop {
            let at = match self.pending.take() {
                Some(t) => t,
                None => g.admit_at(0, KERNEL_TOKENS, self.next_ns)?,
            };
            if at >= end_ns {
                self.pending = Some(at);
                return Ok(tokens);
            }
            tokens += KERNEL_TOKENS;
            self.next_ns = at;
        }
    }
}

fn utilization_accuracy(ctx: &MetricCtx) -> Result<Evaluated> {
    let mut g = ctx.gpu(1)?;
    let target = ctx.model.sm_limit_percent;
    let overshoot = ctx.model.util_overshoot;
    let window_s = UTIL_WINDOW_MS as f64 / 1000.0;
    let mut stream = Stream::new(0);
    let mut end = 0;
    let ev = ctx.sampled(|_| {
        end += UTIL_WINDOW_MS * MS;
        let admitted = stream.run_until(&mut g, end)?;
        let charged = admitted / (TOKENS_PER_DEVICE_SECOND * window_s) * 100.0;
        let actual = charged * (1.0 + overshoot * g.tenant_noise());
        Ok(utilization_score(target, actual) * 100.0)
    })?;
    Ok(ev.with("target_percent", target))
}

/// `max(0, 1 - |target - actual| / target)`.
pub fn utilization_score(target: f64, actual: f64) -> f64 {
    (1.0 - (target - actual).abs() / target).clamp(0.0, 1.0)
}

fn limit_response(ctx: &MetricCtx) -> Result<Evaluated> {
    let mut g = ctx.gpu(1)?;
    let mut phases = SimRng::derived(ctx.seed, "poll-phase");
    let before = ctx.model.sm_limit_percent;
    let after = before / 2.0;
    let poll_ns = (ctx.model.poll_interval_ms * MS as f64) as u64;
    let software = ctx.model.mode.is_software();
    let lead = 50 * MS;
    let tail = 2 * poll_ns + 50 * MS;
    let mut t0 = 0;
    ctx.sampled(|_| {
        g.set_sm_limit_at(0, before, t0)?;
        let mut stream = Stream::new(t0);
        stream.run_until(&mut g, t0 + lead)?;
        let change = t0 + lead;
        let apply = if software {
            let phase = (phases.unit() * poll_ns as f64) as u64;
            change + phase
        } else {
            change
        };
        let windows = tail / (RESPONSE_WINDOW_MS * MS);
        let mut util = Vec::with_capacity(windows as usize);
        let mut applied = false;
        for w in 0..windows {
            let start = change + w * RESPONSE_WINDOW_MS * MS;
            let end = start + RESPONSE_WINDOW_MS * MS;
            let mut tokens = 0.0;
            if !applied && apply < end {
                tokens += stream.run_until(&mut g, apply)?;
                let at = apply.max(g.bucket(0)?.last_refill_ns());
                g.set_sm_limit_at(0, after, at)?;
                applied = true;
            }
            tokens += stream.run_until(&mut g, end)?;
            util.push(tokens / (TOKENS_PER_DEVICE_SECOND * RESPONSE_WINDOW_MS as f64 / 1000.0) * 100.0);
        }
        t0 = stream.pending.unwrap_or(stream.next_ns).max(change + tail) + MS;
        Ok(settle_ms(&util))
    })
}

/// Time from the first window until utilization stays within the settle band
/// of its final level.
fn settle_ms(util: &[f64]) -> f64 {
    let tail = &util[util.len().saturating_sub(10)..];
    let steady = tail.iter().sum::<f64>() / tail.len() as f64;
    let within = |u: &f64| (u - steady).abs() <= SETTLE_BAND * steady;
    let first_stable = util
        .iter()
        .rposition(|u| !within(u))
        .map_or(0, |i| i + 1);
    (first_stable as u64 * RESPONSE_WINDOW_MS) as f64
}

fn memory_isolation(ctx: &MetricCtx, n: usize) -> Result<Evaluated> {
    let mut g = ctx.gpu(n)?;
    let mut rng = SimRng::derived(ctx.seed, "pattern-ops");
    let mut live: Vec<(usize, crate::sim::BufferId)> = Vec::new();
    let mut checks = 0u64;
    let mut clean = true;
    for _ in 0..ctx.config.iterations {
        for t in 0..n {
            let bytes = rng.range_inclusive(1, 8) * MIB;
            if let AllocOutcome::Granted { buffer, .. } = g.alloc(t, bytes)? {
                clean &= g.foreign_patterns(buffer)?.is_empty();
                g.write_pattern(buffer, 0xA11C_E000 + t as u64)?;
                live.push((t, buffer));
                checks += 1;
            }
        }
        clean &= g.tenants_disjoint();
        let mut keep = Vec::with_capacity(live.len());
        for (t, b) in live.drain(..) {
            if rng.unit() < 0.5 {
                g.free(b)?;
            } else {
                keep.push((t, b));
            }
        }
        live = keep;
    }
    for (_, b) in &live {
        clean &= g.foreign_patterns(*b)?.is_empty();
    }
    Ok(Evaluated::from(Measurement::Outcome(clean)).with("checks", checks as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn utilization_score_examples() {
        assert_eq!(utilization_score(50.0, 50.0), 1.0);
        assert!((utilization_score(50.0, 57.3) - 0.854).abs() < 1e-12);
        assert_eq!(utilization_score(50.0, 200.0), 0.0);
    }

    #[test]
    fn settle_examples() {
        let mut u = vec![50.0; 5];
        u.extend(vec![25.0; 20]);
        assert_eq!(settle_ms(&u), 5.0);
        assert_eq!(settle_ms(&[25.0; 20]), 0.0);
    }
}
