//! LLM-001 .. LLM-010: inference-shaped workloads built from launches,
//! allocations and simulated compute.

use crate::error::Result;
use crate::sim::{AllocOutcome, BufferId, SimGpu, MIB};
use crate::stats::SampleSet;

use super::overhead::granted;
use super::{Evaluated, MetricCtx, KV_PAGE_BYTES};

const ACTIVATION_BYTES: u64 = 16 * MIB;
const DYNAMIC_ALLOCS: u32 = 128;
const DYNAMIC_KERNEL_US: f64 = 128.0;
const STREAMS: f64 = 4.0;
const STREAM_KERNEL_US: f64 = 200.0;
const DRAFT_KERNEL_US: f64 = 50.0;
const VERIFY_KERNEL_US: f64 = 100.0;
const FRAG_PRIMER: usize = 64;
const FRAG_PRIMER_BYTES: u64 = 32 * MIB;
const LARGE_BYTES: u64 = 3 * 512 * MIB;
const REFUSED_MS: f64 = 1000.0;
const ITEM_KERNEL_US: f64 = 200.0;
const SINGLE_GPU_STEP_US: f64 = 10_000.0;
const DEVICES: f64 = 4.0;
const ALLREDUCES_PER_STEP: u32 = 32;

pub(super) fn evaluate(ctx: &MetricCtx) -> Result<Evaluated> {
    let tenants = ctx.config.tenants;
    let w = ctx.workload();
    match ctx.id.ordinal() {
        1 => {
            let flops = 2.0 * w.batch as f64 * (w.seq_len as f64).powi(2) * w.embed_dim as f64;
            let kernel_us = flops / (w.attention_tflops * 1e12) * 1e6;
            relative(ctx, tenants, |g| {
                let t = attention_step(ctx, g, kernel_us)?;
                Ok(flops / (t * 1e-6) / 1e12)
            })
        }
        2 => relative(ctx, tenants, |g| {
            let mut t = 0.0;
            let mut held = Vec::with_capacity(DYNAMIC_ALLOCS as usize);
            for _ in 0..DYNAMIC_ALLOCS {
                t += g.launch(0)?;
                let (b, us) = granted(ctx, g, KV_PAGE_BYTES)?;
                held.push(b);
                t += us;
                g.run_for_us(DYNAMIC_KERNEL_US);
                t += DYNAMIC_KERNEL_US;
            }
            release(g, held)?;
            Ok(DYNAMIC_ALLOCS as f64 / (t * 1e-6))
        }),
        3 => {
            let mut g = ctx.gpu(tenants)?;
            let big = w.scaling_batch;
            let compute = w.batch_compute_us;
            ctx.sampled(|_| {
                let t1 = batch_us(ctx, &mut g, 1, compute)?;
                let tb = batch_us(ctx, &mut g, big, compute)?;
                Ok(t1 / tb)
            })
        }
        4 => {
            let mut g = ctx.gpu(tenants)?;
            let mut itl = Vec::with_capacity(ctx.config.iterations);
            let ev = ctx.sampled(|i| {
                let mut held = Vec::with_capacity(w.prefill_kv_pages as usize);
                let mut ttft = g.launch_batch(0, w.launches_per_token)?;
                for _ in 0..w.prefill_kv_pages {
                    let (b, us) = granted(ctx, &mut g, KV_PAGE_BYTES)?;
                    held.push(b);
                    ttft += us;
                }
                g.run_for_us(w.prefill_compute_us);
                ttft += w.prefill_compute_us;
                let mut decode = 0.0;
                for _ in 0..w.gen_tokens {
                    decode += g.launch_batch(0, w.launches_per_token)? + w.decode_compute_us;
                    g.run_for_us(w.decode_compute_us);
                }
                release(&mut g, held)?;
                if i >= ctx.config.warmup {
                    itl.push(decode / w.gen_tokens as f64 / 1000.0);
                }
                Ok(ttft / 1000.0)
            })?;
            let itl = SampleSet::new(itl)?;
            Ok(ev
                .with("itl_ms", itl.mean())
                .with("itl_p99_ms", crate::stats::percentile(&itl, 99.0)?))
        }
        5 => {
            let mut g = ctx.gpu(tenants)?;
            ctx.sampled(|_| {
                let (b, direct) = granted(ctx, &mut g, KV_PAGE_BYTES)?;
                g.free(b)?;
                let pooled = g.pool_alloc(0)?;
                Ok((pooled - direct) / direct * 100.0)
            })
        }
        6 => {
            let mut g = ctx.gpu(tenants)?;
            ctx.sampled(|_| {
                let l = g.launch(0)?;
                Ok((l + STREAM_KERNEL_US) / (STREAMS * l + STREAM_KERNEL_US) * 100.0)
            })
        }
        7 => {
            let mut g = ctx.gpu(tenants)?;
            ctx.sampled(|_| {
                let mut held = Vec::with_capacity(FRAG_PRIMER);
                for _ in 0..FRAG_PRIMER {
                    if let AllocOutcome::Granted { buffer, .. } = g.alloc(0, FRAG_PRIMER_BYTES)? {
                        held.push(buffer);
                    }
                }
                let mut keep = Vec::with_capacity(held.len() / 2 + 1);
                for (i, b) in held.into_iter().enumerate() {
                    if i % 2 == 0 {
                        g.free(b)?;
                    } else {
                        keep.push(b);
                    }
                }
                let ms = match g.alloc(0, LARGE_BYTES)? {
                    AllocOutcome::Granted { buffer, latency_us } => {
                        keep.push(buffer);
                        latency_us / 1000.0
                    }
                    _ => REFUSED_MS,
                };
                release(&mut g, keep)?;
                Ok(ms)
            })
        }
        8 => {
            let mut g = ctx.gpu(tenants)?;
            ctx.sampled(|_| {
                let l = g.launch(0)?;
                Ok((l + VERIFY_KERNEL_US) / (l + DRAFT_KERNEL_US))
            })
        }
        9 => {
            let mut g = ctx.gpu(tenants)?;
            let schedule = w.batch_schedule.clone();
            if schedule.len() < 2 {
                return Err(ctx.fail("batch schedule needs at least two batches"));
            }
            ctx.sampled(|_| {
                let lat = schedule
                    .iter()
                    .map(|&b| Ok(batch_us(ctx, &mut g, b, b as f64 * ITEM_KERNEL_US)? / 1000.0))
                    .collect::<Result<Vec<f64>>>()?;
                let s = SampleSet::new(lat)?;
                Ok(s.stddev().powi(2))
            })
        }
        10 => {
            let mut g = ctx.gpu(tenants)?;
            ctx.sampled(|_| {
                let mut comm = 0.0;
                for _ in 0..ALLREDUCES_PER_STEP {
                    comm += g.allreduce_us();
                }
                let t_multi = SINGLE_GPU_STEP_US / DEVICES + comm;
                Ok(SINGLE_GPU_STEP_US / (DEVICES * t_multi))
            })
        }
        _ => unreachable!("llm has ten metrics"),
    }
}

/// Samples `trial` on the system and, in lockstep, on native hardware, and
/// reports the system's mean as a percentage of native.
fn relative(
    ctx: &MetricCtx,
    tenants: usize,
    mut trial: impl FnMut(&mut SimGpu) -> Result<f64>,
) -> Result<Evaluated> {
    let mut g = ctx.gpu(tenants)?;
    let mut r = ctx.reference(tenants)?;
    let mut native = Vec::with_capacity(ctx.config.iterations);
    let ev = ctx.sampled(|i| {
        let v = trial(&mut g)?;
        let n = trial(&mut r)?;
        if i >= ctx.config.warmup {
            native.push(n);
        }
        Ok(v)
    })?;
    let native = SampleSet::new(native)?.mean();
    let pct = ev.measurement.value() / native * 100.0;
    Ok(ev.with("native_mean", native).with("percent_of_native", pct))
}

fn attention_step(ctx: &MetricCtx, g: &mut SimGpu, kernel_us: f64) -> Result<f64> {
    let mut t = 0.0;
    let mut held = Vec::with_capacity(3);
    for _ in 0..3 {
        let (b, us) = granted(ctx, g, ACTIVATION_BYTES)?;
        held.push(b);
        t += us;
    }
    t += g.launch(0)?;
    g.run_for_us(kernel_us);
    t += kernel_us;
    release(g, held)?;
    Ok(t)
}

/// One batch of `b` requests: a launch and a KV page each, then `compute_us`
/// of device work.
fn batch_us(ctx: &MetricCtx, g: &mut SimGpu, b: u32, compute_us: f64) -> Result<f64> {
    let mut t = 0.0;
    let mut held = Vec::with_capacity(b as usize);
    for _ in 0..b {
        t += g.launch(0)?;
        let (buf, us) = granted(ctx, g, KV_PAGE_BYTES)?;
        held.push(buf);
        t += us;
    }
    g.run_for_us(compute_us);
    t += compute_us;
    release(g, held)?;
    Ok(t)
}

fn release(g: &mut SimGpu, held: Vec<BufferId>) -> Result<()> {
    for b in held {
        g.free(b)?;
    }
    Ok(())
}
