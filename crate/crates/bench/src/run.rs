use std::fs::File;
use std::hash::{DefaultHasher, Hasher};
use std::io::{BufWriter, Write};
use std::time::{Duration, Instant};

use bandchol::{
    factor_blocked_parallel, factor_blocked_parallel_traced, factor_blocked_serial, factor_blocked_serial_traced,
    factor_reference_in_place, flops_exact, generate_spd, residual_norm, select_grid_dim, BandedMatrix, ExecPolicy,
    TraceEvent,
};
use serde::Serialize;

use crate::config::{BenchConfig, ConfigError, Impl};
use crate::record::BenchRecord;

/// Time source for the harness; swapped for a scripted clock in tests.
pub trait Clock {
    fn now(&self) -> Duration;
}

pub struct WallClock(Instant);

impl WallClock {
    pub fn new() -> Self {
        Self(Instant::now())
    }
}

impl Default for WallClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for WallClock {
    fn now(&self) -> Duration {
        self.0.elapsed()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] bandchol::Error),
    #[error("writing trace: {0}")]
    Trace(#[from] std::io::Error),
}

/// Median of `samples`; the mean of the two middle values for even counts.
pub fn median(samples: &[f64]) -> f64 {
    assert!(!samples.is_empty());
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let mid = s.len() / 2;
    if s.len() % 2 == 1 {
        s[mid]
    } else {
        (s[mid - 1] + s[mid]) / 2.0
    }
}

fn digest(a: &BandedMatrix) -> u64 {
    let mut h = DefaultHasher::new();
    for x in a.data() {
        h.write_u64(x.to_bits());
    }
    h.finish()
}

#[derive(Serialize)]
struct TraceLine<'a> {
    k: usize,
    #[serde(rename = "impl")]
    implementation: &'a str,
    #[serde(flatten)]
    event: &'a TraceEvent,
}

struct Job<'a> {
    config: &'a BenchConfig,
    implementation: Impl,
    grid_dim: usize,
    policy: ExecPolicy,
}

impl Job<'_> {
    fn factor(&self, a: &mut BandedMatrix) -> bandchol::Result<()> {
        let be = self.config.backend.kernels();
        match self.implementation {
            Impl::Reference => factor_reference_in_place(a, false).map(drop),
            Impl::BlockedSerial => factor_blocked_serial(a, self.grid_dim, be),
            Impl::BlockedParallel => factor_blocked_parallel(a, self.grid_dim, be, &self.policy),
        }
    }

    fn trace(&self, a: &mut BandedMatrix) -> bandchol::Result<Vec<TraceEvent>> {
        let be = self.config.backend.kernels();
        match self.implementation {
            Impl::Reference => Ok(Vec::new()),
            Impl::BlockedSerial => factor_blocked_serial_traced(a, self.grid_dim, be),
            Impl::BlockedParallel => factor_blocked_parallel_traced(a, self.grid_dim, be, &self.policy),
        }
    }

    fn workers(&self) -> usize {
        match self.implementation {
            Impl::BlockedParallel => self.policy.workers,
            _ => 1,
        }
    }
}

/// Runs every (bandwidth, implementation) pair of `config` against the wall
/// clock.
pub fn run_benchmark(config: &BenchConfig) -> Result<Vec<BenchRecord>, RunError> {
    run_benchmark_with(config, &WallClock::new())
}

/// As [`run_benchmark`] with an explicit clock. The clock is read exactly
/// twice per timed repetition, immediately around the factorization call.
pub fn run_benchmark_with(config: &BenchConfig, clock: &dyn Clock) -> Result<Vec<BenchRecord>, RunError> {
    config.validate()?;
    let workers = config.workers.unwrap_or_else(|| ExecPolicy::from_env().workers);
    let mut trace_out = config.trace.as_ref().map(File::create).transpose()?.map(BufWriter::new);
    let mut records = Vec::new();

    for &requested in &config.bandwidths {
        let k = config.effective_bandwidth(requested);
        if k != requested {
            log::info!("bandwidth {requested} padded to {k}");
        }
        let base = generate_spd(config.dim, requested, config.seed)?.pad_bandwidth(k)?;
        let flops = flops_exact(config.dim, k)?;
        let grid_dim = match config.grid_dim {
            Some(n) => n,
            None if config.impls.iter().any(|i| i.is_blocked()) => select_grid_dim(k, workers)?,
            None => 0,
        };

        for &implementation in &config.impls {
            let job = Job {
                config,
                implementation,
                grid_dim,
                policy: ExecPolicy::new(workers),
            };
            let mut record = BenchRecord {
                dim: config.dim,
                bandwidth: k,
                grid_dim: implementation.is_blocked().then_some(grid_dim),
                workers: job.workers(),
                implementation,
                backend: config.backend.tag().to_string(),
                repetitions: config.repetitions,
                median_seconds: None,
                gflops: None,
                residual: None,
                factor_digest: None,
                error: None,
            };

            let outcome = (|| -> bandchol::Result<(f64, BandedMatrix)> {
                // Warmup, discarded.
                job.factor(&mut base.clone())?;
                let mut times = Vec::with_capacity(config.repetitions);
                let mut last = None;
                for _ in 0..config.repetitions {
                    let mut a = base.clone();
                    let t0 = clock.now();
                    let res = job.factor(&mut a);
                    let t1 = clock.now();
                    res?;
                    times.push(t1.saturating_sub(t0).as_secs_f64());
                    last = Some(a);
                }
                Ok((median(&times), last.expect("at least one repetition")))
            })();

            match outcome {
                Ok((seconds, mut factor)) => {
                    record.median_seconds = Some(seconds);
                    record.gflops = Some(flops.gflops(seconds));
                    record.factor_digest = Some(digest(&factor));
                    if config.inject_fault {
                        let d = factor.get(0, 0)?;
                        factor.set(0, 0, d + 1.0)?;
                    }
                    if config.check {
                        record.residual = Some(residual_norm(&base, &factor)?);
                    }
                }
                Err(e) => {
                    log::error!("{implementation} at k={k} failed: {e}");
                    record.error = Some(e.to_string());
                }
            }

            if let (Some(out), true) = (trace_out.as_mut(), implementation.is_blocked()) {
                for event in &job.trace(&mut base.clone())? {
                    let line = TraceLine {
                        k,
                        implementation: implementation.tag(),
                        event,
                    };
                    serde_json::to_writer(&mut *out, &line).map_err(std::io::Error::other)?;
                    out.write_all(b"\n")?;
                }
            }
            records.push(record);
        }
    }
    if let Some(mut out) = trace_out {
        out.flush()?;
    }
    Ok(records)
}
