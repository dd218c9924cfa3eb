//! Task-graph parallel executor.
//!
//! A task becomes ready once all of its predecessors have retired. Ready
//! tasks are handed out lowest program index first, which keeps the chain of
//! diagonal factorizations moving. No other ordering is promised; results
//! are nevertheless bit-identical to the serial executor because the graph
//! orders every pair of tasks touching the same block.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::sync::{Condvar, Mutex};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::band::BandedMatrix;
use crate::blocked::{TaskRunner, TraceEvent};
use crate::error::{Error, Result};
use crate::graph::{build_task_graph, TaskGraph};
use crate::kernels::KernelBackend;
use crate::plan::plan_windows;

/// Environment variable consulted by [`ExecPolicy::from_env`].
pub const WORKERS_ENV: &str = "BANDCHOL_WORKERS";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecPolicy {
    pub workers: usize,
    /// Seed for random start delays, used to shake out ordering bugs.
    pub jitter_seed: Option<u64>,
}

impl ExecPolicy {
    pub fn new(workers: usize) -> Self {
        Self {
            workers: workers.max(1),
            jitter_seed: None,
        }
    }

    pub fn with_jitter(mut self, seed: u64) -> Self {
        self.jitter_seed = Some(seed);
        self
    }

    /// Worker count from `BANDCHOL_WORKERS`, falling back to the available
    /// parallelism of the host.
    pub fn from_env() -> Self {
        let workers = std::env::var(WORKERS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&w| w > 0)
            .unwrap_or_else(available_cores);
        Self::new(workers)
    }
}

impl Default for ExecPolicy {
    fn default() -> Self {
        Self::from_env()
    }
}

/// Cores the process may use, as reported by the OS.
pub fn available_cores() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

struct Schedule {
    ready: BinaryHeap<Reverse<usize>>,
    pending: Vec<usize>,
    retired: usize,
    stop: bool,
    failures: Vec<(usize, Error)>,
}

fn jitter(rng: &mut ChaCha8Rng) {
    match rng.random_range(0..16u32) {
        0 => std::thread::sleep(std::time::Duration::from_micros(rng.random_range(1..50))),
        r if r < 8 => {
            for _ in 0..r {
                std::thread::yield_now();
            }
        }
        _ => {}
    }
}

fn execute(
    runner: &TaskRunner<'_>,
    graph: &TaskGraph,
    policy: &ExecPolicy,
    tracing: bool,
) -> Result<Vec<TraceEvent>> {
    let total = graph.len();
    let schedule = Mutex::new(Schedule {
        ready: graph
            .predecessors
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_empty())
            .map(|(v, _)| Reverse(v))
            .collect(),
        pending: graph.predecessors.iter().map(Vec::len).collect(),
        retired: 0,
        stop: false,
        failures: Vec::new(),
    });
    let wake = Condvar::new();

    let worker = |id: usize| -> Vec<TraceEvent> {
        let mut trace = Vec::new();
        let mut rng = policy.jitter_seed.map(|s| ChaCha8Rng::seed_from_u64(s ^ (id as u64) << 32));
        loop {
            let next = {
                let mut s = schedule.lock().unwrap();
                loop {
                    if s.stop || s.retired == total {
                        break None;
                    }
                    if let Some(Reverse(v)) = s.ready.pop() {
                        break Some(v);
                    }
                    s = wake.wait(s).unwrap();
                }
            };
            let Some(v) = next else { return trace };
            if let Some(rng) = rng.as_mut() {
                jitter(rng);
            }
            let res = runner.run_traced(v, &graph.tasks[v], id, tracing.then_some(&mut trace));

            let mut s = schedule.lock().unwrap();
            s.retired += 1;
            match res {
                Ok(()) => {
                    for &w in &graph.successors[v] {
                        s.pending[w] -= 1;
                        if s.pending[w] == 0 {
                            s.ready.push(Reverse(w));
                        }
                    }
                }
                Err(e) => {
                    // Stop handing out work; tasks already running finish
                    // before the scope below returns.
                    s.failures.push((v, e));
                    s.stop = true;
                }
            }
            drop(s);
            wake.notify_all();
        }
    };

    let mut events: Vec<TraceEvent> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..policy.workers.max(1))
            .map(|id| {
                let worker = &worker;
                scope.spawn(move || worker(id))
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    });

    let mut s = schedule.into_inner().unwrap();
    if let Some(pos) = (0..s.failures.len()).min_by_key(|&i| s.failures[i].0) {
        return Err(s.failures.swap_remove(pos).1);
    }
    debug_assert_eq!(s.retired, total);
    events.sort_by_key(|e| (e.start_ns, e.task));
    Ok(events)
}

fn factor_parallel_impl(
    a: &mut BandedMatrix,
    grid_dim: usize,
    backend: &dyn KernelBackend,
    policy: &ExecPolicy,
    tracing: bool,
) -> Result<Vec<TraceEvent>> {
    let plan = plan_windows(a.dim(), a.bandwidth(), grid_dim)?;
    let graph = build_task_graph(&plan);
    let runner = TaskRunner::new(a, &plan, backend, tracing);
    execute(&runner, &graph, policy, tracing)
}

/// Blocked factorization with tasks scheduled over `policy.workers`
/// threads. Output is bit-identical to
/// [`factor_blocked_serial`](crate::blocked::factor_blocked_serial) with the
/// same backend. On failure outstanding tasks are drained and the first
/// failure in program order is returned.
pub fn factor_blocked_parallel(
    a: &mut BandedMatrix,
    grid_dim: usize,
    backend: &dyn KernelBackend,
    policy: &ExecPolicy,
) -> Result<()> {
    factor_parallel_impl(a, grid_dim, backend, policy, false).map(drop)
}

/// As [`factor_blocked_parallel`], returning one trace record per task
/// sorted by start time.
pub fn factor_blocked_parallel_traced(
    a: &mut BandedMatrix,
    grid_dim: usize,
    backend: &dyn KernelBackend,
    policy: &ExecPolicy,
) -> Result<Vec<TraceEvent>> {
    factor_parallel_impl(a, grid_dim, backend, policy, true)
}
