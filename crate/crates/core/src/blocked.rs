//! Executing block tasks against packed band storage, and the serial
//! blocked factorization.

use std::sync::RwLock;
use std::time::Instant;

use serde::Serialize;

use crate::band::{BandShape, BandedMatrix, BlockRegion, DenseBlockView};
use crate::error::{Error, Result};
use crate::graph::{window_tasks, BlockTask, TaskKind};
use crate::kernels::{KernelBackend, MatMut, MatRef};
use crate::plan::{plan_windows, WindowPlan};

/// Square scratch block holding the bottom-left trapezoid of a window.
///
/// Only the upper triangle (diagonal included) of that block lies inside the
/// band; the strictly lower triangle of the buffer is kept at zero so the
/// full square can go through the dense kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkArray {
    size: usize,
    buf: Vec<f64>,
}

impl WorkArray {
    pub fn new(size: usize) -> Self {
        Self {
            size,
            buf: vec![0.0; size * size],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.buf
    }

    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.buf[q * self.size + p]
    }

    /// True when every strictly-lower entry is exactly zero.
    pub fn is_lower_clean(&self) -> bool {
        (0..self.size).all(|q| self.buf[q * self.size + q + 1..(q + 1) * self.size].iter().all(|&v| v == 0.0))
    }

    /// Loads the in-band upper triangle of `view` (rows `0..view.rows`) and
    /// zeroes everything else.
    ///
    /// # Safety
    /// `band` must point at the panel array the view was built for, and no
    /// one may write the addressed elements meanwhile.
    pub unsafe fn copy_in(&mut self, band: *const f64, view: &DenseBlockView) {
        debug_assert_eq!(view.region, BlockRegion::Upper);
        self.buf.fill(0.0);
        for q in 0..view.cols {
            for p in 0..view.rows.min(q + 1) {
                self.buf[q * self.size + p] = *band.add(view.offset_of(p, q));
            }
        }
    }

    /// Writes the upper triangle back into the band.
    ///
    /// # Safety
    /// As for [`WorkArray::copy_in`], with exclusive access to the addressed
    /// elements.
    pub unsafe fn copy_back(&self, band: *mut f64, view: &DenseBlockView) {
        for q in 0..view.cols {
            for p in 0..view.rows.min(q + 1) {
                *band.add(view.offset_of(p, q)) = self.buf[q * self.size + p];
            }
        }
    }

    fn view_mut(&mut self, rows: usize, cols: usize) -> MatMut<'_> {
        MatMut::from_slice(&mut self.buf, rows, cols, self.size)
    }

    fn view(&self, rows: usize, cols: usize) -> MatRef<'_> {
        MatRef::from_slice(&self.buf, rows, cols, self.size)
    }
}

/// One executed task, for trace dumps and schedule checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    /// Position of the task in program order.
    pub task: usize,
    pub kind: TaskKind,
    pub window: usize,
    pub row: usize,
    pub col: usize,
    pub worker: usize,
    /// Nanoseconds since the start of the factorization.
    pub start_ns: u64,
    pub end_ns: u64,
}

/// Writes one JSON record per line.
pub fn write_trace<W: std::io::Write>(events: &[TraceEvent], mut out: W) -> Result<()> {
    for ev in events {
        let line = serde_json::to_string(ev).map_err(|e| Error::Io(e.to_string()))?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

#[derive(Clone, Copy)]
struct BandPtr(*mut f64);

// The executor hands out disjoint block regions; see `TaskRunner::run`.
unsafe impl Send for BandPtr {}
unsafe impl Sync for BandPtr {}

/// Shared state for executing the tasks of one factorization.
pub(crate) struct TaskRunner<'a> {
    band: BandPtr,
    shape: BandShape,
    plan: &'a WindowPlan,
    backend: &'a dyn KernelBackend,
    /// One work array slot per window, allocated by copy-in and released by
    /// copy-back.
    work: Vec<RwLock<Option<WorkArray>>>,
    /// Trace time origin; only set when tracing, so untraced runs never
    /// read the clock.
    epoch: Option<Instant>,
}

impl<'a> TaskRunner<'a> {
    pub(crate) fn new(
        a: &'a mut BandedMatrix,
        plan: &'a WindowPlan,
        backend: &'a dyn KernelBackend,
        tracing: bool,
    ) -> Self {
        let shape = a.shape();
        let band = BandPtr(a.data_mut().as_mut_ptr());
        Self {
            band,
            shape,
            plan,
            backend,
            work: (0..plan.window_count()).map(|_| RwLock::new(None)).collect(),
            epoch: tracing.then(Instant::now),
        }
    }

    pub(crate) fn plan(&self) -> &WindowPlan {
        self.plan
    }

    fn view(&self, t: usize, i: usize, j: usize, region: BlockRegion) -> Result<DenseBlockView> {
        let c = self.plan.cell(t, i, j);
        self.shape.block_view(c.row0, c.col0, c.rows, c.cols, region)
    }

    unsafe fn band_mut(&self, v: &DenseBlockView) -> MatMut<'_> {
        MatMut::from_raw_parts(self.band.0.add(v.offset), v.rows, v.cols, v.col_stride)
    }

    unsafe fn band_ref(&self, v: &DenseBlockView) -> MatRef<'_> {
        MatRef::from_raw_parts(self.band.0.add(v.offset), v.rows, v.cols, v.col_stride)
    }

    /// Runs one task and records it in `trace` when given.
    pub(crate) fn run_traced(
        &self,
        index: usize,
        task: &BlockTask,
        worker: usize,
        trace: Option<&mut Vec<TraceEvent>>,
    ) -> Result<()> {
        let stamp = || self.epoch.map_or(0, |e| e.elapsed().as_nanos() as u64);
        let start = if trace.is_some() { stamp() } else { 0 };
        // Safety: callers only run a task once all of its hazard
        // predecessors have retired and never concurrently with a task that
        // touches the same physical block (see `graph::build_task_graph`).
        let res = unsafe { self.run(task) };
        if let Some(trace) = trace {
            trace.push(TraceEvent {
                task: index,
                kind: task.kind,
                window: task.cell.window,
                row: task.cell.row,
                col: task.cell.col,
                worker,
                start_ns: start,
                end_ns: stamp(),
            });
        }
        res
    }

    /// # Safety
    /// The blocks `task` touches must not be accessed by any other thread
    /// while it runs, except for concurrent reads of blocks it only reads.
    unsafe fn run(&self, task: &BlockTask) -> Result<()> {
        let (t, i, j) = (task.cell.window, task.cell.row, task.cell.col);
        let n = self.plan.grid_dim;
        let bottom = n - 1;
        let be = self.backend;
        match task.kind {
            TaskKind::FactorDiag => {
                let v = self.view(t, 0, 0, BlockRegion::Lower)?;
                be.factor_diag(self.band_mut(&v)).map_err(|e| match e {
                    Error::NotPositiveDefinite { column } => Error::NotPositiveDefinite { column: v.col0 + column },
                    other => other,
                })
            }
            TaskKind::SolvePanel => {
                let diag = self.view(t, 0, 0, BlockRegion::Lower)?;
                let factor = self.band_ref(&diag);
                if i == bottom {
                    let mut slot = self.work[t].write().unwrap();
                    let work = slot.as_mut().expect("copy-in precedes the bottom-row solve");
                    debug_assert!(work.is_lower_clean(), "work array lower triangle must be zero");
                    let rows = self.plan.windows[t].extents[bottom];
                    be.solve_panel(work.view_mut(rows, diag.cols), factor)
                } else {
                    let v = self.view(t, i, 0, BlockRegion::Full)?;
                    be.solve_panel(self.band_mut(&v), factor)
                }
            }
            TaskKind::UpdateGeneral => {
                let target = self.view(t, i, j, BlockRegion::Full)?;
                let right = self.view(t, j, 0, BlockRegion::Full)?;
                if i == bottom {
                    let slot = self.work[t].read().unwrap();
                    let work = slot.as_ref().expect("bottom-row panel lives in the work array");
                    let left = work.view(target.rows, right.cols);
                    be.update_general(self.band_mut(&target), left, self.band_ref(&right))
                } else {
                    let left = self.view(t, i, 0, BlockRegion::Full)?;
                    be.update_general(self.band_mut(&target), self.band_ref(&left), self.band_ref(&right))
                }
            }
            TaskKind::UpdateSymmetric => {
                let target = self.view(t, i, i, BlockRegion::Lower)?;
                if i == bottom {
                    let slot = self.work[t].read().unwrap();
                    let work = slot.as_ref().expect("bottom-row panel lives in the work array");
                    let inner = self.plan.windows[t].extents[0];
                    be.update_symmetric(self.band_mut(&target), work.view(target.rows, inner))
                } else {
                    let panel = self.view(t, i, 0, BlockRegion::Full)?;
                    be.update_symmetric(self.band_mut(&target), self.band_ref(&panel))
                }
            }
            TaskKind::CopyIn => {
                let v = self.view(t, bottom, 0, BlockRegion::Upper)?;
                let mut work = WorkArray::new(self.plan.block_size);
                work.copy_in(self.band.0, &v);
                *self.work[t].write().unwrap() = Some(work);
                Ok(())
            }
            TaskKind::CopyBack => {
                let v = self.view(t, bottom, 0, BlockRegion::Upper)?;
                let work = self.work[t].write().unwrap().take().expect("copy-back after copy-in");
                work.copy_back(self.band.0, &v);
                Ok(())
            }
        }
    }
}

fn factor_serial_impl(
    a: &mut BandedMatrix,
    grid_dim: usize,
    backend: &dyn KernelBackend,
    mut trace: Option<&mut Vec<TraceEvent>>,
) -> Result<()> {
    let plan = plan_windows(a.dim(), a.bandwidth(), grid_dim)?;
    let runner = TaskRunner::new(a, &plan, backend, trace.is_some());
    let mut index = 0;
    for t in 0..runner.plan().window_count() {
        for task in window_tasks(runner.plan(), t) {
            runner.run_traced(index, &task, 0, trace.as_deref_mut())?;
            index += 1;
        }
    }
    Ok(())
}

/// Blocked factorization executed in program order on the calling thread.
/// `a` is overwritten with `L`.
pub fn factor_blocked_serial(a: &mut BandedMatrix, grid_dim: usize, backend: &dyn KernelBackend) -> Result<()> {
    factor_serial_impl(a, grid_dim, backend, None)
}

/// As [`factor_blocked_serial`], also returning the executed task sequence.
pub fn factor_blocked_serial_traced(
    a: &mut BandedMatrix,
    grid_dim: usize,
    backend: &dyn KernelBackend,
) -> Result<Vec<TraceEvent>> {
    let mut trace = Vec::new();
    factor_serial_impl(a, grid_dim, backend, Some(&mut trace))?;
    Ok(trace)
}
