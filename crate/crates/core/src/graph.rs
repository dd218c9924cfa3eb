//! Block tasks and their dependency graph.
//!
//! Every task writes exactly one block cell of its window. Cells are
//! versioned by window index; because block `(i, j)` of window `t` is the
//! same storage as block `(i - 1, j - 1)` of window `t + 1`, each cell maps to
//! a physical block keyed by its global block coordinates `(t + i, t + j)`.
//! Edges come from read/write hazards on those physical blocks, which gives
//! both the edges inside one window and the cross-window edges.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::plan::WindowPlan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DepCell {
    pub window: usize,
    pub row: usize,
    pub col: usize,
}

impl DepCell {
    pub fn new(window: usize, row: usize, col: usize) -> Self {
        Self { window, row, col }
    }

    /// Global block coordinates of the storage this cell names.
    pub fn physical(&self) -> (usize, usize) {
        (self.window + self.row, self.window + self.col)
    }

    /// The same storage as seen from the previous window, if it was part of
    /// that window's grid.
    pub fn prior_alias(&self, grid_dim: usize) -> Option<DepCell> {
        (self.window > 0 && self.row + 1 < grid_dim)
            .then(|| DepCell::new(self.window - 1, self.row + 1, self.col + 1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TaskKind {
    FactorDiag,
    SolvePanel,
    UpdateGeneral,
    UpdateSymmetric,
    CopyIn,
    CopyBack,
}

impl TaskKind {
    pub fn tag(self) -> &'static str {
        match self {
            TaskKind::FactorDiag => "factor_diag",
            TaskKind::SolvePanel => "solve_panel",
            TaskKind::UpdateGeneral => "update_general",
            TaskKind::UpdateSymmetric => "update_symmetric",
            TaskKind::CopyIn => "copy_in",
            TaskKind::CopyBack => "copy_back",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockTask {
    pub kind: TaskKind,
    /// The cell the task writes.
    pub cell: DepCell,
    /// Operand cells of the same window that are only read.
    pub reads: Vec<DepCell>,
}

impl BlockTask {
    fn new(kind: TaskKind, window: usize, row: usize, col: usize, reads: &[(usize, usize)]) -> Self {
        Self {
            kind,
            cell: DepCell::new(window, row, col),
            reads: reads.iter().map(|&(r, c)| DepCell::new(window, r, c)).collect(),
        }
    }

    pub fn writes(&self) -> DepCell {
        self.cell
    }
}

/// Tasks of window `t` in program order. Rows whose blocks fall entirely
/// past the end of the matrix are skipped.
pub fn window_tasks(plan: &WindowPlan, t: usize) -> Vec<BlockTask> {
    use TaskKind::*;
    let n = plan.grid_dim;
    let w = &plan.windows[t];
    let present = |i: usize| w.extents[i] > 0;
    let mut tasks = Vec::with_capacity(n * (n + 1) / 2 + 2);

    tasks.push(BlockTask::new(FactorDiag, t, 0, 0, &[]));
    for i in 1..n - 1 {
        if !present(i) {
            break;
        }
        tasks.push(BlockTask::new(SolvePanel, t, i, 0, &[(0, 0)]));
        for j in 1..i {
            tasks.push(BlockTask::new(UpdateGeneral, t, i, j, &[(i, 0), (j, 0)]));
        }
        tasks.push(BlockTask::new(UpdateSymmetric, t, i, i, &[(i, 0)]));
    }
    let last = n - 1;
    if present(last) {
        tasks.push(BlockTask::new(CopyIn, t, last, 0, &[]));
        tasks.push(BlockTask::new(SolvePanel, t, last, 0, &[(0, 0)]));
        for j in 1..last {
            tasks.push(BlockTask::new(UpdateGeneral, t, last, j, &[(last, 0), (j, 0)]));
        }
        tasks.push(BlockTask::new(UpdateSymmetric, t, last, last, &[(last, 0)]));
        tasks.push(BlockTask::new(CopyBack, t, last, 0, &[]));
    }
    tasks
}

/// All tasks of the plan in sequential program order.
pub fn program_order(plan: &WindowPlan) -> Vec<BlockTask> {
    (0..plan.window_count()).flat_map(|t| window_tasks(plan, t)).collect()
}

#[derive(Debug, Clone)]
pub struct TaskGraph {
    pub grid_dim: usize,
    /// Tasks in program order; every edge points forward in this order.
    pub tasks: Vec<BlockTask>,
    pub successors: Vec<Vec<usize>>,
    pub predecessors: Vec<Vec<usize>>,
}

impl TaskGraph {
    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.successors.iter().map(Vec::len).sum()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.successors[from].binary_search(&to).is_ok()
    }

    /// Index of the task with this kind writing `cell`.
    pub fn find(&self, kind: TaskKind, cell: DepCell) -> Option<usize> {
        self.tasks.iter().position(|t| t.kind == kind && t.cell == cell)
    }

    /// Longest chain of tasks under unit cost.
    pub fn critical_path_len(&self) -> usize {
        self.critical_path_weighted(|_| 1) as usize
    }

    /// Longest path where each task costs `cost(task)`.
    pub fn critical_path_weighted(&self, cost: impl Fn(&BlockTask) -> u64) -> u64 {
        // Program order is a topological order.
        let mut finish = vec![0u64; self.len()];
        let mut best = 0;
        for v in 0..self.len() {
            let start = self.predecessors[v].iter().map(|&u| finish[u]).max().unwrap_or(0);
            finish[v] = start + cost(&self.tasks[v]);
            best = best.max(finish[v]);
        }
        best
    }
}

#[derive(Default)]
struct Access {
    last_writer: Option<usize>,
    readers: Vec<usize>,
}

/// Builds the task list and its hazard edges (read-after-write,
/// write-after-read and write-after-write on physical blocks).
pub fn build_task_graph(plan: &WindowPlan) -> TaskGraph {
    let n = plan.grid_dim;
    let tasks = program_order(plan);
    let blocks = plan.window_count() + n;
    // Physical block (r, c) with r - c < n lives at slot r * n + (r - c).
    let mut access: Vec<Access> = (0..blocks * n).map(|_| Access::default()).collect();
    let slot = |cell: &DepCell| {
        let (r, c) = cell.physical();
        r * n + (r - c)
    };

    let mut predecessors: Vec<Vec<usize>> = vec![Vec::new(); tasks.len()];
    for (idx, task) in tasks.iter().enumerate() {
        let preds = &mut predecessors[idx];
        for read in &task.reads {
            let acc = &mut access[slot(read)];
            preds.extend(acc.last_writer);
            acc.readers.push(idx);
        }
        let acc = &mut access[slot(&task.cell)];
        preds.extend(acc.last_writer);
        preds.extend(acc.readers.drain(..).filter(|&r| r != idx));
        acc.last_writer = Some(idx);
        preds.sort_unstable();
        preds.dedup();
    }

    let mut successors: Vec<Vec<usize>> = vec![Vec::new(); tasks.len()];
    for (v, preds) in predecessors.iter().enumerate() {
        for &u in preds {
            successors[u].push(v);
        }
    }
    TaskGraph {
        grid_dim: n,
        tasks,
        successors,
        predecessors,
    }
}

/// Target block size for the level-3 kernels.
pub const TARGET_BLOCK: usize = 50;

/// Picks the grid dimension `n` for bandwidth `k` on `cores` physical cores.
///
/// The bandwidth must be even (so that `n = 3` is always possible); among
/// `3 <= n <= max(3, cores)` with `(n - 1) | k` the block size closest to
/// [`TARGET_BLOCK`] wins, ties going to the larger `n`.
pub fn select_grid_dim(bandwidth: usize, cores: usize) -> Result<usize> {
    let reject = || Error::BandwidthNotDivisible { bandwidth, grid_dim: 3 };
    if bandwidth < 2 || !bandwidth.is_multiple_of(2) {
        return Err(reject());
    }
    let upper = cores.max(3);
    (3..=upper)
        .filter(|n| bandwidth.is_multiple_of(n - 1))
        .min_by_key(|&n| ((bandwidth / (n - 1)).abs_diff(TARGET_BLOCK), std::cmp::Reverse(n)))
        .ok_or_else(reject)
}
