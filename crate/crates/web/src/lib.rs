//! WebAssembly bindings for the demo page in `www/`. Every export takes
//! plain numbers and returns a JSON string, or an error message.

use bandchol::{
    build_task_graph, factor_blocked_serial, factor_reference, flops_approx, flops_exact, generate_spd, plan_windows,
    residual_norm, select_grid_dim, TaskKind, NATIVE,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Windows drawn at most; later ones repeat the same shape.
const MAX_WINDOWS: usize = 12;

#[derive(Serialize)]
struct Cell {
    window: usize,
    row: usize,
    col: usize,
    row0: usize,
    rows: usize,
    col0: usize,
    cols: usize,
    trapezoid: bool,
}

#[derive(Serialize)]
struct PlanView {
    dim: usize,
    bandwidth: usize,
    grid_dim: usize,
    block_size: usize,
    window_count: usize,
    cells: Vec<Cell>,
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

/// Resolves a grid dimension of 0 to the heuristic choice.
fn grid_or_heuristic(bandwidth: usize, grid_dim: usize) -> Result<usize, String> {
    if grid_dim == 0 {
        select_grid_dim(bandwidth, 8).map_err(|e| e.to_string())
    } else {
        Ok(grid_dim)
    }
}

/// Cell extents of the first windows of the plan for `(dim, bandwidth)`.
/// `grid_dim = 0` picks the grid by heuristic.
#[wasm_bindgen]
pub fn plan_grid(dim: usize, bandwidth: usize, grid_dim: usize) -> Result<String, String> {
    let grid_dim = grid_or_heuristic(bandwidth, grid_dim)?;
    let plan = plan_windows(dim, bandwidth, grid_dim).map_err(|e| e.to_string())?;
    let mut cells = Vec::new();
    for w in plan.windows.iter().take(MAX_WINDOWS) {
        for i in 0..grid_dim {
            for j in 0..=i {
                if !w.has_cell(i, j) {
                    continue;
                }
                let c = w.cell(i, j, plan.block_size);
                cells.push(Cell {
                    window: w.index,
                    row: i,
                    col: j,
                    row0: c.row0,
                    rows: c.rows,
                    col0: c.col0,
                    cols: c.cols,
                    trapezoid: c.trapezoid,
                });
            }
        }
    }
    to_json(&PlanView {
        dim,
        bandwidth,
        grid_dim,
        block_size: plan.block_size,
        window_count: plan.window_count(),
        cells,
    })
}

#[derive(Serialize)]
struct FlopPoint {
    bandwidth: usize,
    exact: u64,
    approx: u64,
    relative_error: f64,
}

/// Exact and approximate operation counts for each bandwidth in `0..=max_bandwidth`
/// in `steps` even steps.
#[wasm_bindgen]
pub fn flop_curve(dim: usize, max_bandwidth: usize, steps: usize) -> Result<String, String> {
    if max_bandwidth >= dim {
        return Err(format!("bandwidth {max_bandwidth} must be below {dim}"));
    }
    let steps = steps.clamp(1, 200);
    let points = (0..=steps)
        .map(|s| s * max_bandwidth / steps)
        .map(|k| {
            let exact = flops_exact(dim, k).map_err(|e| e.to_string())?.value();
            let approx = flops_approx(dim, k).map_err(|e| e.to_string())?.value();
            Ok(FlopPoint {
                bandwidth: k,
                exact,
                approx,
                relative_error: (approx as f64 - exact as f64) / exact as f64,
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    to_json(&points)
}

#[derive(Serialize)]
struct FactorSummary {
    dim: usize,
    bandwidth: usize,
    grid_dim: usize,
    windows: usize,
    tasks: usize,
    edges: usize,
    critical_path: usize,
    /// Task count per kind, in kernel order.
    kinds: Vec<(String, usize)>,
    residual: f64,
    max_deviation_from_reference: f64,
}

/// Factors a generated matrix with the blocked algorithm and reports the
/// task graph shape and accuracy against the reference factorization.
#[wasm_bindgen]
pub fn factor_demo(dim: usize, bandwidth: usize, grid_dim: usize, seed: u32) -> Result<String, String> {
    let grid_dim = grid_or_heuristic(bandwidth, grid_dim)?;
    let plan = plan_windows(dim, bandwidth, grid_dim).map_err(|e| e.to_string())?;
    let graph = build_task_graph(&plan);
    let a = generate_spd(dim, bandwidth, u64::from(seed)).map_err(|e| e.to_string())?;
    let mut l = a.clone();
    factor_blocked_serial(&mut l, grid_dim, &NATIVE).map_err(|e| e.to_string())?;
    let reference = factor_reference(a.clone(), false).map_err(|e| e.to_string())?.factor;
    let deviation = l
        .data()
        .iter()
        .zip(reference.data())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let kinds = [
        TaskKind::FactorDiag,
        TaskKind::SolvePanel,
        TaskKind::UpdateGeneral,
        TaskKind::UpdateSymmetric,
        TaskKind::CopyIn,
        TaskKind::CopyBack,
    ]
    .iter()
    .map(|&k| (k.tag().to_string(), graph.tasks.iter().filter(|t| t.kind == k).count()))
    .collect();
    to_json(&FactorSummary {
        dim,
        bandwidth,
        grid_dim,
        windows: plan.window_count(),
        tasks: graph.len(),
        edges: graph.edge_count(),
        critical_path: graph.critical_path_len(),
        kinds,
        residual: residual_norm(&a, &l).map_err(|e| e.to_string())?,
        max_deviation_from_reference: deviation,
    })
}
