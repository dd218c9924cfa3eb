use std::collections::VecDeque;

use bandchol::graph::window_tasks;
use bandchol::{
    build_task_graph, factor_blocked_parallel_traced, factor_blocked_serial_traced, generate_spd,
    plan_windows, ExecPolicy, TaskGraph, TaskKind, WindowPlan, NATIVE,
};

const PLANS: [(usize, usize, usize); 6] = [(9, 2, 3), (40, 6, 3), (61, 12, 4), (64, 8, 5), (23, 12, 7), (30, 4, 5)];

/// Kahn's algorithm without using program order; returns the visit count.
fn kahn_visits(g: &TaskGraph) -> usize {
    let mut indeg: Vec<usize> = vec![0; g.len()];
    for succ in &g.successors {
        for &v in succ {
            indeg[v] += 1;
        }
    }
    let mut queue: VecDeque<usize> = (0..g.len()).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(u) = queue.pop_back() {
        seen += 1;
        for &v in &g.successors[u] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                queue.push_front(v);
            }
        }
    }
    seen
}

/// `reach[u][v]`: a directed path from `u` to `v` exists.
fn reachability(g: &TaskGraph) -> Vec<Vec<bool>> {
    let n = g.len();
    let mut reach = vec![vec![false; n]; n];
    for u in (0..n).rev() {
        for &v in &g.successors[u] {
            assert!(v > u);
            reach[u][v] = true;
            let (head, tail) = reach.split_at_mut(v);
            for (dst, &src) in head[u].iter_mut().zip(&tail[0]) {
                *dst |= src;
            }
        }
    }
    reach
}

#[derive(Clone, Copy, PartialEq)]
enum Res {
    /// Global element rectangle: rows `r0..r1`, columns `c0..c1`.
    Band(usize, usize, usize, usize),
    Work(usize),
}

fn overlaps(a: Res, b: Res) -> bool {
    match (a, b) {
        (Res::Band(r0, r1, c0, c1), Res::Band(s0, s1, d0, d1)) => r0 < s1 && s0 < r1 && c0 < d1 && d0 < c1,
        (Res::Work(x), Res::Work(y)) => x == y,
        _ => false,
    }
}

/// Storage each task touches, derived from cell extents alone rather than
/// from the dependency cells the graph was built from.
fn accesses(plan: &WindowPlan) -> Vec<(Vec<Res>, Vec<Res>)> {
    let last = plan.grid_dim - 1;
    let mut out = Vec::new();
    for t in 0..plan.window_count() {
        let rect = |i: usize, j: usize| {
            let c = plan.cell(t, i, j);
            Res::Band(c.row0, c.row0 + c.rows, c.col0, c.col0 + c.cols)
        };
        let operand = |i: usize, j: usize| if i == last && j == 0 { Res::Work(t) } else { rect(i, j) };
        for task in window_tasks(plan, t) {
            let (i, j) = (task.cell.row, task.cell.col);
            let reads: Vec<Res> = task.reads.iter().map(|c| operand(c.row, c.col)).collect();
            let (mut r, w) = match task.kind {
                TaskKind::CopyIn => (vec![rect(i, j)], vec![Res::Work(t)]),
                // Copy-back also retires the work array.
                TaskKind::CopyBack => (vec![Res::Work(t)], vec![rect(i, j), Res::Work(t)]),
                _ => (reads, vec![operand(i, j)]),
            };
            // Updates read their own target as well.
            r.extend(w.iter().copied());
            out.push((r, w));
        }
    }
    out
}

#[test]
fn graph_is_acyclic_and_forward() {
    for (n, k, g) in PLANS {
        let plan = plan_windows(n, k, g).unwrap();
        let graph = build_task_graph(&plan);
        assert_eq!(kahn_visits(&graph), graph.len());
        let edges: usize = graph.successors.iter().map(Vec::len).sum();
        assert_eq!(edges, graph.edge_count());
        for (v, preds) in graph.predecessors.iter().enumerate() {
            assert!(preds.iter().all(|&u| u < v));
        }
    }
}

#[test]
fn conflicting_accesses_are_ordered() {
    for (n, k, g) in PLANS {
        let plan = plan_windows(n, k, g).unwrap();
        let graph = build_task_graph(&plan);
        let acc = accesses(&plan);
        assert_eq!(acc.len(), graph.len());
        let reach = reachability(&graph);
        for v in 0..acc.len() {
            for u in 0..v {
                let conflict = acc[u].1.iter().any(|&w| acc[v].0.iter().chain(&acc[v].1).any(|&x| overlaps(w, x)))
                    || acc[v].1.iter().any(|&w| acc[u].0.iter().any(|&x| overlaps(w, x)));
                if conflict {
                    assert!(reach[u][v], "({n},{k},{g}): tasks {u} and {v} conflict but are unordered");
                }
            }
        }
    }
}

#[test]
fn factor_diag_tasks_form_a_chain() {
    for (n, k, g) in PLANS {
        let plan = plan_windows(n, k, g).unwrap();
        let graph = build_task_graph(&plan);
        let reach = reachability(&graph);
        let diags: Vec<usize> = (0..graph.len()).filter(|&v| graph.tasks[v].kind == TaskKind::FactorDiag).collect();
        assert_eq!(diags.len(), plan.window_count());
        for w in diags.windows(2) {
            assert!(reach[w[0]][w[1]]);
        }
        assert!(graph.critical_path_len() >= plan.window_count());
    }
}

#[test]
fn trace_respects_edges() {
    let a = generate_spd(300, 24, 5).unwrap();
    for workers in [1, 3] {
        let mut x = a.clone();
        let trace = factor_blocked_parallel_traced(&mut x, 4, &NATIVE, &ExecPolicy::new(workers).with_jitter(1)).unwrap();
        let graph = build_task_graph(&plan_windows(300, 24, 4).unwrap());
        assert_eq!(trace.len(), graph.len());
        let mut by_task = vec![None; graph.len()];
        for ev in &trace {
            assert!(ev.start_ns <= ev.end_ns);
            by_task[ev.task] = Some(ev);
        }
        for (u, succ) in graph.successors.iter().enumerate() {
            let eu = by_task[u].unwrap();
            for &v in succ {
                assert!(eu.end_ns <= by_task[v].unwrap().start_ns, "edge {u}->{v} overlapped");
            }
        }
    }
}

#[test]
fn every_band_element_is_finalized_once() {
    for (n, k, g) in PLANS {
        let plan = plan_windows(n, k, g).unwrap();
        let mut a = generate_spd(n, k, 0).unwrap();
        let trace = factor_blocked_serial_traced(&mut a, g, &NATIVE).unwrap();
        let mut hits = vec![0u32; n * n];
        for ev in &trace {
            let diag = ev.kind == TaskKind::FactorDiag;
            if !(diag || ev.kind == TaskKind::SolvePanel) {
                continue;
            }
            let c = plan.cell(ev.window, ev.row, ev.col);
            for p in 0..c.rows {
                for q in 0..c.cols {
                    let (i, j) = (c.row0 + p, c.col0 + q);
                    let stored = if diag { i >= j } else { i - j <= k };
                    if stored {
                        hits[i * n + j] += 1;
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let want = u32::from(j <= i && i - j <= k);
                assert_eq!(hits[i * n + j], want, "({n},{k},{g}) element ({i},{j})");
            }
        }
    }
}

#[test]
fn serial_program_order_is_a_topological_order() {
    let plan = plan_windows(40, 6, 3).unwrap();
    let graph = build_task_graph(&plan);
    let mut a = generate_spd(40, 6, 2).unwrap();
    let trace = factor_blocked_serial_traced(&mut a, 3, &NATIVE).unwrap();
    let order: Vec<usize> = trace.iter().map(|e| e.task).collect();
    assert_eq!(order, (0..graph.len()).collect::<Vec<_>>());
}
