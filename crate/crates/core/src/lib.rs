//! Cholesky factorization of symmetric positive definite band matrices.
//!
//! Three drivers share one packed storage format: a row-oriented reference
//! loop, a window-blocked serial executor, and a task-graph parallel
//! executor that reproduces the serial result bit for bit.

pub mod band;
pub mod blocked;
pub mod error;
pub mod fixture;
pub mod flops;
pub mod graph;
pub mod kernels;
pub mod parallel;
pub mod plan;
pub mod reference;

pub use band::{
    generate_spd, index_map, pad_bandwidth, residual_norm, solve_with_factor, BandShape, BandedMatrix,
    BlockRegion, DenseBlockView,
};
pub use blocked::{factor_blocked_serial, factor_blocked_serial_traced, write_trace, TraceEvent, WorkArray};
pub use error::{Error, Result};
pub use flops::{flops_approx, flops_exact, FlopCount};
pub use graph::{build_task_graph, program_order, select_grid_dim, BlockTask, DepCell, TaskGraph, TaskKind};
pub use kernels::{BackendKind, GemmKernels, KernelBackend, NativeKernels, GEMM, NATIVE};
pub use parallel::{available_cores, factor_blocked_parallel, factor_blocked_parallel_traced, ExecPolicy};
pub use plan::{plan_windows, WindowPlan};
pub use reference::{count_flops_instrumented, factor_reference, factor_reference_in_place, FactorResult};
