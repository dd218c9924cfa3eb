//! Benchmark harness: generate diagonally dominant band matrices, time the
//! factorizations over repetitions and report median throughput.

mod config;
mod record;
mod run;

pub use config::{BenchConfig, ConfigError, Impl};
pub use record::{emit_csv, parse_csv, write_csv, BenchRecord, CSV_HEADER};
pub use run::{median, run_benchmark, run_benchmark_with, Clock, RunError, WallClock};

/// Largest residual a checked run may report and still pass.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
