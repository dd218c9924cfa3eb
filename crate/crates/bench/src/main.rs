use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use bandchol::BackendKind;
use bandchol_bench::{emit_csv, run_benchmark, write_csv, BenchConfig, Impl, RunError, RESIDUAL_TOLERANCE};
use clap::Parser;

/// Time banded Cholesky factorizations and report median GFLOP/s as CSV.
#[derive(Debug, Parser)]
#[command(name = "bandchol-bench", version)]
struct Cli {
    /// Matrix order N.
    #[arg(long)]
    dim: usize,
    /// Comma-separated bandwidths; odd values are padded to the next even one.
    #[arg(long, value_delimiter = ',', required = true)]
    bandwidths: Vec<usize>,
    /// Comma-separated drivers to run.
    #[arg(long, value_delimiter = ',', default_value = "reference,blocked-serial,blocked-parallel")]
    impls: Vec<Impl>,
    /// Grid dimension n for the blocked drivers; chosen per bandwidth if absent.
    #[arg(long)]
    grid_dim: Option<usize>,
    /// Worker threads for blocked-parallel [default: $BANDCHOL_WORKERS or all cores].
    #[arg(long)]
    workers: Option<usize>,
    /// Timed repetitions per configuration, after one discarded warmup.
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report residuals and fail if any exceeds 1e-10.
    #[arg(long)]
    check: bool,
    /// Kernel backend: native or gemm.
    #[arg(long, default_value = "native")]
    backend: BackendKind,
    /// CSV output path; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write one JSON line per executed block task to this path.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, hide = true)]
    inject_fault: bool,
}

impl From<Cli> for BenchConfig {
    fn from(cli: Cli) -> Self {
        BenchConfig {
            dim: cli.dim,
            bandwidths: cli.bandwidths,
            impls: cli.impls,
            grid_dim: cli.grid_dim,
            workers: cli.workers,
            repetitions: cli.reps,
            seed: cli.seed,
            check: cli.check,
            backend: cli.backend,
            out: cli.out,
            trace: cli.trace,
            inject_fault: cli.inject_fault,
        }
    }
}

const EXIT_VERIFY: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let config = BenchConfig::from(Cli::parse());

    let records = match run_benchmark(&config) {
        Ok(r) => r,
        Err(e @ RunError::Config(_)) => {
            log::error!("{e}");
            return ExitCode::from(EXIT_USAGE);
        }
        Err(e) => {
            log::error!("{e}");
            return ExitCode::from(EXIT_VERIFY);
        }
    };

    let written = match &config.out {
        Some(path) => emit_csv(&records, path),
        None => {
            let stdout = std::io::stdout().lock();
            write_csv(&records, stdout)
                .map_err(std::io::Error::other)
                .and_then(|_| std::io::stdout().flush())
        }
    };
    if let Err(e) = written {
        log::error!("writing results: {e}");
        return ExitCode::from(EXIT_USAGE);
    }

    let failed: Vec<_> = records.iter().filter(|r| !r.passed(RESIDUAL_TOLERANCE)).collect();
    for r in &failed {
        match (&r.error, r.residual) {
            (Some(e), _) => log::error!("{} k={}: {e}", r.implementation, r.bandwidth),
            (None, Some(res)) => log::error!(
                "{} k={}: residual {res:e} exceeds {RESIDUAL_TOLERANCE:e}",
                r.implementation,
                r.bandwidth
            ),
            (None, None) => {}
        }
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFY)
    }
}
