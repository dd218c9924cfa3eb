use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use bandchol::plan::validate_grid;
use bandchol::BackendKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Impl {
    Reference,
    BlockedSerial,
    BlockedParallel,
}

impl Impl {
    pub fn tag(self) -> &'static str {
        match self {
            Impl::Reference => "reference",
            Impl::BlockedSerial => "blocked-serial",
            Impl::BlockedParallel => "blocked-parallel",
        }
    }

    pub fn is_blocked(self) -> bool {
        self != Impl::Reference
    }
}

impl fmt::Display for Impl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Impl {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "reference" => Ok(Impl::Reference),
            "blocked-serial" => Ok(Impl::BlockedSerial),
            "blocked-parallel" => Ok(Impl::BlockedParallel),
            other => Err(format!(
                "unknown impl `{other}` (expected reference, blocked-serial or blocked-parallel)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("dimension must be positive")]
    EmptyDimension,
    #[error("no bandwidths given")]
    NoBandwidths,
    #[error("no implementations selected")]
    NoImpls,
    #[error("repetitions must be positive")]
    NoRepetitions,
    #[error("worker count must be positive")]
    NoWorkers,
    #[error("bandwidth {bandwidth} (after padding) must be below the dimension {dim}")]
    BandwidthTooLarge { dim: usize, bandwidth: usize },
    #[error("{0}")]
    Grid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub dim: usize,
    pub bandwidths: Vec<usize>,
    pub impls: Vec<Impl>,
    pub grid_dim: Option<usize>,
    pub workers: Option<usize>,
    pub repetitions: usize,
    pub seed: u64,
    pub check: bool,
    pub backend: BackendKind,
    pub out: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    /// Corrupt each factor before checking it; exercises the failure path.
    pub inject_fault: bool,
}

impl BenchConfig {
    pub fn new(dim: usize, bandwidths: Vec<usize>, impls: Vec<Impl>) -> Self {
        Self {
            dim,
            bandwidths,
            impls,
            grid_dim: None,
            workers: None,
            repetitions: 10,
            seed: 0,
            check: false,
            backend: BackendKind::Native,
            out: None,
            trace: None,
            inject_fault: false,
        }
    }

    /// Bandwidth actually benchmarked for a requested `k`: odd values are
    /// padded to `k + 1`, and the blocked drivers need at least 2.
    pub fn effective_bandwidth(&self, k: usize) -> usize {
        let k = k + k % 2;
        if k == 0 && self.impls.iter().any(|i| i.is_blocked()) {
            2
        } else {
            k
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.dim == 0 {
            return Err(ConfigError::EmptyDimension);
        }
        if self.bandwidths.is_empty() {
            return Err(ConfigError::NoBandwidths);
        }
        if self.impls.is_empty() {
            return Err(ConfigError::NoImpls);
        }
        if self.repetitions == 0 {
            return Err(ConfigError::NoRepetitions);
        }
        if self.workers == Some(0) {
            return Err(ConfigError::NoWorkers);
        }
        for &k in &self.bandwidths {
            let k = self.effective_bandwidth(k);
            if k >= self.dim {
                return Err(ConfigError::BandwidthTooLarge { dim: self.dim, bandwidth: k });
            }
            if let Some(n) = self.grid_dim.filter(|_| self.impls.iter().any(|i| i.is_blocked())) {
                validate_grid(k, n).map_err(|e| ConfigError::Grid(e.to_string()))?;
            }
        }
        Ok(())
    }
}
