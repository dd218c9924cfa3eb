use thiserror::Error;

/// Errors produced by band storage, the factorization routines and the
/// operation-count model.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("element ({i}, {j}) lies outside the stored lower band")]
    OutOfBand { i: usize, j: usize },

    #[error("invalid bandwidth {bandwidth} for a matrix of order {dim}")]
    InvalidBandwidth { dim: usize, bandwidth: usize },

    #[error("lead dimension {lead_dim} is smaller than bandwidth + 1 = {}", .bandwidth + 1)]
    InvalidLeadDim { lead_dim: usize, bandwidth: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("factor has a non-positive diagonal entry at index {index}")]
    SingularFactor { index: usize },

    #[error("matrix is not positive definite (pivot {column} is not positive)")]
    NotPositiveDefinite { column: usize },

    #[error(
        "bandwidth {bandwidth} cannot be split into {} block columns; pad the matrix to an even bandwidth with pad_bandwidth",
        .grid_dim.saturating_sub(1)
    )]
    BandwidthNotDivisible { bandwidth: usize, grid_dim: usize },

    #[error("grid dimension {0} is too small, at least 3 is required")]
    GridTooSmall(usize),

    #[error("operation count overflows a 64-bit counter for N = {dim}, k = {bandwidth}")]
    CountOverflow { dim: usize, bandwidth: usize },

    #[error("malformed matrix fixture: {0}")]
    Fixture(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
