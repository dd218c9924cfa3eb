//! Operation counts for banded Cholesky.
//!
//! The exact count replays the left-looking band recurrence statement by
//! statement: with `r = max(1, i - k)`, row `i` contributes one 2-flop
//! multiply-accumulate for every `r <= l <= j <= i` plus one 2-flop finalize
//! (subtract then divide, or subtract then square root) per `r <= j <= i`.
//! The accumulate bound `l <= j` is kept as written even though the
//! arithmetic only needs `l <= j - 1`, so throughput figures are normalized
//! by the conventional count.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FlopCount(pub u64);

impl FlopCount {
    pub fn value(self) -> u64 {
        self.0
    }

    /// Throughput in GFLOP/s for a run of `seconds`.
    pub fn gflops(self, seconds: f64) -> f64 {
        self.0 as f64 / seconds / 1e9
    }
}

fn check_shape(dim: usize, bandwidth: usize) -> Result<()> {
    if dim == 0 || bandwidth >= dim {
        return Err(Error::InvalidBandwidth { dim, bandwidth });
    }
    Ok(())
}

/// Exact count, evaluated in closed form per row.
///
/// A row with `m = i - r + 1` active columns costs
/// `sum_{c=1..m} (2c + 2) = m (m + 3)`. The first `k + 1` rows have
/// `m = i`, every later row has `m = k + 1`.
pub fn flops_exact(dim: usize, bandwidth: usize) -> Result<FlopCount> {
    check_shape(dim, bandwidth)?;
    let overflow = || Error::CountOverflow { dim, bandwidth };
    let n = dim as u128;
    let w = (bandwidth as u128 + 1).min(n);
    // sum_{m=1..w} m (m + 3) = w (w + 1) (2w + 1) / 6 + 3 w (w + 1) / 2
    let total = (|| {
        let w1 = w.checked_mul(w + 1)?;
        let ramp = w1.checked_mul(2 * w + 1)? / 6 + 3 * (w1 / 2);
        let steady = (n - w).checked_mul(w.checked_mul(w + 3)?)?;
        ramp.checked_add(steady)
    })()
    .ok_or_else(overflow)?;
    u64::try_from(total).map(FlopCount).map_err(|_| overflow())
}

/// Leading-order approximation `N k^2 + 2 N k`.
pub fn flops_approx(dim: usize, bandwidth: usize) -> Result<FlopCount> {
    check_shape(dim, bandwidth)?;
    let (n, k) = (dim as u64, bandwidth as u64);
    n.checked_mul(k)
        .and_then(|nk| nk.checked_mul(k + 2))
        .map(FlopCount)
        .ok_or(Error::CountOverflow { dim, bandwidth })
}
