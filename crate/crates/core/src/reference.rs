//! Serial left-looking band Cholesky.
//!
//! Row-oriented and deliberately plain: this is the correctness oracle for
//! the blocked engines, not a fast path.

use crate::band::BandedMatrix;
use crate::error::{Error, Result};
use crate::flops::FlopCount;

#[derive(Debug, Clone, PartialEq)]
pub struct FactorResult {
    /// `L`, stored over the input's panel array.
    pub factor: BandedMatrix,
    /// Arithmetic operations executed, when instrumentation was requested.
    pub flop_count: Option<u64>,
}

/// Factors `a` in place. Returns the executed operation count when
/// `instrument` is set (each multiply, add, subtract, divide and square root
/// counts as one).
pub fn factor_reference_in_place(a: &mut BandedMatrix, instrument: bool) -> Result<Option<u64>> {
    let n = a.dim();
    let k = a.bandwidth();
    let mut flops = 0u64;
    for i in 0..n {
        let r = i.saturating_sub(k);
        for j in r..=i {
            // L(i, l) for l < j is final in this row; L(j, l) in earlier rows.
            let mut t = 0.0;
            for l in r..j {
                t += a.at(i, l) * a.at(j, l);
            }
            if instrument {
                flops += 2 * (j - r) as u64 + 2;
            }
            if i == j {
                let d = a.at(i, i) - t;
                if d.is_nan() || d <= 0.0 {
                    return Err(Error::NotPositiveDefinite { column: i });
                }
                *a.at_mut(i, i) = d.sqrt();
            } else {
                let v = (a.at(i, j) - t) / a.at(j, j);
                *a.at_mut(i, j) = v;
            }
        }
    }
    Ok(instrument.then_some(flops))
}

pub fn factor_reference(mut a: BandedMatrix, instrument: bool) -> Result<FactorResult> {
    let flop_count = factor_reference_in_place(&mut a, instrument)?;
    Ok(FactorResult { factor: a, flop_count })
}

/// Walks the left-looking loop nest without doing arithmetic and tallies the
/// conventional statement costs: 2 per multiply-accumulate with the
/// accumulate index running up to and including `j`, and 2 per finalize.
pub fn count_flops_instrumented(dim: usize, bandwidth: usize) -> FlopCount {
    let mut total = 0u64;
    for i in 0..dim {
        let r = i.saturating_sub(bandwidth);
        for j in r..=i {
            for _ in r..=j {
                total += 2;
            }
            total += 2;
        }
    }
    FlopCount(total)
}
