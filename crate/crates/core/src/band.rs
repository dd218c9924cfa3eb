//! Packed lower-band storage for symmetric positive-definite matrices.
//!
//! Column `j` of the matrix occupies `lead_dim` consecutive slots of the
//! backing array. Its diagonal sits at the top of the panel and the
//! sub-diagonals follow, so element `(i, j)` with `j <= i <= j + k` is stored
//! at `j * lead_dim + (i - j)`. Slots past row `N - 1` at the end of the
//! matrix, and rows `k + 1..lead_dim` of every panel, are padding: they are
//! kept at zero and never read.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Storage offset of the lower-band element `(i, j)` in a panel of height
/// `lead_dim`.
///
/// Only the lower band is addressable: `j <= i < j + lead_dim`.
pub fn index_map(i: usize, j: usize, lead_dim: usize) -> Result<usize> {
    if i < j || i - j >= lead_dim {
        return Err(Error::OutOfBand { i, j });
    }
    Ok(j * lead_dim + (i - j))
}

/// Which part of a dense block a view is allowed to touch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockRegion {
    /// Every element of the block.
    Full,
    /// Diagonal and strictly lower part (diagonal blocks of the window).
    Lower,
    /// Diagonal and strictly upper part (the in-band half of the trapezoid).
    Upper,
}

/// Addressing of a dense sub-block inside the packed panel.
///
/// Rows of a block are contiguous in storage and moving one column to the
/// right advances `lead_dim - 1` slots, so every in-band block is an
/// ordinary column-major matrix with leading dimension `col_stride`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DenseBlockView {
    pub row0: usize,
    pub col0: usize,
    pub rows: usize,
    pub cols: usize,
    pub offset: usize,
    pub col_stride: usize,
    pub region: BlockRegion,
}

impl DenseBlockView {
    /// Storage offset of local element `(p, q)`.
    #[inline]
    pub fn offset_of(&self, p: usize, q: usize) -> usize {
        self.offset + q * self.col_stride + p
    }

    /// True when local `(p, q)` is inside the region this view may address.
    pub fn addresses(&self, p: usize, q: usize) -> bool {
        p < self.rows
            && q < self.cols
            && match self.region {
                BlockRegion::Full => true,
                BlockRegion::Lower => p >= q,
                BlockRegion::Upper => p <= q,
            }
    }
}

/// Order, bandwidth and panel height of a band matrix, detached from its
/// storage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BandShape {
    pub dim: usize,
    pub bandwidth: usize,
    pub lead_dim: usize,
}

impl BandShape {
    /// Addressing for the block with top-left corner `(row0, col0)`.
    ///
    /// Fails unless every element the region may touch is inside the band,
    /// so the bottom-left trapezoid of a window can only be viewed through
    /// [`BlockRegion::Upper`].
    pub fn block_view(
        &self,
        row0: usize,
        col0: usize,
        rows: usize,
        cols: usize,
        region: BlockRegion,
    ) -> Result<DenseBlockView> {
        let mismatch = || {
            Error::ShapeMismatch(format!(
                "{rows}x{cols} block at ({row0}, {col0}) with region {region:?} leaves the band"
            ))
        };
        if rows == 0 || cols == 0 || row0 + rows > self.dim || col0 + cols > self.dim {
            return Err(mismatch());
        }
        // Extremes of i - j over the addressed elements.
        let (lo, hi) = match region {
            BlockRegion::Full => (
                row0 as isize - (col0 + cols - 1) as isize,
                (row0 + rows - 1) as isize - col0 as isize,
            ),
            BlockRegion::Lower => (
                row0 as isize - col0 as isize,
                (row0 + rows - 1) as isize - col0 as isize,
            ),
            BlockRegion::Upper => (
                row0 as isize - (col0 + cols - 1) as isize,
                row0 as isize - col0 as isize,
            ),
        };
        if lo < 0 || hi > self.bandwidth as isize {
            return Err(mismatch());
        }
        Ok(DenseBlockView {
            row0,
            col0,
            rows,
            cols,
            offset: col0 * self.lead_dim + (row0 - col0),
            col_stride: self.lead_dim - 1,
            region,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    dim: usize,
    bandwidth: usize,
    lead_dim: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    /// Zero matrix of order `dim` with `bandwidth` sub-diagonals and the
    /// default lead dimension `bandwidth + 1`.
    pub fn zeros(dim: usize, bandwidth: usize) -> Result<Self> {
        Self::with_lead_dim(dim, bandwidth, bandwidth + 1)
    }

    pub fn with_lead_dim(dim: usize, bandwidth: usize, lead_dim: usize) -> Result<Self> {
        if dim == 0 || bandwidth >= dim {
            return Err(Error::InvalidBandwidth { dim, bandwidth });
        }
        if lead_dim < bandwidth + 1 {
            return Err(Error::InvalidLeadDim { lead_dim, bandwidth });
        }
        Ok(Self {
            dim,
            bandwidth,
            lead_dim,
            data: vec![0.0; lead_dim * dim],
        })
    }

    pub fn identity(dim: usize, bandwidth: usize) -> Result<Self> {
        let mut m = Self::zeros(dim, bandwidth)?;
        for j in 0..dim {
            m.data[j * m.lead_dim] = 1.0;
        }
        Ok(m)
    }

    /// Wraps an existing panel array. Padding slots are forced to zero.
    pub fn from_raw(dim: usize, bandwidth: usize, lead_dim: usize, data: Vec<f64>) -> Result<Self> {
        let mut m = Self::with_lead_dim(dim, bandwidth, lead_dim)?;
        if data.len() != lead_dim * dim {
            return Err(Error::ShapeMismatch(format!(
                "expected {} panel entries, got {}",
                lead_dim * dim,
                data.len()
            )));
        }
        m.data = data;
        m.clear_padding();
        Ok(m)
    }

    /// Packs the lower band of a dense row-major `dim x dim` matrix.
    /// Entries outside the band are ignored.
    pub fn from_dense(dense: &[f64], dim: usize, bandwidth: usize) -> Result<Self> {
        if dense.len() != dim * dim {
            return Err(Error::ShapeMismatch(format!(
                "dense input has {} entries, expected {}",
                dense.len(),
                dim * dim
            )));
        }
        let mut m = Self::zeros(dim, bandwidth)?;
        for j in 0..dim {
            for i in j..m.col_end(j) {
                m.data[j * m.lead_dim + (i - j)] = dense[i * dim + j];
            }
        }
        Ok(m)
    }

    /// Expands to a full symmetric row-major `dim x dim` matrix.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim;
        let mut dense = vec![0.0; n * n];
        for j in 0..n {
            for i in j..self.col_end(j) {
                let v = self.data[j * self.lead_dim + (i - j)];
                dense[i * n + j] = v;
                dense[j * n + i] = v;
            }
        }
        dense
    }

    /// Expands to a dense row-major matrix holding only the lower band
    /// (the layout of a Cholesky factor).
    pub fn to_dense_lower(&self) -> Vec<f64> {
        let n = self.dim;
        let mut dense = vec![0.0; n * n];
        for j in 0..n {
            for i in j..self.col_end(j) {
                dense[i * n + j] = self.data[j * self.lead_dim + (i - j)];
            }
        }
        dense
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    #[inline]
    pub fn lead_dim(&self) -> usize {
        self.lead_dim
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// One past the last stored row of column `j`.
    #[inline]
    pub fn col_end(&self, j: usize) -> usize {
        (j + self.bandwidth + 1).min(self.dim)
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        j <= i && i < self.dim && i - j <= self.bandwidth
    }

    /// Storage offset of `(i, j)`, checked against the order and bandwidth.
    pub fn offset(&self, i: usize, j: usize) -> Result<usize> {
        if !self.in_band(i, j) {
            return Err(Error::OutOfBand { i, j });
        }
        index_map(i, j, self.lead_dim)
    }

    pub fn get(&self, i: usize, j: usize) -> Result<f64> {
        Ok(self.data[self.offset(i, j)?])
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        let off = self.offset(i, j)?;
        self.data[off] = value;
        Ok(())
    }

    /// Symmetric read: `(i, j)` and `(j, i)` return the same value, and
    /// anything outside the band is zero.
    pub fn get_sym(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if self.in_band(i, j) {
            self.data[j * self.lead_dim + (i - j)]
        } else {
            0.0
        }
    }

    /// Unchecked lower-band read used by the hot loops.
    #[inline]
    pub(crate) fn at(&self, i: usize, j: usize) -> f64 {
        debug_assert!(self.in_band(i, j));
        self.data[j * self.lead_dim + (i - j)]
    }

    #[inline]
    pub(crate) fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        debug_assert!(self.in_band(i, j));
        &mut self.data[j * self.lead_dim + (i - j)]
    }

    pub fn shape(&self) -> BandShape {
        BandShape {
            dim: self.dim,
            bandwidth: self.bandwidth,
            lead_dim: self.lead_dim,
        }
    }

    /// See [`BandShape::block_view`].
    pub fn block_view(
        &self,
        row0: usize,
        col0: usize,
        rows: usize,
        cols: usize,
        region: BlockRegion,
    ) -> Result<DenseBlockView> {
        self.shape().block_view(row0, col0, rows, cols, region)
    }

    /// Zeroes every slot that does not hold an in-band element.
    pub fn clear_padding(&mut self) {
        for j in 0..self.dim {
            let used = self.col_end(j) - j;
            let panel = &mut self.data[j * self.lead_dim..(j + 1) * self.lead_dim];
            panel[used..].fill(0.0);
        }
    }

    /// Copy with `new_bandwidth` sub-diagonals; the added diagonals are zero.
    pub fn pad_bandwidth(&self, new_bandwidth: usize) -> Result<Self> {
        if new_bandwidth < self.bandwidth || new_bandwidth >= self.dim {
            return Err(Error::InvalidBandwidth {
                dim: self.dim,
                bandwidth: new_bandwidth,
            });
        }
        let mut out = Self::zeros(self.dim, new_bandwidth)?;
        for j in 0..self.dim {
            let used = self.col_end(j) - j;
            let src = &self.data[j * self.lead_dim..j * self.lead_dim + used];
            out.data[j * out.lead_dim..j * out.lead_dim + used].copy_from_slice(src);
        }
        Ok(out)
    }
}

/// Free-function form of [`BandedMatrix::pad_bandwidth`].
pub fn pad_bandwidth(a: &BandedMatrix, new_bandwidth: usize) -> Result<BandedMatrix> {
    a.pad_bandwidth(new_bandwidth)
}

/// Random strictly diagonally dominant SPD band matrix.
///
/// Off-diagonal band entries are uniform on `[-1, 1]`, drawn from ChaCha8
/// seeded with `seed` in column-major band order. Each diagonal entry is one
/// plus the absolute sum of the off-diagonal entries in its row, counting
/// both the stored lower part and the mirrored upper part.
pub fn generate_spd(dim: usize, bandwidth: usize, seed: u64) -> Result<BandedMatrix> {
    let mut a = BandedMatrix::zeros(dim, bandwidth)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut row_abs = vec![0.0f64; dim];
    for j in 0..dim {
        for i in j + 1..a.col_end(j) {
            let v: f64 = rng.random_range(-1.0..=1.0);
            *a.at_mut(i, j) = v;
            row_abs[i] += v.abs();
            row_abs[j] += v.abs();
        }
    }
    for (i, s) in row_abs.into_iter().enumerate() {
        *a.at_mut(i, i) = 1.0 + s;
    }
    Ok(a)
}

fn check_same_shape(a: &BandedMatrix, b: &BandedMatrix) -> Result<()> {
    if a.dim != b.dim || a.bandwidth != b.bandwidth {
        return Err(Error::ShapeMismatch(format!(
            "N={}, k={} vs N={}, k={}",
            a.dim, a.bandwidth, b.dim, b.bandwidth
        )));
    }
    Ok(())
}

/// Relative Frobenius residual `||A - L L^T||_F / ||A||_F`.
///
/// Only in-band entries are visited: the product of a band-`k` lower factor
/// with its transpose has bandwidth `k` as well. Off-diagonal entries count
/// twice, once for each triangle.
pub fn residual_norm(original: &BandedMatrix, factor: &BandedMatrix) -> Result<f64> {
    check_same_shape(original, factor)?;
    let k = original.bandwidth;
    let mut diff_sq = 0.0;
    let mut norm_sq = 0.0;
    for j in 0..original.dim {
        for i in j..original.col_end(j) {
            let lo = i.saturating_sub(k);
            let mut llt = 0.0;
            for m in lo..=j {
                llt += factor.at(i, m) * factor.at(j, m);
            }
            let a = original.at(i, j);
            let weight = if i == j { 1.0 } else { 2.0 };
            diff_sq += weight * (a - llt) * (a - llt);
            norm_sq += weight * a * a;
        }
    }
    if norm_sq == 0.0 {
        return Ok(diff_sq.sqrt());
    }
    Ok((diff_sq / norm_sq).sqrt())
}

/// Solves `L L^T x = b` by banded forward then backward substitution.
pub fn solve_with_factor(factor: &BandedMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = factor.dim;
    let k = factor.bandwidth;
    if rhs.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "right-hand side has length {}, expected {n}",
            rhs.len()
        )));
    }
    if let Some(index) = (0..n).find(|&i| factor.at(i, i).is_nan() || factor.at(i, i) <= 0.0) {
        return Err(Error::SingularFactor { index });
    }

    // L y = b
    let mut y = rhs.to_vec();
    for i in 0..n {
        let mut t = y[i];
        for m in i.saturating_sub(k)..i {
            t -= factor.at(i, m) * y[m];
        }
        y[i] = t / factor.at(i, i);
    }
    // L^T x = y
    for i in (0..n).rev() {
        let mut t = y[i];
        for m in i + 1..factor.col_end(i) {
            t -= factor.at(m, i) * y[m];
        }
        y[i] = t / factor.at(i, i);
    }
    Ok(y)
}

/// `y = A x` for the symmetric band matrix `a`.
pub fn sym_band_matvec(a: &BandedMatrix, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; a.dim];
    for j in 0..a.dim {
        y[j] += a.at(j, j) * x[j];
        for i in j + 1..a.col_end(j) {
            let v = a.at(i, j);
            y[i] += v * x[j];
            y[j] += v * x[i];
        }
    }
    y
}
