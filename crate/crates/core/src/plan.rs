//! Window planning for the blocked factorization.
//!
//! The band is swept by square windows of `n x n` blocks, each block
//! `b = k / (n - 1)` wide. Window `t` starts at global row and column
//! `t * b`, so consecutive windows overlap in `(n - 1) * b = k` rows and
//! columns: block `(i, j)` of window `t + 1` is block `(i + 1, j + 1)` of
//! window `t`. Blocks are clamped at the end of the matrix.

use serde::Serialize;

use crate::error::{Error, Result};

/// Global row and column ranges of one block of a window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CellExtent {
    pub row0: usize,
    pub rows: usize,
    pub col0: usize,
    pub cols: usize,
    /// Only the upper triangle of this block lies inside the band.
    pub trapezoid: bool,
}

impl CellExtent {
    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WindowDesc {
    pub index: usize,
    /// First global row/column of the window, `index * block_size`.
    pub start: usize,
    /// Row count of block row `m` (equal to the column count of block
    /// column `m`) after clamping to the matrix.
    pub extents: Vec<usize>,
}

impl WindowDesc {
    pub fn grid_dim(&self) -> usize {
        self.extents.len()
    }

    fn block_start(&self, m: usize, block_size: usize) -> usize {
        self.start + m * block_size
    }

    /// Extent of block `(i, j)`, `j <= i`. Empty blocks have zero rows.
    pub fn cell(&self, i: usize, j: usize, block_size: usize) -> CellExtent {
        assert!(j <= i && i < self.grid_dim(), "cell ({i}, {j}) outside the lower grid");
        CellExtent {
            row0: self.block_start(i, block_size),
            rows: self.extents[i],
            col0: self.block_start(j, block_size),
            cols: self.extents[j],
            trapezoid: i == self.grid_dim() - 1 && j == 0,
        }
    }

    pub fn has_cell(&self, i: usize, j: usize) -> bool {
        self.extents[i] > 0 && self.extents[j] > 0
    }

    /// The window reaches the full `n` blocks without clamping.
    pub fn is_full(&self, block_size: usize) -> bool {
        self.extents.iter().all(|&e| e == block_size)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WindowPlan {
    pub dim: usize,
    pub bandwidth: usize,
    pub grid_dim: usize,
    pub block_size: usize,
    pub windows: Vec<WindowDesc>,
}

impl WindowPlan {
    pub fn window_count(&self) -> usize {
        self.windows.len()
    }

    pub fn cell(&self, t: usize, i: usize, j: usize) -> CellExtent {
        self.windows[t].cell(i, j, self.block_size)
    }
}

/// Checks the grid/bandwidth pairing without building windows.
pub fn validate_grid(bandwidth: usize, grid_dim: usize) -> Result<usize> {
    if grid_dim < 3 {
        return Err(Error::GridTooSmall(grid_dim));
    }
    if bandwidth == 0 || !bandwidth.is_multiple_of(grid_dim - 1) {
        return Err(Error::BandwidthNotDivisible { bandwidth, grid_dim });
    }
    Ok(bandwidth / (grid_dim - 1))
}

pub fn plan_windows(dim: usize, bandwidth: usize, grid_dim: usize) -> Result<WindowPlan> {
    let block_size = validate_grid(bandwidth, grid_dim)?;
    if bandwidth >= dim {
        return Err(Error::InvalidBandwidth { dim, bandwidth });
    }
    let count = dim.div_ceil(block_size);
    let windows = (0..count)
        .map(|index| {
            let start = index * block_size;
            let extents = (0..grid_dim)
                .map(|m| {
                    let lo = start + m * block_size;
                    dim.saturating_sub(lo).min(block_size)
                })
                .collect();
            WindowDesc { index, start, extents }
        })
        .collect();
    Ok(WindowPlan {
        dim,
        bandwidth,
        grid_dim,
        block_size,
        windows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_blocks() {
        let plan = plan_windows(9, 2, 3).unwrap();
        assert_eq!(plan.block_size, 1);
        assert_eq!(plan.window_count(), 9);
        for (t, w) in plan.windows.iter().enumerate() {
            assert_eq!(w.start, t);
        }
        assert_eq!(plan.windows[7].extents, vec![1, 1, 0]);
        assert_eq!(plan.windows[8].extents, vec![1, 0, 0]);
        assert_eq!(plan_windows(100, 2, 3).unwrap().window_count(), 100);
    }

    #[test]
    fn rejects_bad_grids() {
        assert_eq!(
            plan_windows(10, 3, 3).unwrap_err(),
            Error::BandwidthNotDivisible { bandwidth: 3, grid_dim: 3 }
        );
        assert_eq!(plan_windows(10, 4, 2).unwrap_err(), Error::GridTooSmall(2));
        assert!(plan_windows(10, 0, 3).is_err());
        assert!(plan_windows(4, 4, 3).is_err());
    }

    #[test]
    fn clamped_tail() {
        // b = 3, 10 rows: windows start at 0, 3, 6, 9.
        let plan = plan_windows(10, 6, 3).unwrap();
        assert_eq!(plan.window_count(), 4);
        assert_eq!(plan.windows[0].extents, vec![3, 3, 3]);
        assert_eq!(plan.windows[1].extents, vec![3, 3, 1]);
        assert_eq!(plan.windows[2].extents, vec![3, 1, 0]);
        assert_eq!(plan.windows[3].extents, vec![1, 0, 0]);
        let c = plan.cell(1, 2, 0);
        assert_eq!((c.row0, c.rows, c.col0, c.cols, c.trapezoid), (9, 1, 3, 3, true));
        assert!(!plan.windows[2].has_cell(2, 1));
    }

    #[test]
    fn consecutive_windows_alias() {
        let plan = plan_windows(50, 8, 5).unwrap();
        for t in 0..plan.window_count() - 1 {
            for i in 1..5 {
                for j in 1..=i {
                    let a = plan.cell(t, i, j);
                    let b = plan.cell(t + 1, i - 1, j - 1);
                    assert_eq!((a.row0, a.col0, a.rows, a.cols), (b.row0, b.col0, b.rows, b.cols));
                }
            }
        }
    }

    #[test]
    fn diagonal_cells_cover_matrix() {
        for (n, k, g) in [(9, 2, 3), (10, 6, 3), (101, 12, 4), (64, 8, 5)] {
            let plan = plan_windows(n, k, g).unwrap();
            let mut next = 0;
            for w in &plan.windows {
                let c = w.cell(0, 0, plan.block_size);
                assert_eq!(c.row0, next);
                next += c.rows;
            }
            assert_eq!(next, n);
        }
    }
}
