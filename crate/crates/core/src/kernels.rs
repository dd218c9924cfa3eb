//! Dense block views and the four block kernels of the window algorithm.
//!
//! Blocks are column-major with unit row stride and an arbitrary column
//! stride, which covers both blocks living inside the packed band panel
//! (stride `lead_dim - 1`) and the contiguous work array.
//!
//! Kernels on diagonal blocks read and write only the lower triangle: in band
//! storage the "upper triangle" of a diagonal block aliases other in-band
//! elements and must never be touched.

use std::marker::PhantomData;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Read-only strided block.
#[derive(Clone, Copy)]
pub struct MatRef<'a> {
    ptr: *const f64,
    rows: usize,
    cols: usize,
    col_stride: usize,
    _marker: PhantomData<&'a [f64]>,
}

// A `MatRef` is a shared borrow of `f64`s.
unsafe impl Send for MatRef<'_> {}
unsafe impl Sync for MatRef<'_> {}

/// Mutable strided block.
pub struct MatMut<'a> {
    ptr: *mut f64,
    rows: usize,
    cols: usize,
    col_stride: usize,
    _marker: PhantomData<&'a mut [f64]>,
}

unsafe impl Send for MatMut<'_> {}

fn span(rows: usize, cols: usize, col_stride: usize) -> usize {
    if rows == 0 || cols == 0 {
        0
    } else {
        (cols - 1) * col_stride + rows
    }
}

impl<'a> MatRef<'a> {
    pub fn from_slice(data: &'a [f64], rows: usize, cols: usize, col_stride: usize) -> Self {
        assert!(span(rows, cols, col_stride) <= data.len(), "block exceeds slice");
        unsafe { Self::from_raw_parts(data.as_ptr(), rows, cols, col_stride) }
    }

    /// # Safety
    /// Every element `(p, q)` that a kernel reads must be valid for reads
    /// for `'a` and not written concurrently.
    pub unsafe fn from_raw_parts(ptr: *const f64, rows: usize, cols: usize, col_stride: usize) -> Self {
        Self {
            ptr,
            rows,
            cols,
            col_stride,
            _marker: PhantomData,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn col_stride(&self) -> usize {
        self.col_stride
    }

    #[inline]
    pub fn as_ptr(&self) -> *const f64 {
        self.ptr
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize) -> f64 {
        assert!(p < self.rows && q < self.cols);
        unsafe { *self.ptr.add(q * self.col_stride + p) }
    }

    /// Rows `start..` of column `q`.
    #[inline]
    pub fn col(&self, q: usize, start: usize) -> &'a [f64] {
        assert!(q < self.cols && start <= self.rows);
        unsafe { std::slice::from_raw_parts(self.ptr.add(q * self.col_stride + start), self.rows - start) }
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> MatRef<'a> {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols);
        unsafe { MatRef::from_raw_parts(self.ptr.add(c0 * self.col_stride + r0), rows, cols, self.col_stride) }
    }
}

impl<'a> MatMut<'a> {
    pub fn from_slice(data: &'a mut [f64], rows: usize, cols: usize, col_stride: usize) -> Self {
        assert!(span(rows, cols, col_stride) <= data.len(), "block exceeds slice");
        unsafe { Self::from_raw_parts(data.as_mut_ptr(), rows, cols, col_stride) }
    }

    /// # Safety
    /// Every element `(p, q)` that a kernel touches must be valid for reads
    /// and writes for `'a` and not accessed by anyone else meanwhile.
    pub unsafe fn from_raw_parts(ptr: *mut f64, rows: usize, cols: usize, col_stride: usize) -> Self {
        Self {
            ptr,
            rows,
            cols,
            col_stride,
            _marker: PhantomData,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn rb(&self) -> MatRef<'_> {
        unsafe { MatRef::from_raw_parts(self.ptr, self.rows, self.cols, self.col_stride) }
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.rb().get(p, q)
    }

    #[inline]
    pub fn set(&mut self, p: usize, q: usize, v: f64) {
        assert!(p < self.rows && q < self.cols);
        unsafe { *self.ptr.add(q * self.col_stride + p) = v }
    }

    #[inline]
    pub fn col_mut(&mut self, q: usize, start: usize) -> &mut [f64] {
        assert!(q < self.cols && start <= self.rows);
        unsafe { std::slice::from_raw_parts_mut(self.ptr.add(q * self.col_stride + start), self.rows - start) }
    }

    pub fn submatrix_mut(&mut self, r0: usize, c0: usize, rows: usize, cols: usize) -> MatMut<'_> {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols);
        unsafe { MatMut::from_raw_parts(self.ptr.add(c0 * self.col_stride + r0), rows, cols, self.col_stride) }
    }

    /// A mutable sub-block and a read-only sub-block of the same matrix.
    /// The two must not overlap.
    fn split(
        &mut self,
        (wr, wc, wrows, wcols): (usize, usize, usize, usize),
        (rr, rc, rrows, rcols): (usize, usize, usize, usize),
    ) -> (MatMut<'_>, MatRef<'_>) {
        assert!(wr + wrows <= self.rows && wc + wcols <= self.cols);
        assert!(rr + rrows <= self.rows && rc + rcols <= self.cols);
        // Column-disjoint or row-disjoint is enough for the callers here.
        assert!(rc + rcols <= wc || wc + wcols <= rc || rr + rrows <= wr || wr + wrows <= rr);
        let cs = self.col_stride;
        unsafe {
            (
                MatMut::from_raw_parts(self.ptr.add(wc * cs + wr), wrows, wcols, cs),
                MatRef::from_raw_parts(self.ptr.add(rc * cs + rr), rrows, rcols, cs),
            )
        }
    }
}

/// The block operations the window algorithm is built from.
///
/// Implementations must be deterministic: identical operands give
/// bit-identical results.
pub trait KernelBackend: Send + Sync {
    fn name(&self) -> &'static str;

    /// In-place lower Cholesky factor of a square block. On failure returns
    /// `NotPositiveDefinite` with the local pivot index.
    fn factor_diag(&self, a: MatMut<'_>) -> Result<()>;

    /// `panel <- panel * factor^{-T}` for a lower-triangular `factor`.
    fn solve_panel(&self, panel: MatMut<'_>, factor: MatRef<'_>) -> Result<()>;

    /// `target <- target - left * right^T`.
    fn update_general(&self, target: MatMut<'_>, left: MatRef<'_>, right: MatRef<'_>) -> Result<()>;

    /// `target <- target - panel * panel^T` on the lower triangle of a square
    /// block.
    fn update_symmetric(&self, target: MatMut<'_>, panel: MatRef<'_>) -> Result<()>;
}

fn shape(msg: String) -> Error {
    Error::ShapeMismatch(msg)
}

fn check_square(rows: usize, cols: usize, what: &str) -> Result<()> {
    if rows != cols {
        return Err(shape(format!("{what} must be square, got {rows}x{cols}")));
    }
    Ok(())
}

fn check_solve(panel: &MatMut<'_>, factor: &MatRef<'_>) -> Result<()> {
    check_square(factor.rows(), factor.cols(), "triangular factor")?;
    if panel.cols() != factor.rows() {
        return Err(shape(format!(
            "panel has {} columns but factor is {}x{}",
            panel.cols(),
            factor.rows(),
            factor.cols()
        )));
    }
    if let Some(index) = (0..factor.rows()).find(|&q| {
        let d = factor.get(q, q);
        d == 0.0 || !d.is_finite()
    }) {
        return Err(Error::SingularFactor { index });
    }
    Ok(())
}

fn check_general(target: &MatMut<'_>, left: &MatRef<'_>, right: &MatRef<'_>) -> Result<()> {
    if left.rows() != target.rows() || right.rows() != target.cols() || left.cols() != right.cols() {
        return Err(shape(format!(
            "{}x{} -= ({}x{}) * ({}x{})^T",
            target.rows(),
            target.cols(),
            left.rows(),
            left.cols(),
            right.rows(),
            right.cols()
        )));
    }
    Ok(())
}

fn check_symmetric(target: &MatMut<'_>, panel: &MatRef<'_>) -> Result<()> {
    check_square(target.rows(), target.cols(), "symmetric target")?;
    if panel.rows() != target.rows() {
        return Err(shape(format!(
            "panel has {} rows, target is {}x{}",
            panel.rows(),
            target.rows(),
            target.cols()
        )));
    }
    Ok(())
}

#[inline]
fn axpy_sub(y: &mut [f64], x: &[f64], s: f64) {
    for (y, x) in y.iter_mut().zip(x) {
        *y -= s * x;
    }
}

mod native {
    use super::*;

    pub fn potrf(mut a: MatMut<'_>) -> Result<()> {
        let n = a.rows();
        for j in 0..n {
            for m in 0..j {
                let s = a.get(j, m);
                let (mut dst, src) = a.split((j, j, n - j, 1), (j, m, n - j, 1));
                axpy_sub(dst.col_mut(0, 0), src.col(0, 0), s);
            }
            let d = a.get(j, j);
            if d.is_nan() || d <= 0.0 {
                return Err(Error::NotPositiveDefinite { column: j });
            }
            let l = d.sqrt();
            let col = a.col_mut(j, j);
            col[0] = l;
            for v in &mut col[1..] {
                *v /= l;
            }
        }
        Ok(())
    }

    pub fn trsm(mut b: MatMut<'_>, l: MatRef<'_>) {
        let c = l.rows();
        for q in 0..c {
            for m in 0..q {
                let s = l.get(q, m);
                let (mut dst, src) = b.split((0, q, b.rows(), 1), (0, m, b.rows(), 1));
                axpy_sub(dst.col_mut(0, 0), src.col(0, 0), s);
            }
            let d = l.get(q, q);
            for v in b.col_mut(q, 0) {
                *v /= d;
            }
        }
    }

    pub fn gemm(mut c: MatMut<'_>, left: MatRef<'_>, right: MatRef<'_>) {
        for q in 0..c.cols() {
            let dst = c.col_mut(q, 0);
            for m in 0..left.cols() {
                axpy_sub(dst, left.col(m, 0), right.get(q, m));
            }
        }
    }

    pub fn syrk(mut c: MatMut<'_>, panel: MatRef<'_>) {
        for q in 0..c.cols() {
            let dst = c.col_mut(q, q);
            for m in 0..panel.cols() {
                axpy_sub(dst, panel.col(m, q), panel.get(q, m));
            }
        }
    }
}

/// Plain loop kernels with no blocking. Column-oriented so the inner loop
/// is a contiguous axpy.
#[derive(Debug, Default, Clone, Copy)]
pub struct NativeKernels;

impl KernelBackend for NativeKernels {
    fn name(&self) -> &'static str {
        "native"
    }

    fn factor_diag(&self, a: MatMut<'_>) -> Result<()> {
        check_square(a.rows(), a.cols(), "diagonal block")?;
        native::potrf(a)
    }

    fn solve_panel(&self, panel: MatMut<'_>, factor: MatRef<'_>) -> Result<()> {
        check_solve(&panel, &factor)?;
        native::trsm(panel, factor);
        Ok(())
    }

    fn update_general(&self, target: MatMut<'_>, left: MatRef<'_>, right: MatRef<'_>) -> Result<()> {
        check_general(&target, &left, &right)?;
        native::gemm(target, left, right);
        Ok(())
    }

    fn update_symmetric(&self, target: MatMut<'_>, panel: MatRef<'_>) -> Result<()> {
        check_symmetric(&target, &panel)?;
        native::syrk(target, panel);
        Ok(())
    }
}

/// Kernels that route the bulk of the work through the packed, cache-blocked
/// `matrixmultiply::dgemm`. Triangular pieces along the diagonal use the
/// native loops.
#[derive(Debug, Default, Clone, Copy)]
pub struct GemmKernels;

const NB: usize = 64;

/// `c <- c - a * b^T`
fn dgemm_sub(c: &mut MatMut<'_>, a: MatRef<'_>, b: MatRef<'_>) {
    if c.rows() == 0 || c.cols() == 0 || a.cols() == 0 {
        return;
    }
    unsafe {
        matrixmultiply::dgemm(
            c.rows(),
            a.cols(),
            c.cols(),
            -1.0,
            a.as_ptr(),
            1,
            a.col_stride() as isize,
            b.as_ptr(),
            b.col_stride() as isize,
            1,
            1.0,
            c.ptr,
            1,
            c.col_stride as isize,
        );
    }
}

impl KernelBackend for GemmKernels {
    fn name(&self) -> &'static str {
        "matrixmultiply"
    }

    fn factor_diag(&self, mut a: MatMut<'_>) -> Result<()> {
        check_square(a.rows(), a.cols(), "diagonal block")?;
        let n = a.rows();
        for j0 in (0..n).step_by(NB) {
            let jb = NB.min(n - j0);
            let below = n - j0 - jb;
            if j0 > 0 {
                let (diag, left) = a.split((j0, j0, jb, jb), (j0, 0, jb, j0));
                native::syrk(diag, left);
                if below > 0 {
                    // Writes columns j0..j0 + jb, reads columns 0..j0.
                    let cs = a.col_stride;
                    unsafe {
                        let mut lower = MatMut::from_raw_parts(a.ptr.add(j0 * cs + j0 + jb), below, jb, cs);
                        let left_below = MatRef::from_raw_parts(a.ptr.add(j0 + jb), below, j0, cs);
                        let left_diag = MatRef::from_raw_parts(a.ptr.add(j0), jb, j0, cs);
                        dgemm_sub(&mut lower, left_below, left_diag);
                    }
                }
            }
            native::potrf(a.submatrix_mut(j0, j0, jb, jb))
                .map_err(|e| match e {
                    Error::NotPositiveDefinite { column } => Error::NotPositiveDefinite { column: column + j0 },
                    other => other,
                })?;
            if below > 0 {
                let (lower, diag) = a.split((j0 + jb, j0, below, jb), (j0, j0, jb, jb));
                native::trsm(lower, diag);
            }
        }
        Ok(())
    }

    fn solve_panel(&self, mut panel: MatMut<'_>, factor: MatRef<'_>) -> Result<()> {
        check_solve(&panel, &factor)?;
        let (m, c) = (panel.rows(), factor.rows());
        for q0 in (0..c).step_by(NB) {
            let qb = NB.min(c - q0);
            if q0 > 0 {
                let (mut dst, done) = panel.split((0, q0, m, qb), (0, 0, m, q0));
                dgemm_sub(&mut dst, done, factor.submatrix(q0, 0, qb, q0));
            }
            native::trsm(panel.submatrix_mut(0, q0, m, qb), factor.submatrix(q0, q0, qb, qb));
        }
        Ok(())
    }

    fn update_general(&self, mut target: MatMut<'_>, left: MatRef<'_>, right: MatRef<'_>) -> Result<()> {
        check_general(&target, &left, &right)?;
        dgemm_sub(&mut target, left, right);
        Ok(())
    }

    fn update_symmetric(&self, mut target: MatMut<'_>, panel: MatRef<'_>) -> Result<()> {
        check_symmetric(&target, &panel)?;
        let (n, inner) = (target.rows(), panel.cols());
        for j0 in (0..n).step_by(NB) {
            let jb = NB.min(n - j0);
            native::syrk(target.submatrix_mut(j0, j0, jb, jb), panel.submatrix(j0, 0, jb, inner));
            let below = n - j0 - jb;
            if below > 0 {
                dgemm_sub(
                    &mut target.submatrix_mut(j0 + jb, j0, below, jb),
                    panel.submatrix(j0 + jb, 0, below, inner),
                    panel.submatrix(j0, 0, jb, inner),
                );
            }
        }
        Ok(())
    }
}

pub static NATIVE: NativeKernels = NativeKernels;
pub static GEMM: GemmKernels = GemmKernels;

/// Selectable kernel backends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BackendKind {
    #[default]
    Native,
    Gemm,
}

impl BackendKind {
    pub fn kernels(self) -> &'static dyn KernelBackend {
        match self {
            BackendKind::Native => &NATIVE,
            BackendKind::Gemm => &GEMM,
        }
    }

    pub fn tag(self) -> &'static str {
        self.kernels().name()
    }
}

impl FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "native" => Ok(BackendKind::Native),
            "gemm" | "matrixmultiply" => Ok(BackendKind::Gemm),
            other => Err(format!("unknown backend `{other}` (expected native or gemm)")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const BACKENDS: [&dyn KernelBackend; 2] = [&NATIVE, &GEMM];

    fn random(rows: usize, cols: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    /// Column-major SPD matrix `M M^T + n I`.
    fn spd(n: usize, seed: u64) -> Vec<f64> {
        let m = random(n, n, seed);
        let mut a = vec![0.0; n * n];
        for p in 0..n {
            for q in 0..n {
                let s: f64 = (0..n).map(|r| m[p + r * n] * m[q + r * n]).sum();
                a[p + q * n] = s + if p == q { n as f64 } else { 0.0 };
            }
        }
        a
    }

    fn lower_cholesky_oracle(a: &[f64], n: usize) -> Vec<f64> {
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let d = a[j + j * n] - (0..j).map(|m| l[j + m * n] * l[j + m * n]).sum::<f64>();
            l[j + j * n] = d.sqrt();
            for i in j + 1..n {
                let s = a[i + j * n] - (0..j).map(|m| l[i + m * n] * l[j + m * n]).sum::<f64>();
                l[i + j * n] = s / l[j + j * n];
            }
        }
        l
    }

    #[test]
    fn factor_diag_small() {
        for be in BACKENDS {
            let mut one = [4.0];
            be.factor_diag(MatMut::from_slice(&mut one, 1, 1, 1)).unwrap();
            assert_eq!(one, [2.0]);
            // Upper slot holds a sentinel that must survive.
            let mut two = [4.0, 2.0, -7.0, 5.0];
            be.factor_diag(MatMut::from_slice(&mut two, 2, 2, 2)).unwrap();
            assert_eq!(two, [2.0, 1.0, -7.0, 2.0]);
        }
    }

    #[test]
    fn factor_diag_matches_oracle() {
        for be in BACKENDS {
            for n in [50, 150] {
                let a = spd(n, n as u64);
                let want = lower_cholesky_oracle(&a, n);
                let mut got = a.clone();
                for q in 0..n {
                    for p in 0..q {
                        got[p + q * n] = f64::NAN;
                    }
                }
                be.factor_diag(MatMut::from_slice(&mut got, n, n, n)).unwrap();
                for q in 0..n {
                    for p in 0..n {
                        if p >= q {
                            let (g, w) = (got[p + q * n], want[p + q * n]);
                            assert!((g - w).abs() <= 1e-13 * w.abs().max(1.0), "{} {g} {w}", be.name());
                        } else {
                            assert!(got[p + q * n].is_nan(), "upper triangle touched");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn factor_diag_reports_pivot() {
        for be in BACKENDS {
            let n = 100;
            let mut a = spd(n, 4);
            a[70 + 70 * n] = -1e6;
            let err = be.factor_diag(MatMut::from_slice(&mut a, n, n, n)).unwrap_err();
            assert_eq!(err, Error::NotPositiveDefinite { column: 70 });
        }
    }

    #[test]
    fn solve_identity_and_inverse_pair() {
        for be in BACKENDS {
            let b0 = random(5, 4, 1);
            let mut b = b0.clone();
            let mut eye = vec![0.0; 16];
            for q in 0..4 {
                eye[q + 4 * q] = 1.0;
            }
            be.solve_panel(MatMut::from_slice(&mut b, 5, 4, 5), MatRef::from_slice(&eye, 4, 4, 4))
                .unwrap();
            assert_eq!(b, b0);

            // B = L^T gives B L^{-T} = I.
            let n = 6;
            let l = lower_cholesky_oracle(&spd(n, 9), n);
            let mut lt = vec![0.0; n * n];
            for p in 0..n {
                for q in 0..n {
                    lt[p + q * n] = l[q + p * n];
                }
            }
            be.solve_panel(MatMut::from_slice(&mut lt, n, n, n), MatRef::from_slice(&l, n, n, n))
                .unwrap();
            for p in 0..n {
                for q in 0..n {
                    let want = if p == q { 1.0 } else { 0.0 };
                    assert!((lt[p + q * n] - want).abs() <= 1e-14);
                }
            }
        }
    }

    #[test]
    fn solve_multiplies_back() {
        for be in BACKENDS {
            for (m, c) in [(8, 8), (130, 100)] {
                let l = lower_cholesky_oracle(&spd(c, 3), c);
                let b0 = random(m, c, 5);
                let mut x = b0.clone();
                be.solve_panel(MatMut::from_slice(&mut x, m, c, m), MatRef::from_slice(&l, c, c, c))
                    .unwrap();
                for p in 0..m {
                    for q in 0..c {
                        let back: f64 = (0..=q).map(|r| x[p + r * m] * l[q + r * c]).sum();
                        assert!((back - b0[p + q * m]).abs() <= 1e-13 * b0[p + q * m].abs().max(1.0));
                    }
                }
            }
        }
    }

    #[test]
    fn solve_rejects_zero_diagonal() {
        let mut l = vec![1.0, 0.0, 0.0, 0.0];
        l[3] = 0.0;
        let mut b = vec![1.0; 4];
        let err = NATIVE
            .solve_panel(MatMut::from_slice(&mut b, 2, 2, 2), MatRef::from_slice(&l, 2, 2, 2))
            .unwrap_err();
        assert_eq!(err, Error::SingularFactor { index: 1 });
        assert_eq!(b, vec![1.0; 4]);
    }

    fn naive_gemm(c: &mut [f64], a: &[f64], b: &[f64], rows: usize, cols: usize, inner: usize) {
        for p in 0..rows {
            for q in 0..cols {
                let mut s = c[p + q * rows];
                for m in 0..inner {
                    s -= a[p + m * rows] * b[q + m * cols];
                }
                c[p + q * rows] = s;
            }
        }
    }

    #[test]
    fn general_update_cases() {
        for be in BACKENDS {
            let c0 = random(6, 6, 2);
            let zero = vec![0.0; 36];
            let right = random(6, 6, 3);
            let mut c = c0.clone();
            be.update_general(
                MatMut::from_slice(&mut c, 6, 6, 6),
                MatRef::from_slice(&zero, 6, 6, 6),
                MatRef::from_slice(&right, 6, 6, 6),
            )
            .unwrap();
            assert_eq!(c, c0);

            let mut eye = vec![0.0; 36];
            for q in 0..6 {
                eye[q * 7] = 1.0;
            }
            let mut c = c0.clone();
            be.update_general(
                MatMut::from_slice(&mut c, 6, 6, 6),
                MatRef::from_slice(&eye, 6, 6, 6),
                MatRef::from_slice(&eye, 6, 6, 6),
            )
            .unwrap();
            for p in 0..6 {
                for q in 0..6 {
                    let want = c0[p + 6 * q] - if p == q { 1.0 } else { 0.0 };
                    assert_eq!(c[p + 6 * q], want);
                }
            }
        }
    }

    #[test]
    fn general_update_matches_triple_loop() {
        for (rows, cols, inner) in [(6, 6, 6), (70, 90, 130)] {
            let a = random(rows, inner, 7);
            let b = random(cols, inner, 8);
            let mut want = random(rows, cols, 9);
            let mut native_out = want.clone();
            let mut gemm_out = want.clone();
            naive_gemm(&mut want, &a, &b, rows, cols, inner);
            NATIVE
                .update_general(
                    MatMut::from_slice(&mut native_out, rows, cols, rows),
                    MatRef::from_slice(&a, rows, inner, rows),
                    MatRef::from_slice(&b, cols, inner, cols),
                )
                .unwrap();
            GEMM.update_general(
                MatMut::from_slice(&mut gemm_out, rows, cols, rows),
                MatRef::from_slice(&a, rows, inner, rows),
                MatRef::from_slice(&b, cols, inner, cols),
            )
            .unwrap();
            assert_eq!(native_out, want);
            let tol = 1e-14 * inner as f64;
            for (g, w) in gemm_out.iter().zip(&want) {
                assert!((g - w).abs() <= tol);
            }
        }
    }

    #[test]
    fn symmetric_update_matches_general_lower() {
        for be in BACKENDS {
            for (n, inner) in [(6, 6), (150, 40)] {
                let panel = random(n, inner, 11);
                let c0 = random(n, n, 12);
                let mut gen = c0.clone();
                let mut sym = c0.clone();
                be.update_general(
                    MatMut::from_slice(&mut gen, n, n, n),
                    MatRef::from_slice(&panel, n, inner, n),
                    MatRef::from_slice(&panel, n, inner, n),
                )
                .unwrap();
                be.update_symmetric(MatMut::from_slice(&mut sym, n, n, n), MatRef::from_slice(&panel, n, inner, n))
                    .unwrap();
                for q in 0..n {
                    for p in 0..n {
                        if p >= q {
                            if be.name() == "native" {
                                assert_eq!(sym[p + q * n], gen[p + q * n]);
                            } else {
                                assert!((sym[p + q * n] - gen[p + q * n]).abs() <= 1e-13);
                            }
                        } else {
                            assert_eq!(sym[p + q * n], c0[p + q * n]);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn symmetric_update_trivial_panels() {
        for be in BACKENDS {
            let c0 = random(4, 4, 1);
            let mut c = c0.clone();
            be.update_symmetric(MatMut::from_slice(&mut c, 4, 4, 4), MatRef::from_slice(&[0.0; 16], 4, 4, 4))
                .unwrap();
            assert_eq!(c, c0);
            let mut eye = vec![0.0; 16];
            for q in 0..4 {
                eye[q * 5] = 1.0;
            }
            be.update_symmetric(MatMut::from_slice(&mut c, 4, 4, 4), MatRef::from_slice(&eye, 4, 4, 4))
                .unwrap();
            for q in 0..4 {
                for p in 0..4 {
                    let want = c0[p + 4 * q] - if p == q { 1.0 } else { 0.0 };
                    assert_eq!(c[p + 4 * q], want);
                }
            }
        }
    }

    #[test]
    fn shape_errors() {
        let mut c = vec![0.0; 6];
        let a = vec![0.0; 6];
        let err = NATIVE
            .update_general(
                MatMut::from_slice(&mut c, 2, 3, 2),
                MatRef::from_slice(&a, 3, 2, 3),
                MatRef::from_slice(&a, 3, 2, 3),
            )
            .unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch(_)));
        assert!(NATIVE.factor_diag(MatMut::from_slice(&mut c, 2, 3, 2)).is_err());
        assert!(GEMM
            .update_symmetric(MatMut::from_slice(&mut c, 2, 2, 2), MatRef::from_slice(&a, 3, 2, 3))
            .is_err());
    }

    #[test]
    fn backend_parsing() {
        assert_eq!("native".parse::<BackendKind>().unwrap(), BackendKind::Native);
        assert_eq!("gemm".parse::<BackendKind>().unwrap().tag(), "matrixmultiply");
        assert!("mkl".parse::<BackendKind>().is_err());
    }
}
