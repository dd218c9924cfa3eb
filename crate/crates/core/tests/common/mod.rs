#![allow(dead_code)]

use bandchol::BandedMatrix;

/// Plain dense Cholesky on a row-major `n x n` matrix, returning the lower
/// factor row-major. Panics on a non-positive pivot.
pub fn dense_cholesky(a: &[f64], n: usize) -> Vec<f64> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for m in 0..j {
            d -= l[j * n + m] * l[j * n + m];
        }
        assert!(d > 0.0, "pivot {j} not positive");
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for m in 0..j {
                s -= l[i * n + m] * l[j * n + m];
            }
            l[i * n + j] = s / d;
        }
    }
    l
}

/// Largest element-wise difference over the band, scaled by `max(1, |b|)`.
pub fn max_band_diff(a: &BandedMatrix, b: &BandedMatrix) -> f64 {
    assert_eq!((a.dim(), a.bandwidth()), (b.dim(), b.bandwidth()));
    let mut worst = 0.0f64;
    for j in 0..a.dim() {
        for i in j..a.col_end(j) {
            let x = a.get(i, j).unwrap();
            let y = b.get(i, j).unwrap();
            worst = worst.max((x - y).abs() / y.abs().max(1.0));
        }
    }
    worst
}

/// Same comparison restricted to the band of `narrow`, reading `wide` at
/// the same coordinates.
pub fn max_diff_on_band(wide: &BandedMatrix, narrow: &BandedMatrix) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..narrow.dim() {
        for i in j..narrow.col_end(j) {
            let x = wide.get(i, j).unwrap();
            let y = narrow.get(i, j).unwrap();
            worst = worst.max((x - y).abs() / y.abs().max(1.0));
        }
    }
    worst
}

/// The operation-count triple sum evaluated term by term, 1-based.
pub fn triple_sum_flops(n: u64, k: u64) -> u64 {
    let mut total = 0;
    for i in 1..=n {
        let r = if i > k { i - k } else { 1 };
        for j in r..=i {
            for _l in r..=j {
                total += 2;
            }
            total += 2;
        }
    }
    total
}
