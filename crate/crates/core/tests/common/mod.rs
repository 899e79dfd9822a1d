#![allow(dead_code)]

use kronblock::random::{gaussian_matrix, rng};
use kronblock::sparse::CooMatrix;
use kronblock::Matrix;

/// 9-point Laplacian on a `k x k` grid: `k` blocks of size `k`, tridiagonal
/// diagonal and off-diagonal blocks.
pub fn laplacian9(k: usize) -> CooMatrix {
    let mut a = CooMatrix::new(k * k, k * k);
    for bi in 0..k {
        for bj in bi.saturating_sub(1)..(bi + 2).min(k) {
            for i in 0..k {
                for j in i.saturating_sub(1)..(i + 2).min(k) {
                    let v = if bi == bj && i == j { 8.0 } else { -1.0 };
                    a.push(bi * k + i, bj * k + j, v).unwrap();
                }
            }
        }
    }
    a
}

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    gaussian_matrix(rows, cols, &mut rng(seed))
}

pub fn rel_vec_err(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let n: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    d / n
}

/// Value of a `key: value` line in command output.
pub fn field(out: &str, key: &str) -> Option<f64> {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .and_then(|v| v.trim().parse().ok())
}
