//! Dense matrix factorizations: truncated SVD, thin QR, Cholesky and a
//! pseudoinverse, all with deterministic sign conventions.

use nalgebra::linalg::{QR, SVD};

use crate::error::{Error, Result};
use crate::tensor::Matrix;

const SVD_MAX_ITERS: usize = 10_000;

/// Truncated singular value decomposition `A ≈ U diag(s) Vᵀ`.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    pub v: Matrix,
}

/// Flips singular-vector pairs so the largest-magnitude entry of every left
/// singular vector is positive (ties go to the lowest row index).
fn canonical_signs(u: &mut Matrix, v: Option<&mut Matrix>) {
    let mut flips = Vec::with_capacity(u.ncols());
    for j in 0..u.ncols() {
        let col = u.column(j);
        let mut best = 0;
        for i in 1..col.len() {
            if col[i].abs() > col[best].abs() {
                best = i;
            }
        }
        flips.push(!col.is_empty() && col[best] < 0.0);
    }
    for (j, flip) in flips.iter().enumerate() {
        if *flip {
            u.column_mut(j).neg_mut();
        }
    }
    if let Some(v) = v {
        for (j, flip) in flips.iter().enumerate() {
            if *flip {
                v.column_mut(j).neg_mut();
            }
        }
    }
}

fn full_svd(a: &Matrix, want_v: bool) -> Result<(Matrix, Vec<f64>, Option<Matrix>)> {
    let svd = SVD::try_new(a.clone(), true, want_v, f64::EPSILON, SVD_MAX_ITERS)
        .ok_or(Error::NoConvergence("singular value decomposition"))?;
    let u = svd.u.expect("u requested");
    let s = svd.singular_values;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    let u = Matrix::from_fn(u.nrows(), order.len(), |i, j| u[(i, order[j])]);
    let sv: Vec<f64> = order.iter().map(|&i| s[i].max(0.0)).collect();
    let v = svd.v_t.map(|vt| Matrix::from_fn(vt.ncols(), order.len(), |i, j| vt[(order[j], i)]));
    Ok((u, sv, v))
}

/// Rank-`r` truncated SVD with the canonical sign convention.
pub fn svd_truncated(a: &Matrix, r: usize) -> Result<Svd> {
    let max = a.nrows().min(a.ncols());
    if r == 0 || r > max {
        return Err(Error::RankOutOfRange { rank: r, max });
    }
    let (u, s, v) = full_svd(a, true)?;
    let mut u = u.columns(0, r).into_owned();
    let mut v = v.expect("v requested").columns(0, r).into_owned();
    canonical_signs(&mut u, Some(&mut v));
    Ok(Svd {
        u,
        singular_values: s[..r].to_vec(),
        v,
    })
}

/// All `min(rows, cols)` singular values, nonincreasing.
pub fn singular_values(a: &Matrix) -> Result<Vec<f64>> {
    let svd = SVD::try_new(a.clone(), false, false, f64::EPSILON, SVD_MAX_ITERS)
        .ok_or(Error::NoConvergence("singular value decomposition"))?;
    let mut s: Vec<f64> = svd.singular_values.iter().map(|v| v.max(0.0)).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Leading `r` left singular vectors and all singular values of `a`.
///
/// Wide matrices are reduced first through a thin QR of `aᵀ`
/// (`a = Rᵀ Qᵀ`, so the left singular vectors of `a` are those of `Rᵀ`).
pub fn left_singular_vectors(a: &Matrix, r: usize) -> Result<(Matrix, Vec<f64>)> {
    let max = a.nrows().min(a.ncols());
    if r == 0 || r > max {
        return Err(Error::RankOutOfRange { rank: r, max });
    }
    let (u, s, _) = if a.ncols() > 2 * a.nrows() {
        let qr = QR::new(a.transpose());
        let rt = qr.r().transpose();
        full_svd(&rt, false)?
    } else {
        full_svd(a, false)?
    };
    let mut u = u.columns(0, r).into_owned();
    canonical_signs(&mut u, None);
    Ok((u, s))
}

/// Thin QR `A = QR` with `Q` of orthonormal columns and `R` upper triangular
/// with a nonnegative diagonal.
pub fn qr_thin(a: &Matrix) -> Result<(Matrix, Matrix)> {
    if a.nrows() < a.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "thin QR needs rows >= cols, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let qr = QR::new(a.clone());
    let mut q = qr.q();
    let mut r = qr.r();
    for i in 0..r.nrows() {
        if r[(i, i)] < 0.0 {
            r.row_mut(i).neg_mut();
            q.column_mut(i).neg_mut();
        }
    }
    Ok((q, r))
}

/// Lower-triangular Cholesky factor `L` with `LLᵀ = A`.
///
/// Only the lower triangle of `a` is read. Fails with
/// [`Error::NotPositiveDefinite`] as soon as a pivot is `<= 0` (or NaN).
pub fn cholesky(a: &Matrix) -> Result<Matrix> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::ShapeMismatch(format!(
            "Cholesky needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Moore–Penrose pseudoinverse; singular values below `rcond · σ_max` are dropped.
pub fn pinv(a: &Matrix, rcond: f64) -> Result<Matrix> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Matrix::zeros(a.ncols(), a.nrows()));
    }
    let (u, s, v) = full_svd(a, true)?;
    let v = v.expect("v requested");
    let cut = rcond * s.first().copied().unwrap_or(0.0);
    let mut out = Matrix::zeros(a.ncols(), a.nrows());
    for (k, sk) in s.iter().enumerate() {
        if *sk > cut && *sk > 0.0 {
            out += (v.column(k) / *sk) * u.column(k).transpose();
        }
    }
    Ok(out)
}

/// Solves `L X = B` for lower-triangular `L`.
pub fn solve_lower(l: &Matrix, b: &Matrix) -> Matrix {
    l.solve_lower_triangular(b)
        .expect("triangular factor with nonzero diagonal")
}

/// Largest asymmetry `max |a_ij - a_ji|`.
pub fn asymmetry(a: &Matrix) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..a.ncols() {
        for i in j + 1..a.nrows() {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

/// `‖FᵀF − I‖_F`.
pub fn orthonormality_defect(f: &Matrix) -> f64 {
    let g = f.transpose() * f;
    (g - Matrix::identity(f.ncols(), f.ncols())).norm()
}
