//! CP (Kruskal) decomposition of third-order tensors by alternating least squares.

use super::linalg::{left_singular_vectors, pinv};
use crate::error::{Error, Result};
use crate::random::{gaussian_matrix, rng};
use crate::tensor::{Matrix, Tensor};

/// `⟦X, Y, Z⟧ = Σ_c x_c ∘ y_c ∘ z_c` for an `m x p x n` tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct KruskalRep {
    pub x: Matrix,
    pub y: Matrix,
    pub z: Matrix,
}

impl KruskalRep {
    pub fn new(x: Matrix, y: Matrix, z: Matrix) -> Result<Self> {
        let r = x.ncols();
        if r == 0 || y.ncols() != r || z.ncols() != r {
            return Err(Error::ShapeMismatch(format!(
                "factor column counts {}, {}, {} must agree and be positive",
                x.ncols(),
                y.ncols(),
                z.ncols()
            )));
        }
        Ok(Self { x, y, z })
    }

    pub fn rank(&self) -> usize {
        self.x.ncols()
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.x.nrows(), self.y.nrows(), self.z.nrows()]
    }

    /// Lateral slice `k` as a matrix: `X diag(Y[k, :]) Zᵀ`.
    pub fn lateral_slice(&self, k: usize) -> Matrix {
        let mut xs = self.x.clone();
        for c in 0..self.rank() {
            xs.column_mut(c).scale_mut(self.y[(k, c)]);
        }
        xs * self.z.transpose()
    }

    pub fn expand(&self) -> Tensor {
        let [m, p, n] = self.dims();
        let slices: Vec<Matrix> = (0..p).map(|k| self.lateral_slice(k)).collect();
        Tensor::from_lateral_slices(&slices, &[p]).unwrap_or_else(|_| Tensor::zeros(&[m, p, n]))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CpOptions {
    pub max_iters: usize,
    /// Stop once the fit changes by less than this between sweeps.
    pub tol: f64,
    /// Seed for random initial columns when `r` exceeds a mode extent.
    pub seed: u64,
}

impl Default for CpOptions {
    fn default() -> Self {
        Self { max_iters: 500, tol: 1e-10, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct CpResult {
    pub kruskal: KruskalRep,
    /// `1 − ‖t − t̂‖_F / ‖t‖_F` of the returned factors.
    pub fit: f64,
    /// Fit after each sweep.
    pub fit_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Khatri–Rao rows matching the column order of `t.unfold(mode)`.
fn khatri_rao_for_mode(mode: usize, f: &[Matrix; 3]) -> Matrix {
    // columns of the mode-k unfolding run over the remaining two modes,
    // first of them fastest
    let (a, b) = match mode {
        0 => (&f[1], &f[2]),
        1 => (&f[0], &f[2]),
        _ => (&f[0], &f[1]),
    };
    let r = a.ncols();
    let mut kr = Matrix::zeros(a.nrows() * b.nrows(), r);
    for c in 0..r {
        for j in 0..b.nrows() {
            let bj = b[(j, c)];
            for i in 0..a.nrows() {
                kr[(i + a.nrows() * j, c)] = a[(i, c)] * bj;
            }
        }
    }
    kr
}

fn initial_factor(t: &Tensor, mode: usize, r: usize, seed: u64) -> Result<Matrix> {
    let unf = t.unfold(mode)?;
    let avail = unf.nrows().min(unf.ncols());
    let lead = r.min(avail);
    let (u, _) = left_singular_vectors(&unf, lead)?;
    if lead == r {
        return Ok(u);
    }
    let mut g = rng(seed.wrapping_add(mode as u64));
    let extra = gaussian_matrix(unf.nrows(), r - lead, &mut g);
    let mut f = Matrix::zeros(unf.nrows(), r);
    f.columns_mut(0, lead).copy_from(&u);
    f.columns_mut(lead, r - lead).copy_from(&extra);
    Ok(f)
}

fn model(f: &[Matrix; 3], lambda: &[f64]) -> KruskalRep {
    let mut x = f[0].clone();
    for (c, l) in lambda.iter().enumerate() {
        x.column_mut(c).scale_mut(*l);
    }
    KruskalRep { x, y: f[1].clone(), z: f[2].clone() }
}

/// Rank-`r` CP-ALS on an order-3 tensor.
///
/// Each factor update solves its least-squares problem through the
/// pseudoinverse of the Hadamard product of the other factors' Gram matrices,
/// so rank-deficient steps stay well defined. Columns are normalized after
/// every update; the weights end up absorbed into `X`.
pub fn cp_als(t: &Tensor, r: usize, opts: &CpOptions) -> Result<CpResult> {
    if t.order() != 3 {
        return Err(Error::InvalidArgument(format!(
            "CP-ALS needs an order-3 tensor, got order {}",
            t.order()
        )));
    }
    if r == 0 {
        return Err(Error::RankOutOfRange { rank: 0, max: usize::MAX });
    }
    let norm = t.frobenius_norm();
    if norm == 0.0 {
        return Err(Error::Degenerate("CP-ALS on the zero tensor".into()));
    }
    let mut f = [
        initial_factor(t, 0, r, opts.seed)?,
        initial_factor(t, 1, r, opts.seed)?,
        initial_factor(t, 2, r, opts.seed)?,
    ];
    let unfoldings = [t.unfold(0)?, t.unfold(1)?, t.unfold(2)?];
    let mut lambda = vec![1.0; r];
    let mut history = Vec::new();
    let mut prev = f64::NEG_INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iters {
        iterations += 1;
        for mode in 0..3 {
            let kr = khatri_rao_for_mode(mode, &f);
            let mttkrp = &unfoldings[mode] * &kr;
            let (o1, o2) = match mode {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let gram = (f[o1].tr_mul(&f[o1])).component_mul(&f[o2].tr_mul(&f[o2]));
            let mut upd = mttkrp * pinv(&gram, 1e-14)?;
            for c in 0..r {
                let nrm = upd.column(c).norm();
                if nrm > 0.0 {
                    upd.column_mut(c).scale_mut(1.0 / nrm);
                }
                lambda[c] = nrm;
            }
            f[mode] = upd;
        }
        let fit = 1.0 - model(&f, &lambda).expand().distance(t)? / norm;
        history.push(fit);
        if (fit - prev).abs() < opts.tol {
            converged = true;
            break;
        }
        prev = fit;
    }

    let kruskal = model(&f, &lambda);
    let fit = *history.last().expect("at least one sweep");
    Ok(CpResult { kruskal, fit, fit_history: history, iterations, converged })
}
