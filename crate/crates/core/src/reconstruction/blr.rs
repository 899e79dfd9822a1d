//! Block-low-rank representations `(I ⊗ U) [Σ_k E_k ⊗ F_k] (I ⊗ Wᵀ)`.

use nalgebra::DVectorView;

use super::kron_sum::relative_error;
use crate::decompositions::linalg::qr_thin;
use crate::decompositions::{Factor, KruskalRep, TuckerRep};
use crate::error::{shape_err, Error, Result};
use crate::pattern::{sqrt_count, BlockMatrix, BlockPattern};
use crate::tensor::Matrix;

/// Shared outer bases with one small middle block per pattern class.
///
/// The block at a class-`k` position is `U F_k Wᵀ / √η_k`, so the middle
/// blocks are lateral slices of a compressed tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockLowRankRep {
    pub pattern: BlockPattern,
    pub left: Factor,
    pub middle: Vec<Matrix>,
    pub right: Factor,
}

impl BlockLowRankRep {
    pub fn new(pattern: BlockPattern, left: Factor, middle: Vec<Matrix>, right: Factor) -> Result<Self> {
        let (m, n) = pattern.block_dims();
        if left.extent() != m || right.extent() != n {
            return shape_err(format!(
                "bases have {} and {} rows, blocks are {m}x{n}",
                left.extent(),
                right.extent()
            ));
        }
        if middle.len() != pattern.p() {
            return shape_err(format!("{} middle blocks for p = {}", middle.len(), pattern.p()));
        }
        let shape = (left.rank(), right.rank());
        if let Some(b) = middle.iter().find(|b| b.shape() != shape) {
            return shape_err(format!(
                "middle block is {}x{}, expected {}x{}",
                b.nrows(),
                b.ncols(),
                shape.0,
                shape.1
            ));
        }
        Ok(Self { pattern, left, middle, right })
    }

    pub fn rows(&self) -> usize {
        self.pattern.rows()
    }

    pub fn cols(&self) -> usize {
        self.pattern.cols()
    }

    /// `U F_k Wᵀ / √η_k` for every class.
    pub fn class_blocks(&self) -> Vec<Matrix> {
        self.middle
            .iter()
            .enumerate()
            .map(|(k, f)| {
                let uf = self.left.apply(f);
                self.right.apply(&uf.transpose()).transpose() / sqrt_count(self.pattern.eta(k) as u64)
            })
            .collect()
    }

    pub fn to_block_matrix(&self) -> Result<BlockMatrix> {
        crate::pattern::struct_assemble(&self.pattern, &self.class_blocks())
    }

    pub fn densify(&self) -> Result<Matrix> {
        crate::pattern::check_dense_guard(self.rows(), self.cols())?;
        self.to_block_matrix()?.to_dense()
    }

    pub fn error_fro(&self, a: &BlockMatrix) -> Result<f64> {
        relative_error(a, &self.to_block_matrix()?)
    }

    /// Projects each input block onto `W`, applies the weighted middle blocks
    /// in the reduced coordinates and lifts each output block with `U`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (m, n) = self.pattern.block_dims();
        let (l, q) = (self.pattern.block_rows(), self.pattern.block_cols());
        if x.len() != q * n {
            return shape_err(format!("vector of length {} for {} columns", x.len(), q * n));
        }
        let reduced: Vec<Matrix> = (0..q)
            .map(|j| {
                let xj = DVectorView::from_slice(&x[j * n..(j + 1) * n], n).into_owned();
                self.right.apply_transpose(&Matrix::from_column_slice(n, 1, xj.as_slice()))
            })
            .collect();
        let mut acc = vec![Matrix::zeros(self.left.rank(), 1); l];
        for k in 0..self.pattern.p() {
            let w = 1.0 / sqrt_count(self.pattern.eta(k) as u64);
            for &(i, j) in self.pattern.positions(k) {
                acc[i] += &self.middle[k] * &reduced[j] * w;
            }
        }
        let mut y = Vec::with_capacity(l * m);
        for a in &acc {
            y.extend_from_slice(self.left.apply(a).as_slice());
        }
        Ok(y)
    }

    /// Stored values: the middle blocks plus any non-identity basis.
    pub fn storage(&self) -> usize {
        let basis = |f: &Factor| if f.is_identity() { 0 } else { f.extent() * f.rank() };
        self.middle.len() * self.left.rank() * self.right.rank() + basis(&self.left) + basis(&self.right)
    }
}

/// `F_k = R_X diag(Y[k, :]) R_Zᵀ` between the thin-QR bases of `X` and `Z`.
pub fn blr_from_kruskal(k: &KruskalRep, pattern: &BlockPattern) -> Result<BlockLowRankRep> {
    let (m, n) = pattern.block_dims();
    if k.dims() != [m, pattern.p(), n] {
        return shape_err(format!(
            "Kruskal factors are {:?}, pattern needs [{m}, {}, {n}]",
            k.dims(),
            pattern.p()
        ));
    }
    let r = k.rank();
    if r > m.min(n) {
        return Err(Error::RankOutOfRange { rank: r, max: m.min(n) });
    }
    let (qx, rx) = qr_thin(&k.x)?;
    let (qz, rz) = qr_thin(&k.z)?;
    let middle = (0..pattern.p())
        .map(|kk| {
            let mut rxs = rx.clone();
            for c in 0..r {
                rxs.column_mut(c).scale_mut(k.y[(kk, c)]);
            }
            rxs * rz.transpose()
        })
        .collect();
    BlockLowRankRep::new(pattern.clone(), Factor::Dense(qx), middle, Factor::Dense(qz))
}

/// Middle blocks `Σ_j v_kj sq(G_{:,j,:})`, i.e. the lateral slices of `G ×₂ V`.
pub fn blr_from_tucker(t: &TuckerRep, pattern: &BlockPattern) -> Result<BlockLowRankRep> {
    if t.core.order() != 3 {
        return shape_err(format!("order-{} Tucker representation, expected 3", t.core.order()));
    }
    let dims = t.dims();
    let (m, n) = pattern.block_dims();
    if dims != [m, pattern.p(), n] {
        return shape_err(format!("Tucker extents {dims:?}, pattern needs [{m}, {}, {n}]", pattern.p()));
    }
    let lifted = match &t.factors[1] {
        Factor::Identity(_) => t.core.clone(),
        Factor::Dense(v) => t.core.mode_multiply(1, v)?,
    };
    let middle = (0..pattern.p()).map(|k| lifted.lateral_slice(k)).collect();
    BlockLowRankRep::new(pattern.clone(), t.factors[0].clone(), middle, t.factors[2].clone())
}
