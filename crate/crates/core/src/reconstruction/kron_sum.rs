//! Kronecker-sum representations `Â = Σ_j C_j ⊗ D_j`.

use nalgebra::DMatrixView;

use crate::decompositions::linalg::qr_thin;
use crate::decompositions::{KruskalRep, TuckerRep};
use crate::error::{shape_err, Error, Result};
use crate::pattern::{sqrt_count, BlockMatrix, BlockPattern};
use crate::sparse::CooMatrix;
use crate::tensor::Matrix;

/// One term `C_j ⊗ D_j` with `C_j = Σ_k coeffs[k] E_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct KronTerm {
    /// One coefficient per pattern class.
    pub coeffs: Vec<f64>,
    /// `m x n` block factor.
    pub d: Matrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KronSumRep {
    pub pattern: BlockPattern,
    pub terms: Vec<KronTerm>,
}

/// How the CP mode-2 factor `Y = F Gᵀ` is split between the two Kronecker factors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CpSplit {
    /// `F = Y`, `G = I`: `C_j` from column `j` of `Y`, `D_j = x_j z_jᵀ`.
    #[default]
    Identity,
    /// `F = Q`, `G = Rᵀ` from the thin QR of `Y`.
    Qr,
}

impl KronSumRep {
    pub fn new(pattern: BlockPattern, terms: Vec<KronTerm>) -> Result<Self> {
        let (m, n) = pattern.block_dims();
        for (j, t) in terms.iter().enumerate() {
            if t.coeffs.len() != pattern.p() {
                return shape_err(format!(
                    "term {j} has {} coefficients for p = {}",
                    t.coeffs.len(),
                    pattern.p()
                ));
            }
            if t.d.shape() != (m, n) {
                return shape_err(format!(
                    "term {j} block factor is {}x{}, expected {m}x{n}",
                    t.d.nrows(),
                    t.d.ncols()
                ));
            }
        }
        Ok(Self { pattern, terms })
    }

    pub fn rows(&self) -> usize {
        self.pattern.rows()
    }

    pub fn cols(&self) -> usize {
        self.pattern.cols()
    }

    /// Sparse `ℓ x q` factor `C_j`.
    pub fn c_matrix(&self, j: usize) -> CooMatrix {
        let p = &self.pattern;
        let mut c = CooMatrix::new(p.block_rows(), p.block_cols());
        for (k, &v) in self.terms[j].coeffs.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let w = v / sqrt_count(p.eta(k) as u64);
            for &(i, jj) in p.positions(k) {
                c.entries.push((i, jj, w));
            }
        }
        c
    }

    /// Per-class blocks `Σ_j coeffs_j[k] D_j / √η_k`.
    pub fn class_blocks(&self) -> Vec<Matrix> {
        let (m, n) = self.pattern.block_dims();
        (0..self.pattern.p())
            .map(|k| {
                let mut b = Matrix::zeros(m, n);
                for t in &self.terms {
                    if t.coeffs[k] != 0.0 {
                        b += &t.d * t.coeffs[k];
                    }
                }
                b / sqrt_count(self.pattern.eta(k) as u64)
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

    /// `‖A − Â‖_F / ‖A‖_F`, evaluated block by block.
    pub fn error_fro(&self, a: &BlockMatrix) -> Result<f64> {
        relative_error(a, &self.to_block_matrix()?)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.matvec_counted(x)?.0)
    }

    /// Matvec through `(C ⊗ D) vec(X) = vec(D X Cᵀ)` without forming any
    /// Kronecker product; also returns the multiply-add flop count.
    pub fn matvec_counted(&self, x: &[f64]) -> Result<(Vec<f64>, u64)> {
        let (m, n) = self.pattern.block_dims();
        let (l, q) = (self.pattern.block_rows(), self.pattern.block_cols());
        if x.len() != q * n {
            return shape_err(format!("vector of length {} for {} columns", x.len(), q * n));
        }
        let xm = DMatrixView::from_slice(x, n, q);
        let mut y = Matrix::zeros(m, l);
        let mut flops = 0u64;
        for (j, t) in self.terms.iter().enumerate() {
            let z = &t.d * xm;
            flops += 2 * (m * n * q) as u64;
            for &(r, c, v) in &self.c_matrix(j).entries {
                y.column_mut(r).axpy(v, &z.column(c), 1.0);
                flops += 2 * m as u64;
            }
        }
        Ok((y.as_slice().to_vec(), flops))
    }

    /// Stored values: one coefficient per class and the nonzeros of `D_j`, per term.
    pub fn storage(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.coeffs.len() + t.d.iter().filter(|&&v| v != 0.0).count())
            .sum()
    }
}

pub(crate) fn relative_error(a: &BlockMatrix, approx: &BlockMatrix) -> Result<f64> {
    let norm = a.frobenius_norm();
    let dist = a.distance(approx)?;
    Ok(if norm == 0.0 { dist } else { dist / norm })
}

fn check_pattern_extents(pattern: &BlockPattern, dims: [usize; 3]) -> Result<()> {
    let (m, n) = pattern.block_dims();
    if dims != [m, pattern.p(), n] {
        return shape_err(format!(
            "compressed tensor is {}x{}x{}, pattern needs {m}x{}x{n}",
            dims[0],
            dims[1],
            dims[2],
            pattern.p()
        ));
    }
    Ok(())
}

pub fn kron_sum_from_kruskal(k: &KruskalRep, pattern: &BlockPattern, split: CpSplit) -> Result<KronSumRep> {
    check_pattern_extents(pattern, k.dims())?;
    let r = k.rank();
    let (f, g) = match split {
        CpSplit::Identity => (k.y.clone(), Matrix::identity(r, r)),
        CpSplit::Qr => {
            if k.y.nrows() < r {
                return Err(Error::RankOutOfRange { rank: r, max: k.y.nrows() });
            }
            let (q, rr) = qr_thin(&k.y)?;
            (q, rr.transpose())
        }
    };
    let terms = (0..r)
        .map(|j| {
            let mut xs = k.x.clone();
            for c in 0..r {
                xs.column_mut(c).scale_mut(g[(c, j)]);
            }
            KronTerm { coeffs: f.column(j).iter().copied().collect(), d: xs * k.z.transpose() }
        })
        .collect();
    KronSumRep::new(pattern.clone(), terms)
}

pub fn kron_sum_from_tucker(t: &TuckerRep, pattern: &BlockPattern) -> Result<KronSumRep> {
    if t.core.order() != 3 {
        return shape_err(format!("order-{} Tucker representation, expected 3", t.core.order()));
    }
    let dims = t.dims();
    check_pattern_extents(pattern, [dims[0], dims[1], dims[2]])?;
    let r2 = t.ranks()[1];
    let v = t.factors[1].to_matrix();
    let terms = (0..r2)
        .map(|j| {
            let g = t.core.lateral_slice(j);
            let d = t.factors[2].apply(&t.factors[0].apply(&g).transpose()).transpose();
            KronTerm { coeffs: v.column(j).iter().copied().collect(), d }
        })
        .collect();
    KronSumRep::new(pattern.clone(), terms)
}
