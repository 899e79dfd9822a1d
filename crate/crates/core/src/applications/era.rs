//! System identification from compressed block-Hankel matrices.

use nalgebra::Complex;

use crate::decompositions::linalg::{pinv, svd_truncated};
use crate::decompositions::{hosvd, tucker_partial, Factor, ModeSpec, SharedSource};
use crate::error::{shape_err, Error, Result};
use crate::pattern::{blocks_to_tensor, sqrt_count, struct_assemble, BlockPattern, StructureClass};
use crate::random::{gaussian_matrix, rng};
use crate::tensor::{Matrix, Tensor};

/// Markov parameters `h_1, …, h_{2s−1}` (the feedthrough `h_0` is not used).
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovSequence {
    s: usize,
    h: Vec<Matrix>,
}

impl MarkovSequence {
    pub fn new(h: Vec<Matrix>) -> Result<Self> {
        if h.is_empty() {
            return Err(Error::InvalidArgument("empty Markov sequence".into()));
        }
        if h.len() % 2 == 0 {
            return Err(Error::InvalidArgument(format!(
                "{} Markov parameters; an s-block Hankel matrix needs 2s - 1",
                h.len()
            )));
        }
        let shape = h[0].shape();
        if h.iter().any(|b| b.shape() != shape) {
            return shape_err("Markov parameters have different extents");
        }
        Ok(Self { s: h.len().div_ceil(2), h })
    }

    pub fn s(&self) -> usize {
        self.s
    }

    /// `(outputs, inputs)`.
    pub fn dims(&self) -> (usize, usize) {
        self.h[0].shape()
    }

    pub fn params(&self) -> &[Matrix] {
        &self.h
    }
}

/// Discrete-time state-space triple `(A, B, C)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LtiSystem {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
}

impl LtiSystem {
    pub fn new(a: Matrix, b: Matrix, c: Matrix) -> Result<Self> {
        let d = a.nrows();
        if a.ncols() != d || b.nrows() != d || c.ncols() != d {
            return shape_err(format!(
                "inconsistent system: A {:?}, B {:?}, C {:?}",
                a.shape(),
                b.shape(),
                c.shape()
            ));
        }
        Ok(Self { a, b, c })
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    /// `h_k = C A^{k−1} B` for `k = 1..=2s−1`.
    pub fn markov(&self, s: usize) -> Result<MarkovSequence> {
        let mut h = Vec::with_capacity(2 * s - 1);
        let mut ab = self.b.clone();
        for _ in 0..2 * s - 1 {
            h.push(&self.c * &ab);
            ab = &self.a * ab;
        }
        MarkovSequence::new(h)
    }

    pub fn eigenvalues(&self) -> Vec<Complex<f64>> {
        self.a.complex_eigenvalues().iter().copied().collect()
    }
}

/// Random stable system: `2x2` rotation-scaling blocks with moduli in
/// `[0.5, 0.95]` (one real pole when `d` is odd) under a random orthogonal
/// similarity, Gaussian `B` and `C`.
pub fn random_stable_system(d: usize, outputs: usize, inputs: usize, seed: u64) -> LtiSystem {
    let mut g = rng(seed);
    let u = gaussian_matrix(d + 1, d, &mut g);
    let mut a = Matrix::zeros(d, d);
    let mut i = 0;
    while i < d {
        let rho = 0.5 + 0.45 * (0.5 + 0.5 * u[(0, i)].tanh());
        if i + 1 < d {
            let theta = std::f64::consts::PI * (0.1 + 0.8 * (0.5 + 0.5 * u[(1, i)].tanh()));
            a[(i, i)] = rho * theta.cos();
            a[(i, i + 1)] = -rho * theta.sin();
            a[(i + 1, i)] = rho * theta.sin();
            a[(i + 1, i + 1)] = rho * theta.cos();
            i += 2;
        } else {
            a[(i, i)] = rho;
            i += 1;
        }
    }
    let q = gaussian_matrix(d, d, &mut g).qr().q();
    let a = &q * a * q.transpose();
    let b = gaussian_matrix(d, inputs, &mut g);
    let c = gaussian_matrix(outputs, d, &mut g);
    LtiSystem { a, b, c }
}

/// Hankel pattern of `s x s` blocks and the Markov parameters as its classes.
pub fn hankel_pattern_from_markov(seq: &MarkovSequence) -> Result<(BlockPattern, Vec<Matrix>)> {
    let (m, n) = seq.dims();
    let p = BlockPattern::build(StructureClass::Hankel, seq.s(), seq.s(), m, n)?;
    Ok((p, seq.params().to_vec()))
}

/// How the Hankel tensor is formed and compressed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum HankelMode {
    /// Slices `√η_k h_k`, Tucker-compressed on all three modes.
    #[default]
    Weighted,
    /// Slices `h_k` without weights, only the outer modes compressed.
    Tangential,
}

/// `(I ⊗ U) Ĥ (I ⊗ Wᵀ)` with `Ĥ` an `s r₁ x s r₃` block-Hankel matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CompressedHankel {
    pub pattern: BlockPattern,
    pub u: Matrix,
    pub w: Matrix,
    /// Per-class blocks of `Ĥ` (as they appear at every class position).
    pub blocks: Vec<Matrix>,
}

impl CompressedHankel {
    /// Dense `Ĥ`.
    pub fn reduced(&self) -> Result<Matrix> {
        struct_assemble(&self.pattern, &self.blocks)?.to_dense()
    }

    /// Dense `(I ⊗ U) Ĥ (I ⊗ Wᵀ)`.
    pub fn lift(&self) -> Result<Matrix> {
        let lifted: Vec<Matrix> = self.blocks.iter().map(|b| &self.u * b * self.w.transpose()).collect();
        let (m, n) = (self.u.nrows(), self.w.nrows());
        struct_assemble(&self.pattern.with_block_dims(m, n)?, &lifted)?.to_dense()
    }
}

/// Tucker-compressed block-Hankel matrix with ranks `(r₁, r₂, r₃)`
/// (`r₂` is ignored in tangential mode).
pub fn compressed_hankel(seq: &MarkovSequence, ranks: [usize; 3], mode: HankelMode) -> Result<CompressedHankel> {
    let (pattern, blocks) = hankel_pattern_from_markov(seq)?;
    let tensor = match mode {
        HankelMode::Weighted => blocks_to_tensor(&pattern, &blocks)?,
        HankelMode::Tangential => Tensor::from_lateral_slices(&blocks, &[pattern.p()])?,
    };
    if tensor.frobenius_norm() == 0.0 {
        return Err(Error::Degenerate("all Markov parameters are zero".into()));
    }
    let rep = match mode {
        HankelMode::Weighted => hosvd(&tensor, &ranks)?,
        HankelMode::Tangential => tucker_partial(
            &tensor,
            &[ModeSpec::Rank(ranks[0]), ModeSpec::Identity, ModeSpec::Rank(ranks[2])],
            SharedSource::Designated,
        )?,
    };
    let lifted = match &rep.factors[1] {
        Factor::Identity(_) => rep.core.clone(),
        Factor::Dense(v) => rep.core.mode_multiply(1, v)?,
    };
    let reduced_blocks = (0..pattern.p())
        .map(|k| {
            let f = lifted.lateral_slice(k);
            match mode {
                HankelMode::Weighted => f / sqrt_count(pattern.eta(k) as u64),
                HankelMode::Tangential => f,
            }
        })
        .collect();
    let (r1, r3) = (rep.ranks()[0], rep.ranks()[2]);
    Ok(CompressedHankel {
        pattern: pattern.with_block_dims(r1, r3)?,
        u: rep.factors[0].to_matrix(),
        w: rep.factors[2].to_matrix(),
        blocks: reduced_blocks,
    })
}

/// Realization of order `r` from a compressed block-Hankel matrix.
///
/// The balanced factors `Θ = P Σ^{1/2}`, `Γ = Σ^{1/2} Qᵀ` of the rank-`r`
/// SVD of `Ĥ` are partitioned in the compressed coordinates (block height
/// `r₁`, block width `r₃`); `C` and `B` are lifted with `U` and `W` at the end.
pub fn era_identify_compressed(
    seq: &MarkovSequence,
    ranks: [usize; 3],
    r: usize,
    mode: HankelMode,
) -> Result<LtiSystem> {
    let ch = compressed_hankel(seq, ranks, mode)?;
    let h = ch.reduced()?;
    let r1 = ch.u.ncols();
    let r3 = ch.w.ncols();
    let s = seq.s();
    let max = h.nrows().min(h.ncols()).min((s.max(2) - 1) * r1);
    if r == 0 || r > max {
        return Err(Error::RankOutOfRange { rank: r, max });
    }
    let svd = svd_truncated(&h, r)?;
    if svd.singular_values[r - 1] <= 0.0 {
        return Err(Error::RankOutOfRange { rank: r, max: svd.singular_values.iter().filter(|&&v| v > 0.0).count() });
    }
    let half = Matrix::from_diagonal(&nalgebra::DVector::from_iterator(
        r,
        svd.singular_values.iter().map(|v| v.sqrt()),
    ));
    let theta = &svd.u * &half;
    let gamma = &half * svd.v.transpose();
    let rows = theta.nrows();
    let theta_f = theta.rows(0, rows - r1).into_owned();
    let theta_b = theta.rows(r1, rows - r1).into_owned();
    let a = pinv(&theta_f, 1e-12)? * theta_b;
    let c = &ch.u * theta.rows(0, r1);
    let b = gamma.columns(0, r3) * ch.w.transpose();
    LtiSystem::new(a, b, c)
}

/// Hausdorff distance between two finite sets of complex numbers.
pub fn hausdorff_eigs(a: &[Complex<f64>], b: &[Complex<f64>]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("Hausdorff distance of an empty set".into()));
    }
    let directed = |x: &[Complex<f64>], y: &[Complex<f64>]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    Ok(directed(a, b).max(directed(b, a)))
}
