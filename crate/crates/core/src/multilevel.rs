//! Multilevel block structure (block Toeplitz with Toeplitz blocks and the like).
//!
//! A matrix with `L` nested levels of block structure maps to a tensor of
//! order `L + 2` with extents `m x p₁ x … x p_L x n`. Level 1 is the
//! outermost level: the global block row of level indices `(r₁, …, r_L)` is
//! `(…(r₁ ℓ₂ + r₂) ℓ₃ + …) + r_L`. The slice at class indices
//! `(k₁, …, k_L)` holds `√(η_{k₁} ⋯ η_{k_L})` times the corresponding block.

use crate::decompositions::TuckerRep;
use crate::error::{shape_err, Error, Result};
use crate::pattern::{check_dense_guard, classify, sqrt_count, BlockMatrix, BlockPattern, StructureClass};
use crate::sparse::CooMatrix;
use crate::tensor::{Matrix, Tensor};

pub const MAX_LEVELS: usize = 3;

/// Per-level patterns (each over `1 x 1` blocks) plus the innermost block extents.
#[derive(Clone, Debug, PartialEq)]
pub struct MultilevelPattern {
    levels: Vec<BlockPattern>,
    m: usize,
    n: usize,
}

impl MultilevelPattern {
    pub fn new(levels: Vec<BlockPattern>, m: usize, n: usize) -> Result<Self> {
        if levels.is_empty() || levels.len() > MAX_LEVELS {
            return Err(Error::InvalidArgument(format!(
                "{} levels requested, supported range is 1..={MAX_LEVELS}",
                levels.len()
            )));
        }
        if m == 0 || n == 0 {
            return shape_err("block extents must be positive");
        }
        let levels = levels
            .into_iter()
            .map(|p| p.with_block_dims(1, 1))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { levels, m, n })
    }

    /// Canonical structure per level: `(class, ℓ_t, q_t)`.
    pub fn build(levels: &[(StructureClass, usize, usize)], m: usize, n: usize) -> Result<Self> {
        let pats = levels
            .iter()
            .map(|&(s, l, q)| BlockPattern::build(s, l, q, 1, 1))
            .collect::<Result<Vec<_>>>()?;
        Self::new(pats, m, n)
    }

    pub fn levels(&self) -> &[BlockPattern] {
        &self.levels
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub fn block_dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    /// Total number of block rows `Π ℓ_t`.
    pub fn grid_rows(&self) -> usize {
        self.levels.iter().map(BlockPattern::block_rows).product()
    }

    pub fn grid_cols(&self) -> usize {
        self.levels.iter().map(BlockPattern::block_cols).product()
    }

    pub fn rows(&self) -> usize {
        self.grid_rows() * self.m
    }

    pub fn cols(&self) -> usize {
        self.grid_cols() * self.n
    }

    /// `[m, p₁, …, p_L, n]`.
    pub fn tensor_dims(&self) -> Vec<usize> {
        let mut d = vec![self.m];
        d.extend(self.levels.iter().map(BlockPattern::p));
        d.push(self.n);
        d
    }

    /// Number of class combinations `Π p_t`.
    pub fn combo_count(&self) -> usize {
        self.levels.iter().map(BlockPattern::p).product()
    }

    /// Class indices of a linear combination index (level 1 fastest, matching
    /// the lateral-slice order of the tensor).
    pub fn combo(&self, mut lin: usize) -> Vec<usize> {
        self.levels
            .iter()
            .map(|p| {
                let k = lin % p.p();
                lin /= p.p();
                k
            })
            .collect()
    }

    fn combo_index(&self, ks: &[usize]) -> usize {
        let mut lin = 0;
        let mut stride = 1;
        for (p, &k) in self.levels.iter().zip(ks) {
            lin += k * stride;
            stride *= p.p();
        }
        lin
    }

    /// `Π η_{k_t}` for a class combination.
    pub fn eta_product(&self, ks: &[usize]) -> u64 {
        self.levels.iter().zip(ks).map(|(p, &k)| p.eta(k) as u64).product()
    }

    /// Per-level position of a global block row / column.
    fn split(&self, mut idx: usize, rows: bool) -> Vec<usize> {
        let mut out = vec![0; self.levels.len()];
        for t in (0..self.levels.len()).rev() {
            let ext = if rows { self.levels[t].block_rows() } else { self.levels[t].block_cols() };
            out[t] = idx % ext;
            idx /= ext;
        }
        out
    }

    fn join(&self, parts: &[usize], rows: bool) -> usize {
        let mut idx = 0;
        for (t, &v) in parts.iter().enumerate() {
            let ext = if rows { self.levels[t].block_rows() } else { self.levels[t].block_cols() };
            idx = idx * ext + v;
        }
        idx
    }

    /// Global block positions of a class combination.
    pub fn combo_positions(&self, ks: &[usize]) -> Vec<(usize, usize)> {
        let mut acc: Vec<(Vec<usize>, Vec<usize>)> = vec![(Vec::new(), Vec::new())];
        for (p, &k) in self.levels.iter().zip(ks) {
            let mut next = Vec::with_capacity(acc.len() * p.eta(k));
            for (r, c) in &acc {
                for &(i, j) in p.positions(k) {
                    let mut r2 = r.clone();
                    let mut c2 = c.clone();
                    r2.push(i);
                    c2.push(j);
                    next.push((r2, c2));
                }
            }
            acc = next;
        }
        acc.iter().map(|(r, c)| (self.join(r, true), self.join(c, false))).collect()
    }

    /// Class combination of a global block position, if it lies in the support.
    pub fn combo_at(&self, i: usize, j: usize) -> Option<Vec<usize>> {
        let r = self.split(i, true);
        let c = self.split(j, false);
        self.levels.iter().enumerate().map(|(t, p)| p.class_at(r[t], c[t])).collect()
    }
}

/// Order-`(L+2)` tensor of a matrix conforming to `p` within `tol`.
pub fn ml_mat_to_tensor(a: &BlockMatrix, p: &MultilevelPattern, tol: f64) -> Result<Tensor> {
    if a.block_dims() != p.block_dims() || a.block_rows() != p.grid_rows() || a.block_cols() != p.grid_cols() {
        return Err(Error::PatternMismatch(format!(
            "matrix is a {}x{} grid of {:?} blocks, pattern a {}x{} grid of {:?} blocks",
            a.block_rows(),
            a.block_cols(),
            a.block_dims(),
            p.grid_rows(),
            p.grid_cols(),
            p.block_dims()
        )));
    }
    let (m, n) = p.block_dims();
    let total = p.combo_count();
    let mut reps: Vec<Option<Matrix>> = vec![None; total];
    let mut seen = vec![0u64; total];
    for (&(i, j), b) in a.blocks() {
        let Some(ks) = p.combo_at(i, j) else {
            if b.iter().any(|v| v.abs() > tol) {
                return Err(Error::PatternMismatch(format!("nonzero block at ({i}, {j}) outside every class")));
            }
            continue;
        };
        let lin = p.combo_index(&ks);
        seen[lin] += 1;
        match &reps[lin] {
            None => reps[lin] = Some(b.clone()),
            Some(r) => {
                if r.iter().zip(b.iter()).any(|(x, y)| (x - y).abs() > tol) {
                    return Err(Error::PatternMismatch(format!(
                        "block ({i}, {j}) differs from its class representative"
                    )));
                }
            }
        }
    }
    let mut slices = Vec::with_capacity(total);
    for lin in 0..total {
        let ks = p.combo(lin);
        let eta = p.eta_product(&ks);
        let rep = reps[lin].take().unwrap_or_else(|| Matrix::zeros(m, n));
        // positions missing from the block map hold zero blocks
        if seen[lin] < eta && rep.iter().any(|v| v.abs() > tol) {
            return Err(Error::PatternMismatch(format!(
                "class combination {ks:?} mixes zero and nonzero blocks"
            )));
        }
        slices.push(rep * sqrt_count(eta));
    }
    let middle: Vec<usize> = p.levels().iter().map(BlockPattern::p).collect();
    Tensor::from_lateral_slices(&slices, &middle)
}

pub fn ml_mat_to_tensor_dense(a: &Matrix, p: &MultilevelPattern) -> Result<Tensor> {
    let (m, n) = p.block_dims();
    ml_mat_to_tensor(&BlockMatrix::from_dense(a, m, n)?, p, 0.0)
}

/// Places block `blocks[lin]` at every position of class combination `lin`.
fn ml_assemble(p: &MultilevelPattern, blocks: &[Matrix]) -> Result<BlockMatrix> {
    let (m, n) = p.block_dims();
    let mut out = BlockMatrix::new(p.grid_rows(), p.grid_cols(), m, n);
    for (lin, b) in blocks.iter().enumerate() {
        if b.iter().all(|&v| v == 0.0) {
            continue;
        }
        for (i, j) in p.combo_positions(&p.combo(lin)) {
            out.insert(i, j, b.clone())?;
        }
    }
    Ok(out)
}

fn check_tensor(t: &Tensor, p: &MultilevelPattern) -> Result<()> {
    if t.dims() != p.tensor_dims().as_slice() {
        return shape_err(format!(
            "tensor {:?} does not match pattern extents {:?}",
            t.dims(),
            p.tensor_dims()
        ));
    }
    Ok(())
}

/// Nested Kronecker sum `Σ E⁽¹⁾ ⊗ … ⊗ E⁽ᴸ⁾ ⊗ sq(slice)`.
pub fn ml_tensor_to_mat(t: &Tensor, p: &MultilevelPattern) -> Result<BlockMatrix> {
    check_tensor(t, p)?;
    let blocks: Vec<Matrix> = (0..p.combo_count())
        .map(|lin| t.lateral_slice(lin) / sqrt_count(p.eta_product(&p.combo(lin))))
        .collect();
    ml_assemble(p, &blocks)
}

pub fn ml_tensor_to_mat_dense(t: &Tensor, p: &MultilevelPattern) -> Result<Matrix> {
    check_dense_guard(p.rows(), p.cols())?;
    ml_tensor_to_mat(t, p)?.to_dense()
}

/// `⊗_t C⁽ᵗ⁾ ⊗ D` with `C⁽ᵗ⁾ = Σ_k coeffs[t][k] E_k⁽ᵗ⁾`.
#[derive(Clone, Debug, PartialEq)]
pub struct MlKronTerm {
    pub coeffs: Vec<Vec<f64>>,
    pub d: Matrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlKronSumRep {
    pub pattern: MultilevelPattern,
    pub terms: Vec<MlKronTerm>,
}

impl MlKronSumRep {
    /// Sparse level-`t` factor of term `j`.
    pub fn level_matrix(&self, j: usize, t: usize) -> CooMatrix {
        let p = &self.pattern.levels()[t];
        let mut c = CooMatrix::new(p.block_rows(), p.block_cols());
        for (k, &v) in self.terms[j].coeffs[t].iter().enumerate() {
            if v != 0.0 {
                let w = v / sqrt_count(p.eta(k) as u64);
                c.entries.extend(p.positions(k).iter().map(|&(r, s)| (r, s, w)));
            }
        }
        c
    }

    pub fn to_block_matrix(&self) -> Result<BlockMatrix> {
        let p = &self.pattern;
        let (m, n) = p.block_dims();
        let blocks: Vec<Matrix> = (0..p.combo_count())
            .map(|lin| {
                let ks = p.combo(lin);
                let mut b = Matrix::zeros(m, n);
                for term in &self.terms {
                    let w: f64 = term.coeffs.iter().zip(&ks).map(|(c, &k)| c[k]).product();
                    if w != 0.0 {
                        b += &term.d * w;
                    }
                }
                b / sqrt_count(p.eta_product(&ks))
            })
            .collect();
        ml_assemble(p, &blocks)
    }

    pub fn densify(&self) -> Result<Matrix> {
        check_dense_guard(self.pattern.rows(), self.pattern.cols())?;
        self.to_block_matrix()?.to_dense()
    }

    pub fn storage(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.coeffs.iter().map(Vec::len).sum::<usize>() + t.d.iter().filter(|&&v| v != 0.0).count())
            .sum()
    }
}

/// One term per core index `(j₁, …, j_L)`: level factors from the columns of
/// the middle-mode factors, `D = X sq(G_{:,j,:}) Zᵀ` (core scalars stay in `D`).
pub fn ml_kron_sum_from_tucker(t: &TuckerRep, p: &MultilevelPattern) -> Result<MlKronSumRep> {
    let dims = t.dims();
    if dims != p.tensor_dims() {
        return shape_err(format!(
            "Tucker extents {dims:?} do not match pattern extents {:?}",
            p.tensor_dims()
        ));
    }
    let levels = p.level_count();
    let ranks = t.ranks();
    let ys: Vec<Matrix> = (1..=levels).map(|k| t.factors[k].to_matrix()).collect();
    let mut count = 1;
    for r in &ranks[1..=levels] {
        count *= r;
    }
    let mut terms = Vec::with_capacity(count);
    for lin in 0..count {
        let mut rest = lin;
        let js: Vec<usize> = ranks[1..=levels]
            .iter()
            .map(|&r| {
                let j = rest % r;
                rest /= r;
                j
            })
            .collect();
        let g = t.core.lateral_slice(lin);
        let d = t.factors[levels + 1].apply(&t.factors[0].apply(&g).transpose()).transpose();
        let coeffs = ys.iter().zip(&js).map(|(y, &j)| y.column(j).iter().copied().collect()).collect();
        terms.push(MlKronTerm { coeffs, d });
    }
    Ok(MlKronSumRep { pattern: p.clone(), terms })
}

/// Largest PSF size for which [`psf_operator_dense`] builds the `K³ x K³` operator.
pub const MAX_DENSE_PSF: usize = 7;

fn check_psf(psf: &Tensor) -> Result<usize> {
    let d = psf.dims();
    if d.len() != 3 || d[0] != d[1] || d[1] != d[2] {
        return shape_err(format!("PSF must be a K x K x K cube, got {d:?}"));
    }
    let k = d[0];
    if k % 2 == 0 {
        return Err(Error::InvalidArgument(format!("PSF size {k} must be odd")));
    }
    Ok(k)
}

/// Per-level pattern of a size-`K` PSF: class `i` is the block diagonal
/// with offset `r − s = i − (K−1)/2`.
fn psf_level(k: usize) -> Result<BlockPattern> {
    let h = (k - 1) / 2;
    let classes: Vec<Vec<(usize, usize)>> = (0..k)
        .map(|i| {
            (0..k)
                .filter_map(|r| {
                    let s = r as isize - (i as isize - h as isize);
                    (s >= 0 && (s as usize) < k).then_some((r, s as usize))
                })
                .collect()
        })
        .collect();
    let structure = classify(k, k, &classes);
    BlockPattern::new(k, k, 1, 1, classes, structure)
}

/// Weighted `1 x K x K x K x 1` tensor of a 3D PSF and its three-level pattern.
///
/// Entry `(0, i₁, i₂, i₃, 0)` is `√(η_{i₁} η_{i₂} η_{i₃}) P[i₃, i₂, i₁]`: the
/// outermost level pairs with the last PSF index.
pub fn psf_weighted_tensor(psf: &Tensor) -> Result<(Tensor, MultilevelPattern)> {
    let k = check_psf(psf)?;
    let level = psf_level(k)?;
    let pattern = MultilevelPattern::new(vec![level.clone(), level.clone(), level], 1, 1)?;
    let t = Tensor::from_fn(&[1, k, k, k, 1], |ix| {
        let eta = pattern.eta_product(&[ix[1], ix[2], ix[3]]);
        sqrt_count(eta) * psf.get(&[ix[3], ix[2], ix[1]])
    });
    Ok((t, pattern))
}

/// Dense blurring operator `A[(r₁,r₂,r₃),(s₁,s₂,s₃)] = P[r₃−s₃+h, r₂−s₂+h, r₁−s₁+h]`
/// with zero boundary, global index `r₃ + K r₂ + K² r₁`, `h = (K−1)/2`.
pub fn psf_operator_dense(psf: &Tensor) -> Result<Matrix> {
    let k = check_psf(psf)?;
    if k > MAX_DENSE_PSF {
        return Err(Error::InvalidArgument(format!(
            "dense PSF operator limited to K <= {MAX_DENSE_PSF}, got {k}"
        )));
    }
    let h = (k - 1) as isize / 2;
    let size = k * k * k;
    let split = |g: usize| [g / (k * k), (g / k) % k, g % k];
    Ok(Matrix::from_fn(size, size, |row, col| {
        let r = split(row);
        let s = split(col);
        let off: Vec<isize> = (0..3).map(|t| r[t] as isize - s[t] as isize + h).collect();
        if off.iter().all(|&o| o >= 0 && o < k as isize) {
            psf.get(&[off[2] as usize, off[1] as usize, off[0] as usize])
        } else {
            0.0
        }
    }))
}
