//! Definiteness-preserving compression of symmetric block matrices.
//!
//! [`spsd_compress`] projects every block onto one shared basis, so the
//! result is `(I ⊗ P) A (I ⊗ P)` with `P = U Uᵀ` and inherits positive
//! semidefiniteness. [`spd_compress`] first splits off `I ⊗ T₀` (with `T₀`
//! the leading diagonal block), whitens the remainder with the Cholesky
//! factor of `T₀` and compresses that; the result stays positive definite
//! for every rank.

use crate::decompositions::linalg::{cholesky, left_singular_vectors, solve_lower};
use crate::decompositions::Factor;
use crate::error::{shape_err, Error, Result};
use crate::pattern::{
    blocks_to_tensor, check_dense_guard, classify, extract_blocks, sqrt_count, struct_assemble, BlockMatrix,
    BlockPattern,
};
use crate::reconstruction::BlockLowRankRep;
use crate::tensor::Matrix;

/// Relative asymmetry accepted as roundoff.
const SYMMETRY_TOL: f64 = 1e-12;

/// Shared-basis projection: class `k` holds `B_k = Uᵀ A_k U`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpsdRep {
    pub pattern: BlockPattern,
    pub basis: Matrix,
    pub blocks: Vec<Matrix>,
}

impl SpsdRep {
    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    /// Blocks `U B_k Uᵀ` of the approximation.
    pub fn class_blocks(&self) -> Vec<Matrix> {
        self.blocks.iter().map(|b| &self.basis * b * self.basis.transpose()).collect()
    }

    pub fn to_block_matrix(&self) -> Result<BlockMatrix> {
        struct_assemble(&self.pattern, &self.class_blocks())
    }

    pub fn densify(&self) -> Result<Matrix> {
        check_dense_guard(self.pattern.rows(), self.pattern.cols())?;
        self.to_block_matrix()?.to_dense()
    }

    /// Same approximation as a block-low-rank representation.
    pub fn to_blr(&self) -> Result<BlockLowRankRep> {
        let middle = self
            .blocks
            .iter()
            .enumerate()
            .map(|(k, b)| b * sqrt_count(self.pattern.eta(k) as u64))
            .collect();
        BlockLowRankRep::new(
            self.pattern.clone(),
            Factor::Dense(self.basis.clone()),
            middle,
            Factor::Dense(self.basis.clone()),
        )
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.to_blr()?.matvec(x)
    }

    /// Trace of the approximation from the small blocks alone.
    pub fn trace(&self) -> f64 {
        (0..self.pattern.p())
            .map(|k| {
                let diag = self.pattern.positions(k).iter().filter(|(i, j)| i == j).count();
                diag as f64 * self.blocks[k].trace()
            })
            .sum()
    }

    /// `p r² + n r`.
    pub fn storage(&self) -> usize {
        self.blocks.len() * self.rank() * self.rank() + self.basis.len()
    }

    /// The `ℓr x ℓr` matrix `M` with `Â = (I ⊗ U) M (I ⊗ Uᵀ)`.
    pub fn reduced(&self) -> Result<Matrix> {
        let r = self.rank();
        struct_assemble(&self.pattern.with_block_dims(r, r)?, &self.blocks)?.to_dense()
    }

    /// Cholesky factor of `M + δI`.
    ///
    /// `Â + δI` has the eigenvalues of `M + δI` plus `δ` on the complement of
    /// the range of `I ⊗ U`, so for `δ > 0` it is positive definite exactly
    /// when this factorization succeeds.
    pub fn shifted_cholesky(&self, delta: f64) -> Result<Matrix> {
        let mut m = self.reduced()?;
        for i in 0..m.nrows() {
            m[(i, i)] += delta;
        }
        cholesky(&m)
    }
}

/// `I ⊗ T₀` plus a whitened, projected remainder.
#[derive(Clone, Debug, PartialEq)]
pub struct SpdRep {
    /// Block extent and grid size of the represented matrix.
    pub block_rows: usize,
    /// Cholesky factor of the anchor block `T₀`.
    pub anchor: Matrix,
    /// Compressed `L⁻¹ (T − I ⊗ T₀) L⁻ᵀ`; `None` when the remainder is zero.
    pub remainder: Option<SpsdRep>,
}

impl SpdRep {
    pub fn n(&self) -> usize {
        self.anchor.nrows()
    }

    /// Block matrix of `(I ⊗ L)(I + M)(I ⊗ Lᵀ)`.
    pub fn to_block_matrix(&self) -> Result<BlockMatrix> {
        let n = self.n();
        let l = &self.anchor;
        let t0 = l * l.transpose();
        let mut out = BlockMatrix::new(self.block_rows, self.block_rows, n, n);
        for i in 0..self.block_rows {
            out.insert(i, i, t0.clone())?;
        }
        if let Some(rem) = &self.remainder {
            for (&(i, j), b) in rem.to_block_matrix()?.blocks() {
                let lifted = l * b * l.transpose();
                let cur = out.block(i, j).cloned().unwrap_or_else(|| Matrix::zeros(n, n));
                out.insert(i, j, cur + lifted)?;
            }
        }
        Ok(out)
    }

    pub fn densify(&self) -> Result<Matrix> {
        let size = self.block_rows * self.n();
        check_dense_guard(size, size)?;
        self.to_block_matrix()?.to_dense()
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        if x.len() != self.block_rows * n {
            return shape_err(format!("vector of length {} for {} columns", x.len(), self.block_rows * n));
        }
        let l = &self.anchor;
        let lt = l.transpose();
        let mut xs = Vec::with_capacity(x.len());
        for c in x.chunks(n) {
            xs.extend_from_slice((&lt * Matrix::from_column_slice(n, 1, c)).as_slice());
        }
        let mut inner = xs.clone();
        if let Some(rem) = &self.remainder {
            for (a, b) in inner.iter_mut().zip(rem.matvec(&xs)?) {
                *a += b;
            }
        }
        let mut y = Vec::with_capacity(x.len());
        for c in inner.chunks(n) {
            y.extend_from_slice((l * Matrix::from_column_slice(n, 1, c)).as_slice());
        }
        Ok(y)
    }

    pub fn storage(&self) -> usize {
        let n = self.n();
        n * (n + 1) / 2 + self.remainder.as_ref().map_or(0, SpsdRep::storage)
    }
}

/// Largest entrywise `|A(i,j) − A(j,i)|` relative to the largest entry.
fn relative_asymmetry(a: &BlockMatrix) -> f64 {
    let (m, n) = a.block_dims();
    let mut scale: f64 = 0.0;
    let mut worst: f64 = 0.0;
    let zero = Matrix::zeros(m, n);
    for (&(i, j), b) in a.blocks() {
        scale = scale.max(b.amax());
        let t = a.block(j, i).unwrap_or(&zero);
        worst = worst.max((b - t.transpose()).amax());
    }
    if scale == 0.0 {
        0.0
    } else {
        worst / scale
    }
}

fn check_square_symmetric(a: &BlockMatrix) -> Result<()> {
    let (m, n) = a.block_dims();
    if a.block_rows() != a.block_cols() || m != n {
        return shape_err(format!(
            "symmetric compression needs a square grid of square blocks, got {}x{} of {m}x{n}",
            a.block_rows(),
            a.block_cols()
        ));
    }
    let asym = relative_asymmetry(a);
    if asym > SYMMETRY_TOL {
        return Err(Error::Asymmetric(asym));
    }
    Ok(())
}

/// Every class with a non-symmetric support needs a class on the transposed support.
pub fn check_transpose_closure(pattern: &BlockPattern) -> Result<()> {
    for k in 0..pattern.p() {
        if pattern.transpose_class(k).is_none() {
            let (i, j) = pattern.positions(k)[0];
            return Err(Error::TransposeClosure(format!(
                "class {k} (first at block ({i}, {j})) has no transposed counterpart"
            )));
        }
    }
    Ok(())
}

/// Shared basis from the blocks directly (for inputs too large to assemble).
///
/// `blocks` must be symmetric-consistent with `pattern`; `spsd_compress`
/// checks this for assembled matrices.
pub fn spsd_compress_blocks(pattern: &BlockPattern, blocks: &[Matrix], r: usize) -> Result<SpsdRep> {
    let (m, n) = pattern.block_dims();
    if pattern.block_rows() != pattern.block_cols() || m != n {
        return shape_err("symmetric compression needs a square grid of square blocks");
    }
    check_transpose_closure(pattern)?;
    if r == 0 || r > n {
        return Err(Error::RankOutOfRange { rank: r, max: n });
    }
    let t = blocks_to_tensor(pattern, blocks)?;
    let unf = t.unfold(0)?;
    let avail = unf.nrows().min(unf.ncols());
    let basis = if r <= avail {
        left_singular_vectors(&unf, r)?.0
    } else {
        crate::decompositions::tucker::mode_basis(&t, 0, r)?
    };
    let projected = blocks.iter().map(|b| basis.transpose() * b * &basis).collect();
    Ok(SpsdRep { pattern: pattern.clone(), basis, blocks: projected })
}

pub fn spsd_compress(a: &BlockMatrix, pattern: &BlockPattern, r: usize) -> Result<SpsdRep> {
    check_square_symmetric(a)?;
    let blocks = extract_blocks(a, pattern, 0.0)?;
    spsd_compress_blocks(pattern, &blocks, r)
}

/// Splits `T − I ⊗ T₀` into classes: each class of `pattern` contributes its
/// off-diagonal positions with `A_k` and its diagonal positions with
/// `A_k − T₀`; all-zero parts are dropped.
fn remainder_classes(pattern: &BlockPattern, blocks: &[Matrix], t0: &Matrix) -> (Vec<Vec<(usize, usize)>>, Vec<Matrix>) {
    let mut classes = Vec::new();
    let mut rem = Vec::new();
    let l = pattern.block_rows();
    let mut diag_covered = vec![false; l];
    for k in 0..pattern.p() {
        let (diag, off): (Vec<_>, Vec<_>) = pattern.positions(k).iter().partition(|(i, j)| i == j);
        if !diag.is_empty() {
            for &(i, _) in &diag {
                diag_covered[i] = true;
            }
            let b = &blocks[k] - t0;
            if b.iter().any(|&v| v != 0.0) {
                classes.push(diag);
                rem.push(b);
            }
        }
        if !off.is_empty() && blocks[k].iter().any(|&v| v != 0.0) {
            classes.push(off);
            rem.push(blocks[k].clone());
        }
    }
    // diagonal positions outside the pattern hold zero blocks, so the remainder there is −T₀
    let missing: Vec<(usize, usize)> = (0..l).filter(|&i| !diag_covered[i]).map(|i| (i, i)).collect();
    if !missing.is_empty() && t0.iter().any(|&v| v != 0.0) {
        classes.push(missing);
        rem.push(-t0);
    }
    (classes, rem)
}

/// SPD-preserving compression from the class blocks of `pattern`.
pub fn spd_compress_blocks(pattern: &BlockPattern, blocks: &[Matrix], r: usize) -> Result<SpdRep> {
    let (m, n) = pattern.block_dims();
    if pattern.block_rows() != pattern.block_cols() || m != n {
        return shape_err("symmetric compression needs a square grid of square blocks");
    }
    if r == 0 || r > n {
        return Err(Error::RankOutOfRange { rank: r, max: n });
    }
    let zero = Matrix::zeros(n, n);
    let t0 = pattern.class_at(0, 0).map_or(&zero, |k| &blocks[k]).clone();
    let l = cholesky(&t0)?;
    let (classes, rem) = remainder_classes(pattern, blocks, &t0);
    let remainder = if classes.is_empty() {
        None
    } else {
        let structure = classify(pattern.block_rows(), pattern.block_cols(), &classes);
        let rp = BlockPattern::new(pattern.block_rows(), pattern.block_cols(), n, n, classes, structure)?;
        // whiten each class once and reuse transposes, so the remainder is
        // exactly symmetric
        let mut scaled: Vec<Matrix> = Vec::with_capacity(rem.len());
        for (k, b) in rem.iter().enumerate() {
            let w = match rp.transpose_class(k) {
                Some(t) if t < k => scaled[t].transpose(),
                tc => {
                    let x = solve_lower(&l, b);
                    let w = solve_lower(&l, &x.transpose()).transpose();
                    if tc == Some(k) {
                        (&w + w.transpose()) * 0.5
                    } else {
                        w
                    }
                }
            };
            scaled.push(w);
        }
        Some(spsd_compress_blocks(&rp, &scaled, r)?)
    };
    Ok(SpdRep { block_rows: pattern.block_rows(), anchor: l, remainder })
}

pub fn spd_compress(t: &BlockMatrix, pattern: &BlockPattern, r: usize) -> Result<SpdRep> {
    check_square_symmetric(t)?;
    let blocks = extract_blocks(t, pattern, 0.0)?;
    spd_compress_blocks(pattern, &blocks, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompositions::linalg::asymmetry;
    use crate::pattern::{mat_to_tensor_dense, struct_assemble_dense, StructureClass};
    use crate::testutil::random_matrix;

    fn sym_toeplitz(l: usize, n: usize) -> BlockPattern {
        BlockPattern::build(StructureClass::Toeplitz { symmetric: true }, l, l, n, n).unwrap()
    }

    /// Random SPD block-Toeplitz matrix (as a dense matrix) with symmetric blocks.
    fn random_spd_toeplitz(l: usize, n: usize, seed: u64) -> (BlockPattern, Matrix) {
        let p = sym_toeplitz(l, n);
        let mut blocks: Vec<Matrix> = (0..l)
            .map(|k| {
                let g = random_matrix(n, n, seed * 97 + k as u64);
                (&g + g.transpose()) * (0.5 / (1.0 + k as f64))
            })
            .collect();
        let a = struct_assemble_dense(&p, &blocks).unwrap();
        // shift the diagonal class to make the whole matrix diagonally dominant
        let eig_min = a.clone().symmetric_eigenvalues().min();
        blocks[0] += Matrix::identity(n, n) * (1.0 - eig_min);
        (p.clone(), struct_assemble_dense(&p, &blocks).unwrap())
    }

    fn random_spsd_toeplitz(l: usize, n: usize, seed: u64) -> (BlockPattern, Matrix) {
        let (p, a) = random_spd_toeplitz(l, n, seed);
        // move the lowest eigenvalue to zero
        let eig_min = a.clone().symmetric_eigenvalues().min();
        let mut b = extract_blocks(&BlockMatrix::from_dense(&a, n, n).unwrap(), &p, 0.0).unwrap();
        b[0] -= Matrix::identity(n, n) * eig_min;
        let a = struct_assemble_dense(&p, &b).unwrap();
        (p, a)
    }

    #[test]
    fn shifted_cholesky_matches_full_matrix() {
        let (p, a) = random_spsd_toeplitz(4, 6, 11);
        let bm = BlockMatrix::from_dense(&a, 6, 6).unwrap();
        for r in [1, 3, 6] {
            let rep = spsd_compress(&bm, &p, r).unwrap();
            let full = rep.densify().unwrap();
            let m = rep.reduced().unwrap();
            let mut lift = Matrix::zeros(24, 4 * r);
            for i in 0..4 {
                lift.view_mut((6 * i, r * i), (6, r)).copy_from(&rep.basis);
            }
            assert!((&lift * &m * lift.transpose() - &full).norm() <= 1e-12 * full.norm());
            let delta = 1e-8;
            let full_ok = cholesky(&(&full + Matrix::identity(24, 24) * delta)).is_ok();
            assert_eq!(rep.shifted_cholesky(delta).is_ok(), full_ok);
            assert!(full_ok);
        }
        // an indefinite matrix fails on both sides
        let mut b = extract_blocks(&bm, &p, 0.0).unwrap();
        b[0] -= Matrix::identity(6, 6);
        let ind = struct_assemble(&p, &b).unwrap();
        let rep = spsd_compress_blocks(&p, &b, 6).unwrap();
        let full = ind.to_dense().unwrap() + Matrix::identity(24, 24) * 1e-8;
        assert!(cholesky(&full).is_err());
        assert!(rep.shifted_cholesky(1e-8).is_err());
    }

    fn projector_oracle(a: &Matrix, u: &Matrix, l: usize) -> Matrix {
        let big = Matrix::identity(l, l).kronecker(&(u * u.transpose()));
        &big * a * &big
    }

    #[test]
    fn full_rank_spsd_is_exact() {
        let (p, a) = random_spsd_toeplitz(3, 4, 1);
        let rep = spsd_compress(&BlockMatrix::from_dense(&a, 4, 4).unwrap(), &p, 4).unwrap();
        assert!((rep.densify().unwrap() - &a).norm() <= 1e-12 * a.norm());
    }

    #[test]
    fn identity_input_stays_spsd() {
        let p = sym_toeplitz(3, 3);
        let a = Matrix::identity(9, 9);
        let rep = spsd_compress(&BlockMatrix::from_dense(&a, 3, 3).unwrap(), &p, 2).unwrap();
        let d = rep.densify().unwrap();
        assert!((&d - projector_oracle(&a, &rep.basis, 3)).norm() < 1e-12);
        assert!(asymmetry(&d) == 0.0 || asymmetry(&d) < 1e-15);
        let shift = 1e-10 * d.trace() / 9.0;
        assert!(cholesky(&(d + Matrix::identity(9, 9) * shift.max(1e-12))).is_ok());
    }

    #[test]
    fn spsd_toeplitz_projection_properties() {
        let (p, a) = random_spsd_toeplitz(4, 8, 3);
        let bm = BlockMatrix::from_dense(&a, 8, 8).unwrap();
        let rep = spsd_compress(&bm, &p, 4).unwrap();
        let d = rep.densify().unwrap();
        assert!((&d - projector_oracle(&a, &rep.basis, 4)).norm() <= 1e-12 * a.norm());
        assert!(asymmetry(&d) <= 1e-14 * a.norm());
        assert!(cholesky(&(&d + Matrix::identity(32, 32) * 1e-12)).is_ok());
        let min_eig = d.clone().symmetric_eigenvalues().min();
        assert!(min_eig >= -1e-10 * a.clone().symmetric_eigenvalues().max());
        // matrix error equals the error of the projected tensor
        let t = mat_to_tensor_dense(&a, &p).unwrap();
        let proj = t
            .mode_multiply_transpose(0, &rep.basis)
            .unwrap()
            .mode_multiply(0, &rep.basis)
            .unwrap()
            .mode_multiply_transpose(2, &rep.basis)
            .unwrap()
            .mode_multiply(2, &rep.basis)
            .unwrap();
        assert!(((&a - &d).norm() - proj.distance(&t).unwrap()).abs() <= 1e-12 * a.norm());
        assert!((rep.trace() - d.trace()).abs() <= 1e-10 * d.trace().abs());
        let x: Vec<f64> = (0..32).map(|i| (i as f64).sin()).collect();
        let y = rep.matvec(&x).unwrap();
        let want = &d * nalgebra::DVector::from_vec(x);
        assert!((nalgebra::DVector::from_vec(y) - want).norm() <= 1e-12 * a.norm());
    }

    #[test]
    fn spsd_rejects_asymmetric_and_open_patterns() {
        let p = BlockPattern::build(StructureClass::Toeplitz { symmetric: false }, 2, 2, 1, 1).unwrap();
        let a = Matrix::from_row_slice(2, 2, &[1.0, 3.0, 2.0, 1.0]);
        let bm = BlockMatrix::from_dense(&a, 1, 1).unwrap();
        assert!(matches!(spsd_compress(&bm, &p, 1), Err(Error::Asymmetric(_))));

        let lower = BlockPattern::new(2, 2, 1, 1, vec![vec![(0, 0), (1, 1)], vec![(1, 0)]], StructureClass::General).unwrap();
        assert!(matches!(check_transpose_closure(&lower), Err(Error::TransposeClosure(_))));
        let blocks = vec![Matrix::identity(1, 1), Matrix::identity(1, 1)];
        assert!(matches!(spsd_compress_blocks(&lower, &blocks, 1), Err(Error::TransposeClosure(_))));
        let toe = BlockPattern::build(StructureClass::Toeplitz { symmetric: false }, 3, 3, 1, 1).unwrap();
        assert!(check_transpose_closure(&toe).is_ok());
    }

    #[test]
    fn anchor_only_matrix_is_exact() {
        let t0 = Matrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let a = Matrix::identity(3, 3).kronecker(&t0);
        let (p, _) = crate::pattern::detect_pattern_dense(&a, 2, 2, 0.0).unwrap();
        assert_eq!(p.p(), 1);
        for r in 1..=2 {
            let rep = spd_compress(&BlockMatrix::from_dense(&a, 2, 2).unwrap(), &p, r).unwrap();
            assert!(rep.remainder.is_none());
            assert_eq!(rep.densify().unwrap(), a);
        }
    }

    #[test]
    fn two_by_two_toy() {
        let a = Matrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let p = sym_toeplitz(2, 1);
        let rep = spd_compress(&BlockMatrix::from_dense(&a, 1, 1).unwrap(), &p, 1).unwrap();
        let d = rep.densify().unwrap();
        assert!((&d - &a).norm() < 1e-14);
        let l = cholesky(&d).unwrap();
        assert!((l[(0, 0)] - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn spd_is_preserved_for_every_rank() {
        for seed in 0..10 {
            let (p, a) = random_spd_toeplitz(4, 5, seed);
            let bm = BlockMatrix::from_dense(&a, 5, 5).unwrap();
            for r in 1..=5 {
                let rep = spd_compress(&bm, &p, r).unwrap();
                let d = rep.densify().unwrap();
                assert!(cholesky(&d).is_ok(), "seed {seed} rank {r}");
                if r == 5 {
                    assert!((&d - &a).norm() <= 1e-10 * a.norm());
                }
                let x: Vec<f64> = (0..20).map(|i| ((i * 7 + 3) as f64).cos()).collect();
                let y = nalgebra::DVector::from_vec(rep.matvec(&x).unwrap());
                let want = &d * nalgebra::DVector::from_vec(x);
                assert!((y - want).norm() <= 1e-12 * a.norm());
            }
        }
    }

    #[test]
    fn quadratic_form_splits_over_the_projector() {
        let (p, a) = random_spd_toeplitz(3, 4, 21);
        let bm = BlockMatrix::from_dense(&a, 4, 4).unwrap();
        let rep = spd_compress(&bm, &p, 2).unwrap();
        let rem = rep.remainder.as_ref().unwrap();
        let m = rem.densify().unwrap();
        let u = &rem.basis;
        let big_p = Matrix::identity(3, 3).kronecker(&(u * u.transpose()));
        // the unprojected whitened remainder
        let full = spd_compress(&bm, &p, 4).unwrap().remainder.unwrap().densify().unwrap();
        for s in 0..5 {
            let x = random_matrix(12, 1, 300 + s);
            let x1 = &big_p * &x;
            let x2 = &x - &x1;
            let lhs = (x.transpose() * (Matrix::identity(12, 12) + &m) * &x)[(0, 0)];
            let rhs = x2.norm_squared() + (x1.transpose() * (Matrix::identity(12, 12) + &full) * &x1)[(0, 0)];
            assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn rearranged_form_matches() {
        let (p, a) = random_spd_toeplitz(3, 4, 5);
        let bm = BlockMatrix::from_dense(&a, 4, 4).unwrap();
        let rep = spd_compress(&bm, &p, 2).unwrap();
        let l = &rep.anchor;
        let linv = l.clone().try_inverse().unwrap();
        let u = &rep.remainder.as_ref().unwrap().basis;
        let proj = u * u.transpose();
        let t0 = l * l.transpose();
        let big_l = Matrix::identity(3, 3).kronecker(&(l * &proj * &linv));
        let big_r = Matrix::identity(3, 3).kronecker(&(linv.transpose() * &proj * l.transpose()));
        let rest = &a - Matrix::identity(3, 3).kronecker(&t0);
        let want = Matrix::identity(3, 3).kronecker(&t0) + big_l * rest * big_r;
        assert!((rep.densify().unwrap() - want).norm() <= 1e-10 * a.norm());
    }

    #[test]
    fn non_pd_anchor_is_reported() {
        let a = Matrix::from_row_slice(2, 2, &[-1.0, 0.5, 0.5, -1.0]);
        let p = sym_toeplitz(2, 1);
        assert!(matches!(
            spd_compress(&BlockMatrix::from_dense(&a, 1, 1).unwrap(), &p, 1),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }
}
