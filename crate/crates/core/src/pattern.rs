//! Block patterns and the matrix <-> tensor mappings built on them.
//!
//! A block matrix with an `ℓ x q` grid of `m x n` blocks is described by `p`
//! classes of block positions; every position of class `k` holds the same
//! block `A_k`. Class `k` has `η_k` positions and its placement matrix `E_k`
//! carries the weight `1/√η_k` on each of them, so `‖E_k‖_F = 1`.
//!
//! The tensor of a conforming matrix is `m x p x n` with lateral slice
//! `k` equal to `√η_k A_k`; mapping a tensor back divides slice `k` by `√η_k`
//! and places it at every position of class `k`. Both maps are isometries on
//! conforming inputs, so the matrix error of any tensor approximation equals
//! its tensor error.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::error::{shape_err, Error, Result};
use crate::sparse::CooMatrix;
use crate::tensor::{Matrix, Tensor};

/// Largest dense matrix (in entries) any routine will materialize.
pub const DENSE_GUARD: usize = 100_000_000;

pub(crate) fn check_dense_guard(rows: usize, cols: usize) -> Result<()> {
    if rows.saturating_mul(cols) > DENSE_GUARD {
        return Err(Error::SizeGuard { rows, cols, limit: DENSE_GUARD });
    }
    Ok(())
}

/// `√η` as used by both mappings, so scale and unscale agree bit-for-bit.
pub fn sqrt_count(eta: u64) -> f64 {
    (eta as f64).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StructureClass {
    Diagonal,
    /// Nonzero blocks only within `bandwidth` of the diagonal. The symmetric
    /// variant pairs position `(i, j)` with `(j, i)` in one class.
    Banded { bandwidth: usize, symmetric: bool },
    /// One class per block diagonal; the symmetric variant merges `±d`.
    Toeplitz { symmetric: bool },
    /// One class per block anti-diagonal.
    Hankel,
    General,
}

impl fmt::Display for StructureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructureClass::Diagonal => write!(f, "diagonal"),
            StructureClass::Banded { bandwidth, symmetric: false } => write!(f, "banded:{bandwidth}"),
            StructureClass::Banded { bandwidth, symmetric: true } => write!(f, "banded:{bandwidth}:sym"),
            StructureClass::Toeplitz { symmetric: false } => write!(f, "toeplitz"),
            StructureClass::Toeplitz { symmetric: true } => write!(f, "toeplitz:sym"),
            StructureClass::Hankel => write!(f, "hankel"),
            StructureClass::General => write!(f, "general"),
        }
    }
}

impl FromStr for StructureClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let sym = |rest: &[&str]| -> Result<bool> {
            match rest {
                [] => Ok(false),
                ["sym"] => Ok(true),
                _ => Err(Error::Parse(format!("bad structure class '{s}'"))),
            }
        };
        match parts.as_slice() {
            ["diagonal"] => Ok(StructureClass::Diagonal),
            ["hankel"] => Ok(StructureClass::Hankel),
            ["general"] => Ok(StructureClass::General),
            ["toeplitz", rest @ ..] => Ok(StructureClass::Toeplitz { symmetric: sym(rest)? }),
            ["banded", b, rest @ ..] => {
                let bandwidth = b
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad bandwidth in '{s}'")))?;
                Ok(StructureClass::Banded { bandwidth, symmetric: sym(rest)? })
            }
            _ => Err(Error::Parse(format!("unknown structure class '{s}'"))),
        }
    }
}

/// Placement of `p` distinct blocks on an `ℓ x q` block grid.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockPattern {
    block_rows: usize,
    block_cols: usize,
    m: usize,
    n: usize,
    classes: Vec<Vec<(usize, usize)>>,
    structure: StructureClass,
    lookup: BTreeMap<(usize, usize), usize>,
}

impl BlockPattern {
    /// Validates extents and that class supports are nonempty, in range and disjoint.
    pub fn new(
        block_rows: usize,
        block_cols: usize,
        m: usize,
        n: usize,
        classes: Vec<Vec<(usize, usize)>>,
        structure: StructureClass,
    ) -> Result<Self> {
        if block_rows == 0 || block_cols == 0 || m == 0 || n == 0 {
            return shape_err("block grid and block extents must be positive");
        }
        let mut lookup = BTreeMap::new();
        for (k, pos) in classes.iter().enumerate() {
            if pos.is_empty() {
                return Err(Error::InvalidArgument(format!("class {k} has no positions")));
            }
            for &(i, j) in pos {
                if i >= block_rows || j >= block_cols {
                    return Err(Error::InvalidArgument(format!(
                        "position ({i}, {j}) outside the {block_rows}x{block_cols} block grid"
                    )));
                }
                if lookup.insert((i, j), k).is_some() {
                    return Err(Error::InvalidArgument(format!(
                        "position ({i}, {j}) belongs to two classes"
                    )));
                }
            }
        }
        Ok(Self { block_rows, block_cols, m, n, classes, structure, lookup })
    }

    /// Canonical pattern of a structure class on an `ℓ x q` grid.
    pub fn build(structure: StructureClass, block_rows: usize, block_cols: usize, m: usize, n: usize) -> Result<Self> {
        let (l, q) = (block_rows, block_cols);
        if l == 0 || q == 0 {
            return shape_err("block grid extents must be positive");
        }
        let square = || -> Result<()> {
            if l != q {
                return Err(Error::InvalidArgument(format!(
                    "{structure} needs a square block grid, got {l}x{q}"
                )));
            }
            Ok(())
        };
        let classes: Vec<Vec<(usize, usize)>> = match structure {
            StructureClass::Diagonal => (0..l.min(q)).map(|i| vec![(i, i)]).collect(),
            StructureClass::General => (0..l).flat_map(|i| (0..q).map(move |j| vec![(i, j)])).collect(),
            StructureClass::Hankel => (0..l + q - 1)
                .map(|s| (0..l).filter(|&i| s >= i && s - i < q).map(|i| (i, s - i)).collect())
                .collect(),
            StructureClass::Toeplitz { symmetric: false } => {
                let diag = |d: isize| -> Vec<(usize, usize)> {
                    (0..l)
                        .filter_map(|i| {
                            let j = i as isize - d;
                            (j >= 0 && (j as usize) < q).then_some((i, j as usize))
                        })
                        .collect()
                };
                let mut out = vec![diag(0)];
                out.extend((1..l).map(|d| diag(d as isize)));
                out.extend((1..q).map(|d| diag(-(d as isize))));
                out
            }
            StructureClass::Toeplitz { symmetric: true } => {
                square()?;
                (0..l)
                    .map(|d| {
                        let mut pos: Vec<(usize, usize)> = (d..l).map(|i| (i, i - d)).collect();
                        if d > 0 {
                            pos.extend((d..l).map(|i| (i - d, i)));
                        }
                        pos
                    })
                    .collect()
            }
            StructureClass::Banded { bandwidth: b, symmetric } => {
                if b >= l || b >= q {
                    return Err(Error::InvalidArgument(format!(
                        "bandwidth {b} must be below the block grid extents {l}x{q}"
                    )));
                }
                if symmetric {
                    square()?;
                    let mut out = Vec::new();
                    for j in 0..q {
                        for i in j..=(j + b).min(l - 1) {
                            if i == j {
                                out.push(vec![(i, j)]);
                            } else {
                                out.push(vec![(i, j), (j, i)]);
                            }
                        }
                    }
                    out
                } else {
                    let mut out = Vec::new();
                    for j in 0..q {
                        for i in j.saturating_sub(b)..=(j + b).min(l - 1) {
                            out.push(vec![(i, j)]);
                        }
                    }
                    out
                }
            }
        };
        Self::new(l, q, m, n, classes, structure)
    }

    /// `ℓ`: number of block rows.
    pub fn block_rows(&self) -> usize {
        self.block_rows
    }

    /// `q`: number of block columns.
    pub fn block_cols(&self) -> usize {
        self.block_cols
    }

    /// `(m, n)`: extents of each block.
    pub fn block_dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn rows(&self) -> usize {
        self.block_rows * self.m
    }

    pub fn cols(&self) -> usize {
        self.block_cols * self.n
    }

    /// Number of distinct blocks.
    pub fn p(&self) -> usize {
        self.classes.len()
    }

    pub fn structure(&self) -> StructureClass {
        self.structure
    }

    pub fn positions(&self, k: usize) -> &[(usize, usize)] {
        &self.classes[k]
    }

    pub fn classes(&self) -> &[Vec<(usize, usize)>] {
        &self.classes
    }

    pub fn eta(&self, k: usize) -> usize {
        self.classes[k].len()
    }

    pub fn etas(&self) -> Vec<usize> {
        self.classes.iter().map(Vec::len).collect()
    }

    /// Entry value `1/√η_k` of `E_k`.
    pub fn weight(&self, k: usize) -> f64 {
        1.0 / sqrt_count(self.eta(k) as u64)
    }

    pub fn class_at(&self, i: usize, j: usize) -> Option<usize> {
        self.lookup.get(&(i, j)).copied()
    }

    /// Dense `ℓ x q` placement matrix `E_k`.
    pub fn placement(&self, k: usize) -> Matrix {
        let mut e = Matrix::zeros(self.block_rows, self.block_cols);
        let w = self.weight(k);
        for &(i, j) in &self.classes[k] {
            e[(i, j)] = w;
        }
        e
    }

    /// Same pattern with different block extents.
    pub fn with_block_dims(&self, m: usize, n: usize) -> Result<Self> {
        Self::new(self.block_rows, self.block_cols, m, n, self.classes.clone(), self.structure)
    }

    /// Class whose support is the transpose of class `k`'s support, if any.
    pub fn transpose_class(&self, k: usize) -> Option<usize> {
        let &(i0, j0) = self.classes[k].first()?;
        let t = self.class_at(j0, i0)?;
        let mut a: Vec<(usize, usize)> = self.classes[k].iter().map(|&(i, j)| (j, i)).collect();
        let mut b = self.classes[t].clone();
        a.sort_unstable();
        b.sort_unstable();
        (a == b).then_some(t)
    }
}

/// Structure label for a set of class supports.
pub fn classify(block_rows: usize, block_cols: usize, classes: &[Vec<(usize, usize)>]) -> StructureClass {
    let (l, q) = (block_rows, block_cols);
    let all = || classes.iter().flatten();
    if all().all(|&(i, j)| i == j) {
        return StructureClass::Diagonal;
    }
    let sorted = |mut v: Vec<(usize, usize)>| {
        v.sort_unstable();
        v
    };
    let diagonal = |d: isize| -> Vec<(usize, usize)> {
        (0..l)
            .filter_map(|i| {
                let j = i as isize - d;
                (j >= 0 && (j as usize) < q).then_some((i, j as usize))
            })
            .collect()
    };
    let full_diagonal = |c: &Vec<(usize, usize)>| {
        let d = c[0].0 as isize - c[0].1 as isize;
        sorted(c.clone()) == sorted(diagonal(d))
    };
    if classes.iter().all(full_diagonal) {
        return StructureClass::Toeplitz { symmetric: false };
    }
    let full_sym_diagonal = |c: &Vec<(usize, usize)>| {
        let d = (c[0].0 as isize - c[0].1 as isize).abs();
        let mut want = diagonal(d);
        if d > 0 {
            want.extend(diagonal(-d));
        }
        sorted(c.clone()) == sorted(want)
    };
    if l == q && classes.iter().all(full_sym_diagonal) {
        return StructureClass::Toeplitz { symmetric: true };
    }
    let full_antidiagonal = |c: &Vec<(usize, usize)>| {
        let s = c[0].0 + c[0].1;
        let want: Vec<(usize, usize)> = (0..l).filter(|&i| s >= i && s - i < q).map(|i| (i, s - i)).collect();
        sorted(c.clone()) == sorted(want)
    };
    if classes.iter().all(full_antidiagonal) {
        return StructureClass::Hankel;
    }
    let b = all().map(|&(i, j)| i.abs_diff(j)).max().unwrap_or(0);
    if b + 1 < l.max(q) {
        let symmetric = classes.iter().all(|c| {
            let mut t: Vec<(usize, usize)> = c.iter().map(|&(i, j)| (j, i)).collect();
            t.sort_unstable();
            t == sorted(c.clone())
        });
        return StructureClass::Banded { bandwidth: b, symmetric };
    }
    StructureClass::General
}

/// Block-sparse matrix: an `ℓ x q` grid of `m x n` blocks, zero blocks omitted.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockMatrix {
    block_rows: usize,
    block_cols: usize,
    m: usize,
    n: usize,
    blocks: BTreeMap<(usize, usize), Matrix>,
}

impl BlockMatrix {
    pub fn new(block_rows: usize, block_cols: usize, m: usize, n: usize) -> Self {
        Self { block_rows, block_cols, m, n, blocks: BTreeMap::new() }
    }

    pub fn from_dense(a: &Matrix, m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 || a.nrows() % m != 0 || a.ncols() % n != 0 {
            return shape_err(format!(
                "{}x{} matrix is not divisible into {m}x{n} blocks",
                a.nrows(),
                a.ncols()
            ));
        }
        let mut out = Self::new(a.nrows() / m, a.ncols() / n, m, n);
        for i in 0..out.block_rows {
            for j in 0..out.block_cols {
                let blk = a.view((i * m, j * n), (m, n));
                if blk.iter().any(|&v| v != 0.0) {
                    out.blocks.insert((i, j), blk.into_owned());
                }
            }
        }
        Ok(out)
    }

    pub fn from_coo(a: &CooMatrix, m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 || a.rows % m != 0 || a.cols % n != 0 {
            return shape_err(format!(
                "{}x{} matrix is not divisible into {m}x{n} blocks",
                a.rows, a.cols
            ));
        }
        let mut out = Self::new(a.rows / m, a.cols / n, m, n);
        for &(i, j, v) in &a.entries {
            if v == 0.0 {
                continue;
            }
            let blk = out.blocks.entry((i / m, j / n)).or_insert_with(|| Matrix::zeros(m, n));
            blk[(i % m, j % n)] += v;
        }
        out.blocks.retain(|_, b| b.iter().any(|&v| v != 0.0));
        Ok(out)
    }

    pub fn block_rows(&self) -> usize {
        self.block_rows
    }

    pub fn block_cols(&self) -> usize {
        self.block_cols
    }

    pub fn block_dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn rows(&self) -> usize {
        self.block_rows * self.m
    }

    pub fn cols(&self) -> usize {
        self.block_cols * self.n
    }

    pub fn block(&self, i: usize, j: usize) -> Option<&Matrix> {
        self.blocks.get(&(i, j))
    }

    /// Nonzero blocks in row-major block order.
    pub fn blocks(&self) -> impl Iterator<Item = (&(usize, usize), &Matrix)> {
        self.blocks.iter()
    }

    /// Stores `b` at block `(i, j)`; an all-zero block clears the position.
    pub fn insert(&mut self, i: usize, j: usize, b: Matrix) -> Result<()> {
        if i >= self.block_rows || j >= self.block_cols {
            return shape_err(format!("block ({i}, {j}) outside the grid"));
        }
        if b.shape() != (self.m, self.n) {
            return shape_err(format!(
                "block is {}x{}, expected {}x{}",
                b.nrows(),
                b.ncols(),
                self.m,
                self.n
            ));
        }
        if b.iter().any(|&v| v != 0.0) {
            self.blocks.insert((i, j), b);
        } else {
            self.blocks.remove(&(i, j));
        }
        Ok(())
    }

    pub fn to_dense(&self) -> Result<Matrix> {
        check_dense_guard(self.rows(), self.cols())?;
        let mut a = Matrix::zeros(self.rows(), self.cols());
        for (&(i, j), b) in &self.blocks {
            a.view_mut((i * self.m, j * self.n), (self.m, self.n)).copy_from(b);
        }
        Ok(a)
    }

    pub fn to_coo(&self) -> CooMatrix {
        let mut out = CooMatrix::new(self.rows(), self.cols());
        for (&(bi, bj), b) in &self.blocks {
            for c in 0..self.n {
                for r in 0..self.m {
                    let v = b[(r, c)];
                    if v != 0.0 {
                        out.entries.push((bi * self.m + r, bj * self.n + c, v));
                    }
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.blocks.values().map(|b| b.norm_squared()).sum::<f64>().sqrt()
    }

    pub fn nnz(&self) -> usize {
        self.blocks.values().map(|b| b.iter().filter(|&&v| v != 0.0).count()).sum()
    }

    pub fn trace(&self) -> f64 {
        self.blocks
            .iter()
            .filter(|((i, j), _)| i == j)
            .map(|(_, b)| b.diagonal().sum())
            .sum()
    }

    /// `‖self − other‖_F` computed block by block.
    pub fn distance(&self, other: &BlockMatrix) -> Result<f64> {
        if (self.block_rows, self.block_cols, self.m, self.n)
            != (other.block_rows, other.block_cols, other.m, other.n)
        {
            return shape_err("block matrices have different layouts");
        }
        let mut s = 0.0;
        for (key, a) in &self.blocks {
            s += match other.blocks.get(key) {
                Some(b) => (a - b).norm_squared(),
                None => a.norm_squared(),
            };
        }
        for (key, b) in &other.blocks {
            if !self.blocks.contains_key(key) {
                s += b.norm_squared();
            }
        }
        Ok(s.sqrt())
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols() {
            return shape_err(format!("vector of length {} for {} columns", x.len(), self.cols()));
        }
        let mut y = vec![0.0; self.rows()];
        for (&(i, j), b) in &self.blocks {
            let xs = nalgebra::DVectorView::from_slice(&x[j * self.n..(j + 1) * self.n], self.n);
            let out = b * xs;
            for (r, v) in out.iter().enumerate() {
                y[i * self.m + r] += v;
            }
        }
        Ok(y)
    }
}

fn block_key(b: &Matrix) -> Vec<u64> {
    // -0.0 and 0.0 compare equal, so hash them alike
    b.iter().map(|&v| if v == 0.0 { 0 } else { v.to_bits() }).collect()
}

fn within_tol(a: &Matrix, b: &Matrix, tol: f64) -> bool {
    a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= tol)
}

/// Groups the nonzero blocks of `a` into classes of equal blocks.
///
/// Classes are numbered by first occurrence in row-major block order and the
/// first block of each class is its representative. With `tol == 0` blocks
/// must match bit-for-bit (found through a hash map); with `tol > 0` each
/// block joins the first class whose representative is within `tol`
/// entrywise, and blocks with every entry within `tol` of zero are dropped.
pub fn detect_pattern(a: &BlockMatrix, tol: f64) -> Result<(BlockPattern, Vec<Matrix>)> {
    let mut classes: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut reps: Vec<Matrix> = Vec::new();
    if tol == 0.0 {
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
        for (&pos, b) in a.blocks() {
            match seen.get(&block_key(b)) {
                Some(&k) => classes[k].push(pos),
                None => {
                    seen.insert(block_key(b), reps.len());
                    classes.push(vec![pos]);
                    reps.push(b.clone());
                }
            }
        }
    } else {
        for (&pos, b) in a.blocks() {
            if b.iter().all(|v| v.abs() <= tol) {
                continue;
            }
            match reps.iter().position(|r| within_tol(r, b, tol)) {
                Some(k) => classes[k].push(pos),
                None => {
                    classes.push(vec![pos]);
                    reps.push(b.clone());
                }
            }
        }
    }
    if classes.is_empty() {
        return Err(Error::Degenerate("matrix has no nonzero blocks".into()));
    }
    let structure = classify(a.block_rows(), a.block_cols(), &classes);
    let (m, n) = a.block_dims();
    let pattern = BlockPattern::new(a.block_rows(), a.block_cols(), m, n, classes, structure)?;
    Ok((pattern, reps))
}

pub fn detect_pattern_dense(a: &Matrix, m: usize, n: usize, tol: f64) -> Result<(BlockPattern, Vec<Matrix>)> {
    detect_pattern(&BlockMatrix::from_dense(a, m, n)?, tol)
}

fn check_blocks(pattern: &BlockPattern, blocks: &[Matrix]) -> Result<()> {
    if blocks.len() != pattern.p() {
        return shape_err(format!("{} blocks for a pattern with p = {}", blocks.len(), pattern.p()));
    }
    let dims = pattern.block_dims();
    if let Some(b) = blocks.iter().find(|b| b.shape() != dims) {
        return shape_err(format!(
            "block is {}x{}, pattern expects {}x{}",
            b.nrows(),
            b.ncols(),
            dims.0,
            dims.1
        ));
    }
    Ok(())
}

/// `Σ_k E_k ⊗ (√η_k A_k)`: block `A_k` at every position of class `k`.
pub fn struct_assemble(pattern: &BlockPattern, blocks: &[Matrix]) -> Result<BlockMatrix> {
    check_blocks(pattern, blocks)?;
    let (m, n) = pattern.block_dims();
    let mut out = BlockMatrix::new(pattern.block_rows(), pattern.block_cols(), m, n);
    for (k, b) in blocks.iter().enumerate() {
        for &(i, j) in pattern.positions(k) {
            out.insert(i, j, b.clone())?;
        }
    }
    Ok(out)
}

pub fn struct_assemble_dense(pattern: &BlockPattern, blocks: &[Matrix]) -> Result<Matrix> {
    struct_assemble(pattern, blocks)?.to_dense()
}

/// Class representatives of `a`, checking that `a` conforms to `pattern`
/// (blocks within a class agree to `tol`, no nonzero block outside the support).
pub fn extract_blocks(a: &BlockMatrix, pattern: &BlockPattern, tol: f64) -> Result<Vec<Matrix>> {
    if (a.block_rows(), a.block_cols(), a.block_dims())
        != (pattern.block_rows(), pattern.block_cols(), pattern.block_dims())
    {
        return Err(Error::PatternMismatch(format!(
            "matrix has a {}x{} grid of {:?} blocks, pattern a {}x{} grid of {:?} blocks",
            a.block_rows(),
            a.block_cols(),
            a.block_dims(),
            pattern.block_rows(),
            pattern.block_cols(),
            pattern.block_dims()
        )));
    }
    for (&(i, j), b) in a.blocks() {
        if pattern.class_at(i, j).is_none() && b.iter().any(|v| v.abs() > tol) {
            return Err(Error::PatternMismatch(format!("nonzero block at ({i}, {j}) outside every class")));
        }
    }
    let (m, n) = pattern.block_dims();
    let zero = Matrix::zeros(m, n);
    let mut reps = Vec::with_capacity(pattern.p());
    for k in 0..pattern.p() {
        let pos = pattern.positions(k);
        let rep = a.block(pos[0].0, pos[0].1).unwrap_or(&zero);
        for &(i, j) in &pos[1..] {
            let b = a.block(i, j).unwrap_or(&zero);
            if !within_tol(rep, b, tol) {
                return Err(Error::PatternMismatch(format!(
                    "block ({i}, {j}) differs from its class representative at ({}, {})",
                    pos[0].0, pos[0].1
                )));
            }
        }
        reps.push(rep.clone());
    }
    Ok(reps)
}

/// Tensor of a block tuple: lateral slice `k` is `√η_k A_k`.
pub fn blocks_to_tensor(pattern: &BlockPattern, blocks: &[Matrix]) -> Result<Tensor> {
    check_blocks(pattern, blocks)?;
    let slices: Vec<Matrix> = blocks
        .iter()
        .enumerate()
        .map(|(k, b)| b * sqrt_count(pattern.eta(k) as u64))
        .collect();
    Tensor::from_lateral_slices(&slices, &[pattern.p()])
}

/// Matrix-to-tensor map for a matrix conforming to `pattern` within `tol`.
pub fn mat_to_tensor(a: &BlockMatrix, pattern: &BlockPattern, tol: f64) -> Result<Tensor> {
    blocks_to_tensor(pattern, &extract_blocks(a, pattern, tol)?)
}

pub fn mat_to_tensor_dense(a: &Matrix, pattern: &BlockPattern) -> Result<Tensor> {
    let (m, n) = pattern.block_dims();
    mat_to_tensor(&BlockMatrix::from_dense(a, m, n)?, pattern, 0.0)
}

/// Block tuple of a tensor: `A_k = slice_k / √η_k`.
pub fn tensor_to_blocks(t: &Tensor, pattern: &BlockPattern) -> Result<Vec<Matrix>> {
    let (m, n) = pattern.block_dims();
    if t.dims() != [m, pattern.p(), n] {
        return shape_err(format!(
            "tensor {:?} does not match pattern extents {m}x{}x{n}",
            t.dims(),
            pattern.p()
        ));
    }
    Ok((0..pattern.p())
        .map(|k| t.lateral_slice(k) / sqrt_count(pattern.eta(k) as u64))
        .collect())
}

/// Tensor-to-matrix map `Σ_k E_k ⊗ sq(t_{:,k,:})`.
pub fn tensor_to_mat(t: &Tensor, pattern: &BlockPattern) -> Result<BlockMatrix> {
    struct_assemble(pattern, &tensor_to_blocks(t, pattern)?)
}

pub fn tensor_to_mat_dense(t: &Tensor, pattern: &BlockPattern) -> Result<Matrix> {
    tensor_to_mat(t, pattern)?.to_dense()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{random_matrix, random_tensor};
    use proptest::prelude::*;

    fn toy() -> Matrix {
        Matrix::from_row_slice(2, 2, &[1.0, 3.0, 2.0, 1.0])
    }

    /// Independent dense oracle: `Σ_k kron(E_k, slice_k)`.
    fn dense_kron_map(t: &Tensor, pattern: &BlockPattern) -> Matrix {
        let mut out = Matrix::zeros(pattern.rows(), pattern.cols());
        for k in 0..pattern.p() {
            out += pattern.placement(k).kronecker(&t.lateral_slice(k));
        }
        out
    }

    fn all_structures(l: usize) -> Vec<StructureClass> {
        let mut v = vec![
            StructureClass::Diagonal,
            StructureClass::Toeplitz { symmetric: false },
            StructureClass::Toeplitz { symmetric: true },
            StructureClass::Hankel,
            StructureClass::General,
        ];
        if l > 1 {
            v.push(StructureClass::Banded { bandwidth: 1, symmetric: false });
            v.push(StructureClass::Banded { bandwidth: 1, symmetric: true });
        }
        v
    }

    #[test]
    fn diagonal_pattern() {
        let p = BlockPattern::build(StructureClass::Diagonal, 3, 3, 1, 1).unwrap();
        assert_eq!(p.p(), 3);
        for k in 0..3 {
            assert_eq!(p.eta(k), 1);
            let mut e = Matrix::zeros(3, 3);
            e[(k, k)] = 1.0;
            assert_eq!(p.placement(k), e);
        }
    }

    #[test]
    fn tridiagonal_pattern_count() {
        let p = BlockPattern::build(StructureClass::Banded { bandwidth: 1, symmetric: false }, 4, 4, 1, 1).unwrap();
        assert_eq!(p.p(), 3 * 4 - 2);
        // column-major within the band
        assert_eq!(p.positions(0), &[(0, 0)]);
        assert_eq!(p.positions(1), &[(1, 0)]);
        assert_eq!(p.positions(2), &[(0, 1)]);
        let s = BlockPattern::build(StructureClass::Banded { bandwidth: 1, symmetric: true }, 4, 4, 1, 1).unwrap();
        assert_eq!(s.p(), 4 * 2 - 1);
        assert!(BlockPattern::build(StructureClass::Banded { bandwidth: 4, symmetric: false }, 4, 4, 1, 1).is_err());
    }

    #[test]
    fn toeplitz_pattern_small() {
        let p = BlockPattern::build(StructureClass::Toeplitz { symmetric: false }, 2, 2, 1, 1).unwrap();
        assert_eq!(p.p(), 3);
        assert_eq!(p.etas(), vec![2, 1, 1]);
        let e1 = p.placement(0);
        let want = Matrix::identity(2, 2) / 2f64.sqrt();
        assert!((e1 - want).norm() < 1e-16);
        let s = BlockPattern::build(StructureClass::Toeplitz { symmetric: true }, 5, 5, 1, 1).unwrap();
        assert_eq!(s.p(), 5);
        assert_eq!(s.etas(), vec![5, 8, 6, 4, 2]);
    }

    #[test]
    fn hankel_pattern_counts() {
        let p = BlockPattern::build(StructureClass::Hankel, 3, 3, 1, 1).unwrap();
        assert_eq!(p.etas(), vec![1, 2, 3, 2, 1]);
        assert_eq!(p.positions(1), &[(0, 1), (1, 0)]);
    }

    #[test]
    fn placements_have_unit_norm_and_disjoint_support() {
        for (l, q) in [(1, 1), (3, 3), (4, 2), (2, 5), (5, 5)] {
            for s in all_structures(l.min(q)) {
                let Ok(p) = BlockPattern::build(s, l, q, 2, 1) else {
                    continue;
                };
                let mut cover = Matrix::zeros(l, q);
                for k in 0..p.p() {
                    let e = p.placement(k);
                    assert!((e.norm() - 1.0).abs() < 1e-15);
                    assert_eq!(e.iter().filter(|&&v| v != 0.0).count(), p.eta(k));
                    cover += e.map(|v| (v != 0.0) as u8 as f64);
                }
                assert!(cover.iter().all(|&v| v <= 1.0), "{s} {l}x{q}");
            }
        }
    }

    #[test]
    fn structure_class_text_roundtrip() {
        for s in all_structures(3) {
            assert_eq!(s.to_string().parse::<StructureClass>().unwrap(), s);
        }
        assert!("banded".parse::<StructureClass>().is_err());
        assert!("toeplitz:x".parse::<StructureClass>().is_err());
    }

    #[test]
    fn detect_identity() {
        let (p, blocks) = detect_pattern_dense(&Matrix::identity(4, 4), 2, 2, 0.0).unwrap();
        assert_eq!(p.p(), 1);
        assert_eq!(p.eta(0), 2);
        assert_eq!(blocks[0], Matrix::identity(2, 2));
        assert_eq!(p.structure(), StructureClass::Diagonal);
    }

    #[test]
    fn detect_toeplitz_toy() {
        let (p, blocks) = detect_pattern_dense(&toy(), 1, 1, 0.0).unwrap();
        assert_eq!(p.p(), 3);
        assert_eq!(p.etas(), vec![2, 1, 1]);
        let vals: Vec<f64> = blocks.iter().map(|b| b[(0, 0)]).collect();
        assert_eq!(vals, vec![1.0, 3.0, 2.0]);
        assert_eq!(p.structure(), StructureClass::Toeplitz { symmetric: false });
    }

    #[test]
    fn detect_all_distinct() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let (p, _) = detect_pattern_dense(&a, 1, 1, 0.0).unwrap();
        assert_eq!(p.p(), 4);
        assert!(p.etas().iter().all(|&e| e == 1));
    }

    #[test]
    fn detect_labels_and_negative_zero() {
        let a = Matrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 3.0, 4.0, 3.0, 4.0, 5.0]);
        assert_eq!(detect_pattern_dense(&a, 1, 1, 0.0).unwrap().0.structure(), StructureClass::Hankel);
        let b = Matrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 2.0, 1.0, 2.0, 0.0, 2.0, 1.0]);
        assert_eq!(
            detect_pattern_dense(&b, 1, 1, 0.0).unwrap().0.structure(),
            StructureClass::Toeplitz { symmetric: true }
        );
        let c = Matrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 5.0, 3.0, 6.0, 0.0, 7.0, 4.0]);
        assert_eq!(
            detect_pattern_dense(&c, 1, 1, 0.0).unwrap().0.structure(),
            StructureClass::Banded { bandwidth: 1, symmetric: false }
        );
        let d = Matrix::from_row_slice(1, 2, &[0.5, -0.0]);
        let (p, _) = detect_pattern_dense(&Matrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.5]), 1, 1, 0.0).unwrap();
        assert_eq!(p.p(), 1);
        let (pd, _) = detect_pattern_dense(&d, 1, 1, 0.0).unwrap();
        assert_eq!(pd.p(), 1);
    }

    #[test]
    fn detect_with_tolerance() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 3.0, 2.0, 1.0 + 1e-9]);
        assert_eq!(detect_pattern_dense(&a, 1, 1, 0.0).unwrap().0.p(), 4);
        assert_eq!(detect_pattern_dense(&a, 1, 1, 1e-8).unwrap().0.p(), 3);
    }

    #[test]
    fn detect_rejects_indivisible() {
        assert!(matches!(
            detect_pattern_dense(&Matrix::zeros(3, 4), 2, 2, 0.0),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn assemble_examples() {
        let p = BlockPattern::new(1, 1, 2, 2, vec![vec![(0, 0)]], StructureClass::General).unwrap();
        let a = random_matrix(2, 2, 1);
        assert_eq!(struct_assemble_dense(&p, &[a.clone()]).unwrap(), a);

        let d = BlockPattern::build(StructureClass::Diagonal, 2, 2, 1, 1).unwrap();
        let blocks = [Matrix::from_element(1, 1, 1.0), Matrix::from_element(1, 1, 2.0)];
        assert_eq!(
            struct_assemble_dense(&d, &blocks).unwrap(),
            Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0])
        );

        let t = BlockPattern::build(StructureClass::Toeplitz { symmetric: false }, 2, 2, 1, 1).unwrap();
        let blocks: Vec<Matrix> = [1.0, 2.0, 3.0].iter().map(|&v| Matrix::from_element(1, 1, v)).collect();
        assert_eq!(struct_assemble_dense(&t, &blocks).unwrap(), toy());
        assert!(struct_assemble(&t, &blocks[..2]).is_err());
    }

    #[test]
    fn toy_tensor() {
        let p = BlockPattern::build(StructureClass::Toeplitz { symmetric: false }, 2, 2, 1, 1).unwrap();
        let t = mat_to_tensor_dense(&toy(), &p).unwrap();
        assert_eq!(t.dims(), &[1, 3, 1]);
        assert_eq!(t.data(), &[2f64.sqrt(), 2.0, 3.0]);
        assert!((t.frobenius_norm() - toy().norm()).abs() < 1e-15);
        let z = mat_to_tensor_dense(&Matrix::zeros(2, 2), &p).unwrap();
        assert_eq!(z.frobenius_norm(), 0.0);
        assert_eq!(tensor_to_mat_dense(&Tensor::zeros(&[1, 3, 1]), &p).unwrap(), Matrix::zeros(2, 2));
    }

    #[test]
    fn nonconforming_matrix_is_rejected() {
        let p = BlockPattern::build(StructureClass::Toeplitz { symmetric: false }, 2, 2, 1, 1).unwrap();
        let a = Matrix::from_row_slice(2, 2, &[1.0, 3.0, 2.0, 1.5]);
        assert!(matches!(mat_to_tensor_dense(&a, &p), Err(Error::PatternMismatch(_))));
        let d = BlockPattern::build(StructureClass::Diagonal, 2, 2, 1, 1).unwrap();
        assert!(matches!(mat_to_tensor_dense(&toy(), &d), Err(Error::PatternMismatch(_))));
    }

    #[test]
    fn kron_placements_are_orthogonal() {
        let p = BlockPattern::build(StructureClass::Toeplitz { symmetric: false }, 3, 3, 2, 2).unwrap();
        for j in 0..p.p() {
            for k in 0..p.p() {
                if j == k {
                    continue;
                }
                let a = p.placement(j).kronecker(&random_matrix(2, 2, j as u64));
                let b = p.placement(k).kronecker(&random_matrix(2, 2, 10 + k as u64));
                assert_eq!(a.dot(&b), 0.0);
            }
        }
    }

    #[test]
    fn transpose_classes() {
        let p = BlockPattern::build(StructureClass::Toeplitz { symmetric: false }, 3, 3, 1, 1).unwrap();
        // main, sub 1, sub 2, super 1, super 2
        assert_eq!(p.transpose_class(0), Some(0));
        assert_eq!(p.transpose_class(1), Some(3));
        assert_eq!(p.transpose_class(4), Some(2));
        let h = BlockPattern::build(StructureClass::Hankel, 3, 3, 1, 1).unwrap();
        for k in 0..h.p() {
            assert_eq!(h.transpose_class(k), Some(k));
        }
    }

    #[test]
    fn block_matrix_sparse_and_dense_agree() {
        let a = random_matrix(6, 4, 3);
        let bm = BlockMatrix::from_dense(&a, 3, 2).unwrap();
        let coo = CooMatrix::from_dense(&a);
        assert_eq!(BlockMatrix::from_coo(&coo, 3, 2).unwrap(), bm);
        assert_eq!(bm.to_dense().unwrap(), a);
        assert_eq!(bm.to_coo().to_dense(), a);
        assert!((bm.frobenius_norm() - a.norm()).abs() < 1e-14);
        let x: Vec<f64> = (0..4).map(|i| i as f64 - 1.5).collect();
        let y = bm.matvec(&x).unwrap();
        let want = &a * nalgebra::DVector::from_vec(x);
        for (u, v) in y.iter().zip(want.iter()) {
            assert!((u - v).abs() < 1e-14);
        }
        assert!(bm.distance(&BlockMatrix::new(2, 2, 3, 2)).unwrap() - a.norm() < 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn error_transfer_holds(l in 1usize..5, m in 1usize..4, n in 1usize..4, s in 0usize..7, seed in 0u64..1000) {
            let structures = all_structures(l);
            let st = structures[s % structures.len()];
            let p = BlockPattern::build(st, l, l, m, n).unwrap();
            let blocks: Vec<Matrix> = (0..p.p()).map(|k| random_matrix(m, n, seed * 31 + k as u64)).collect();
            let a = struct_assemble_dense(&p, &blocks).unwrap();
            let t = mat_to_tensor_dense(&a, &p).unwrap();
            prop_assert!((t.frobenius_norm() - a.norm()).abs() <= 1e-13 * a.norm());
            let back = tensor_to_mat_dense(&t, &p).unwrap();
            prop_assert!((&back - &a).norm() <= 1e-14 * a.norm());
            let approx = t.add(&random_tensor(t.dims(), seed + 7).scale(0.1)).unwrap();
            let mat_err = (&a - dense_kron_map(&approx, &p)).norm();
            let ten_err = approx.distance(&t).unwrap();
            prop_assert!((mat_err - ten_err).abs() <= 1e-12 * a.norm());
            prop_assert!(((&a - tensor_to_mat_dense(&approx, &p).unwrap()).norm() - ten_err).abs() <= 1e-12 * a.norm());
        }

        #[test]
        fn detect_inverts_assemble(l in 1usize..5, q in 1usize..5, seed in 0u64..1000) {
            let p = BlockPattern::build(StructureClass::General, l, q, 2, 2).unwrap();
            let blocks: Vec<Matrix> = (0..p.p()).map(|k| random_matrix(2, 2, seed * 17 + k as u64)).collect();
            let a = struct_assemble(&p, &blocks).unwrap();
            let (dp, db) = detect_pattern(&a, 0.0).unwrap();
            prop_assert_eq!(dp.classes(), p.classes());
            prop_assert_eq!(db, blocks);
            prop_assert_eq!(struct_assemble(&dp, &extract_blocks(&a, &dp, 0.0).unwrap()).unwrap(), a);
        }
    }
}
