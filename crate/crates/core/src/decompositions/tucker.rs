//! Tucker representations: HOSVD, partial / shared-factor Tucker and
//! projection onto caller-supplied bases.

use super::linalg::{left_singular_vectors, singular_values};
use crate::error::{Error, Result};
use crate::tensor::{Matrix, Tensor};

/// Per-mode factor of a Tucker representation.
#[derive(Clone, Debug, PartialEq)]
pub enum Factor {
    /// Mode left uncompressed; carries the mode extent.
    Identity(usize),
    /// `extent x rank` factor with orthonormal columns.
    Dense(Matrix),
}

impl Factor {
    pub fn extent(&self) -> usize {
        match self {
            Factor::Identity(n) => *n,
            Factor::Dense(m) => m.nrows(),
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            Factor::Identity(n) => *n,
            Factor::Dense(m) => m.ncols(),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Factor::Identity(_))
    }

    pub fn to_matrix(&self) -> Matrix {
        match self {
            Factor::Identity(n) => Matrix::identity(*n, *n),
            Factor::Dense(m) => m.clone(),
        }
    }

    /// `F · x` for a vector / matrix `x` with `rank` rows.
    pub fn apply(&self, x: &Matrix) -> Matrix {
        match self {
            Factor::Identity(_) => x.clone(),
            Factor::Dense(m) => m * x,
        }
    }

    /// `Fᵀ · x`.
    pub fn apply_transpose(&self, x: &Matrix) -> Matrix {
        match self {
            Factor::Identity(_) => x.clone(),
            Factor::Dense(m) => m.tr_mul(x),
        }
    }
}

/// `core ×_0 F0 ×_1 F1 ...`.
#[derive(Clone, Debug, PartialEq)]
pub struct TuckerRep {
    pub core: Tensor,
    pub factors: Vec<Factor>,
}

impl TuckerRep {
    pub fn new(core: Tensor, factors: Vec<Factor>) -> Result<Self> {
        if core.order() != factors.len() {
            return Err(Error::ShapeMismatch(format!(
                "order-{} core with {} factors",
                core.order(),
                factors.len()
            )));
        }
        for (k, f) in factors.iter().enumerate() {
            if f.rank() != core.dims()[k] {
                return Err(Error::ShapeMismatch(format!(
                    "mode {} factor has rank {} but core extent {}",
                    k,
                    f.rank(),
                    core.dims()[k]
                )));
            }
        }
        Ok(Self { core, factors })
    }

    /// Extents of the represented tensor.
    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(Factor::extent).collect()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.core.dims().to_vec()
    }

    pub fn reconstruct(&self) -> Result<Tensor> {
        let mut t = self.core.clone();
        for (k, f) in self.factors.iter().enumerate() {
            if let Factor::Dense(m) = f {
                t = t.mode_multiply(k, m)?;
            }
        }
        Ok(t)
    }
}

/// Projects `t` onto the given factors: `core = t ×_k F_kᵀ` on every dense mode.
pub fn project(t: &Tensor, factors: Vec<Factor>) -> Result<TuckerRep> {
    if factors.len() != t.order() {
        return Err(Error::ShapeMismatch(format!(
            "{} factors for an order-{} tensor",
            factors.len(),
            t.order()
        )));
    }
    let mut core = t.clone();
    for (k, f) in factors.iter().enumerate() {
        if f.extent() != t.dims()[k] {
            return Err(Error::ShapeMismatch(format!(
                "mode {} factor has {} rows, tensor extent is {}",
                k,
                f.extent(),
                t.dims()[k]
            )));
        }
        if let Factor::Dense(m) = f {
            core = core.mode_multiply_transpose(k, m)?;
        }
    }
    TuckerRep::new(core, factors)
}

fn check_rank(rank: usize, extent: usize) -> Result<()> {
    if rank == 0 || rank > extent {
        return Err(Error::RankOutOfRange { rank, max: extent });
    }
    Ok(())
}

/// Leading `r` left singular vectors of the mode-`mode` unfolding.
pub fn mode_basis(t: &Tensor, mode: usize, r: usize) -> Result<Matrix> {
    let unf = t.unfold(mode)?;
    check_rank(r, t.dims()[mode])?;
    let r_avail = unf.nrows().min(unf.ncols());
    if r > r_avail {
        // more columns requested than the unfolding has; pad with an
        // orthonormal completion taken from the identity
        let (u, _) = left_singular_vectors(&unf, r_avail)?;
        return Ok(complete_basis(&u, r));
    }
    Ok(left_singular_vectors(&unf, r)?.0)
}

/// Extends orthonormal columns `u` to `r` columns by Gram–Schmidt against the
/// standard basis.
fn complete_basis(u: &Matrix, r: usize) -> Matrix {
    let n = u.nrows();
    let mut cols: Vec<nalgebra::DVector<f64>> = u.column_iter().map(|c| c.into_owned()).collect();
    let mut e = 0;
    while cols.len() < r && e < n {
        let mut v = nalgebra::DVector::zeros(n);
        v[e] = 1.0;
        for _ in 0..2 {
            for c in &cols {
                let d = c.dot(&v);
                v -= c * d;
            }
        }
        let nv = v.norm();
        if nv > 1e-8 {
            cols.push(v / nv);
        }
        e += 1;
    }
    Matrix::from_columns(&cols)
}

/// Singular values of every mode unfolding.
pub fn mode_singular_values(t: &Tensor) -> Result<Vec<Vec<f64>>> {
    (0..t.order()).map(|k| singular_values(&t.unfold(k)?)).collect()
}

/// Truncated higher-order SVD with per-mode ranks.
pub fn hosvd(t: &Tensor, ranks: &[usize]) -> Result<TuckerRep> {
    if ranks.len() != t.order() {
        return Err(Error::ShapeMismatch(format!(
            "{} ranks for an order-{} tensor",
            ranks.len(),
            t.order()
        )));
    }
    let mut factors = Vec::with_capacity(ranks.len());
    for (k, &r) in ranks.iter().enumerate() {
        factors.push(Factor::Dense(mode_basis(t, k, r)?));
    }
    project(t, factors)
}

/// How a mode is treated by [`tucker_partial`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeSpec {
    /// Compress to this rank with the leading left singular vectors.
    Rank(usize),
    /// Leave the mode untouched.
    Identity,
    /// Reuse the factor of the given mode (which must be `Rank`).
    SharedWith(usize),
}

/// Where a shared factor comes from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SharedSource {
    /// Left singular vectors of the designated (`Rank`) mode's unfolding.
    #[default]
    Designated,
    /// Left singular vectors of the concatenation of all sharing unfoldings.
    Concatenated,
}

/// Tucker compression where each mode is compressed, skipped or tied to another mode.
pub fn tucker_partial(t: &Tensor, spec: &[ModeSpec], shared: SharedSource) -> Result<TuckerRep> {
    if spec.len() != t.order() {
        return Err(Error::ShapeMismatch(format!(
            "{} mode specs for an order-{} tensor",
            spec.len(),
            t.order()
        )));
    }
    let dims = t.dims();
    for (k, s) in spec.iter().enumerate() {
        if let ModeSpec::SharedWith(j) = *s {
            if j >= spec.len() || !matches!(spec[j], ModeSpec::Rank(_)) {
                return Err(Error::InvalidArgument(format!(
                    "mode {k} shares with mode {j}, which is not a compressed mode"
                )));
            }
            if dims[j] != dims[k] {
                return Err(Error::ShapeMismatch(format!(
                    "shared modes {j} and {k} have extents {} and {}",
                    dims[j], dims[k]
                )));
            }
        }
    }
    let mut bases: Vec<Option<Matrix>> = vec![None; spec.len()];
    for (k, s) in spec.iter().enumerate() {
        if let ModeSpec::Rank(r) = *s {
            check_rank(r, dims[k])?;
            let partners: Vec<usize> = spec
                .iter()
                .enumerate()
                .filter(|(_, s)| **s == ModeSpec::SharedWith(k))
                .map(|(i, _)| i)
                .collect();
            let basis = if shared == SharedSource::Concatenated && !partners.is_empty() {
                let mut blocks = vec![t.unfold(k)?];
                for &i in &partners {
                    blocks.push(t.unfold(i)?);
                }
                let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
                let mut cat = Matrix::zeros(dims[k], cols);
                let mut off = 0;
                for b in &blocks {
                    cat.view_mut((0, off), (b.nrows(), b.ncols())).copy_from(b);
                    off += b.ncols();
                }
                left_singular_vectors(&cat, r)?.0
            } else {
                mode_basis(t, k, r)?
            };
            bases[k] = Some(basis);
        }
    }
    let factors = spec
        .iter()
        .enumerate()
        .map(|(k, s)| match *s {
            ModeSpec::Identity => Factor::Identity(dims[k]),
            ModeSpec::Rank(_) => Factor::Dense(bases[k].clone().expect("computed above")),
            ModeSpec::SharedWith(j) => Factor::Dense(bases[j].clone().expect("computed above")),
        })
        .collect();
    project(t, factors)
}

/// Smallest rank whose discarded squared spectrum stays within `budget`.
pub fn rank_for_budget(singular_values: &[f64], budget: f64) -> usize {
    let mut tail: f64 = 0.0;
    let mut r = singular_values.len();
    for s in singular_values.iter().rev() {
        if tail + s * s > budget || r == 1 {
            break;
        }
        tail += s * s;
        r -= 1;
    }
    r.max(1)
}
