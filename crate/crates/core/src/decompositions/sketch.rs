//! Randomized mode bases: Gaussian sketches of the other modes followed by an
//! SVD of the sketched unfolding.

use super::linalg::left_singular_vectors;
use crate::error::{Error, Result};
use crate::random::{gaussian_matrix, rng};
use crate::tensor::{Matrix, Tensor};

/// Sketch sizes per mode (`None` leaves that mode unsketched) and the seed.
///
/// Sketch matrices are drawn from one ChaCha8 stream in increasing mode
/// order, each filled column-major with ziggurat standard normals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SketchConfig {
    pub seed: u64,
    pub sizes: Vec<Option<usize>>,
}

impl SketchConfig {
    /// Sketches every mode except `target` down to `min(size, extent)`.
    pub fn uniform(dims: &[usize], target: usize, size: usize, seed: u64) -> Self {
        let sizes = dims
            .iter()
            .enumerate()
            .map(|(k, &d)| if k == target { None } else { Some(size.min(d)) })
            .collect();
        Self { seed, sizes }
    }

    /// No sketching at all; the basis is then the exact leading subspace.
    pub fn identity(order: usize, seed: u64) -> Self {
        Self { seed, sizes: vec![None; order] }
    }
}

/// Top-`r` left singular vectors of the mode-`mode` unfolding of
/// `t ×_k Ω_k` (over every sketched mode `k ≠ mode`).
pub fn randomized_mode_basis(t: &Tensor, mode: usize, r: usize, cfg: &SketchConfig) -> Result<Matrix> {
    let dims = t.dims().to_vec();
    if mode >= dims.len() {
        return Err(Error::ModeOutOfRange { mode, order: dims.len() });
    }
    if cfg.sizes.len() != dims.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} sketch sizes for an order-{} tensor",
            cfg.sizes.len(),
            dims.len()
        )));
    }
    let mut g = rng(cfg.seed);
    let mut y = t.clone();
    for (k, s) in cfg.sizes.iter().enumerate() {
        let Some(s) = *s else { continue };
        if k == mode {
            continue;
        }
        if s == 0 || s > dims[k] {
            return Err(Error::InvalidArgument(format!(
                "sketch size {s} for mode {k} must be in 1..={}",
                dims[k]
            )));
        }
        let omega = gaussian_matrix(s, dims[k], &mut g);
        y = y.mode_multiply(k, &omega)?;
    }
    let unf = y.unfold(mode)?;
    let max = unf.nrows().min(unf.ncols());
    if r == 0 || r > max {
        return Err(Error::RankOutOfRange { rank: r, max });
    }
    Ok(left_singular_vectors(&unf, r)?.0)
}
