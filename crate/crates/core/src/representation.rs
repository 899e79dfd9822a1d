//! A compressed matrix of any supported kind.

use crate::decompositions::TuckerRep;
use crate::error::{shape_err, Result};
use crate::multilevel::MlKronSumRep;
use crate::pattern::{check_dense_guard, BlockMatrix, BlockPattern};
use crate::psd::{SpdRep, SpsdRep};
use crate::reconstruction::{blr_from_tucker, BlockLowRankRep, KronSumRep};
use crate::tensor::Matrix;

#[derive(Clone, Debug, PartialEq)]
pub enum Representation {
    KronSum(KronSumRep),
    Blr(BlockLowRankRep),
    /// Tucker factors of the weighted tensor, mapped back on demand.
    Tucker { pattern: BlockPattern, tucker: TuckerRep },
    Spsd(SpsdRep),
    Spd(SpdRep),
    Multilevel(MlKronSumRep),
}

impl Representation {
    /// Container tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Representation::KronSum(_) => "kron_sum",
            Representation::Blr(_) => "blr",
            Representation::Tucker { .. } => "tucker_raw",
            Representation::Spsd(_) => "spsd",
            Representation::Spd(_) => "spd",
            Representation::Multilevel(_) => "multilevel",
        }
    }

    pub fn rows(&self) -> usize {
        match self {
            Representation::KronSum(r) => r.rows(),
            Representation::Blr(r) => r.rows(),
            Representation::Tucker { pattern, .. } => pattern.rows(),
            Representation::Spsd(r) => r.pattern.rows(),
            Representation::Spd(r) => r.block_rows * r.n(),
            Representation::Multilevel(r) => r.pattern.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Representation::KronSum(r) => r.cols(),
            Representation::Blr(r) => r.cols(),
            Representation::Tucker { pattern, .. } => pattern.cols(),
            Representation::Spsd(r) => r.pattern.cols(),
            Representation::Spd(r) => r.block_rows * r.n(),
            Representation::Multilevel(r) => r.pattern.cols(),
        }
    }

    pub fn block_dims(&self) -> (usize, usize) {
        match self {
            Representation::KronSum(r) => r.pattern.block_dims(),
            Representation::Blr(r) => r.pattern.block_dims(),
            Representation::Tucker { pattern, .. } => pattern.block_dims(),
            Representation::Spsd(r) => r.pattern.block_dims(),
            Representation::Spd(r) => (r.n(), r.n()),
            Representation::Multilevel(r) => r.pattern.block_dims(),
        }
    }

    /// Number of Kronecker terms, or the middle-block count for factored kinds.
    pub fn terms(&self) -> usize {
        match self {
            Representation::KronSum(r) => r.terms.len(),
            Representation::Blr(r) => r.middle.len(),
            Representation::Tucker { tucker, .. } => tucker.core.len(),
            Representation::Spsd(r) => r.blocks.len(),
            Representation::Spd(r) => 1 + r.remainder.as_ref().map_or(0, |s| s.blocks.len()),
            Representation::Multilevel(r) => r.terms.len(),
        }
    }

    /// Stored values.
    pub fn storage(&self) -> usize {
        match self {
            Representation::KronSum(r) => r.storage(),
            Representation::Blr(r) => r.storage(),
            Representation::Tucker { tucker, .. } => {
                tucker.core.len()
                    + tucker.factors.iter().filter(|f| !f.is_identity()).map(|f| f.extent() * f.rank()).sum::<usize>()
            }
            Representation::Spsd(r) => r.storage(),
            Representation::Spd(r) => r.storage(),
            Representation::Multilevel(r) => r.storage(),
        }
    }

    pub fn to_block_matrix(&self) -> Result<BlockMatrix> {
        match self {
            Representation::KronSum(r) => r.to_block_matrix(),
            Representation::Blr(r) => r.to_block_matrix(),
            Representation::Tucker { pattern, tucker } => blr_from_tucker(tucker, pattern)?.to_block_matrix(),
            Representation::Spsd(r) => r.to_block_matrix(),
            Representation::Spd(r) => r.to_block_matrix(),
            Representation::Multilevel(r) => r.to_block_matrix(),
        }
    }

    pub fn densify(&self) -> Result<Matrix> {
        check_dense_guard(self.rows(), self.cols())?;
        self.to_block_matrix()?.to_dense()
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols() {
            return shape_err(format!("vector of length {} for {} columns", x.len(), self.cols()));
        }
        match self {
            Representation::KronSum(r) => r.matvec(x),
            Representation::Blr(r) => r.matvec(x),
            Representation::Tucker { pattern, tucker } => blr_from_tucker(tucker, pattern)?.matvec(x),
            Representation::Spsd(r) => r.matvec(x),
            Representation::Spd(r) => r.matvec(x),
            Representation::Multilevel(r) => r.to_block_matrix()?.matvec(x),
        }
    }

    /// Trace, from the small factors where the kind allows it.
    pub fn trace(&self) -> Result<f64> {
        match self {
            Representation::Spsd(r) => Ok(r.trace()),
            Representation::Spd(r) => Ok(spd_trace(r)),
            _ => Ok(self.to_block_matrix()?.trace()),
        }
    }
}

/// `ℓ trace(T₀)` plus the whitened remainder traces `trace(B_k (LU)ᵀ(LU))`.
fn spd_trace(r: &SpdRep) -> f64 {
    let l = &r.anchor;
    let mut t = r.block_rows as f64 * (l * l.transpose()).trace();
    if let Some(rem) = &r.remainder {
        let lu = l * &rem.basis;
        let g = lu.transpose() * lu;
        for (k, b) in rem.blocks.iter().enumerate() {
            let diag = rem.pattern.positions(k).iter().filter(|(i, j)| i == j).count();
            t += diag as f64 * (b * &g).trace();
        }
    }
    t
}

impl From<KronSumRep> for Representation {
    fn from(r: KronSumRep) -> Self {
        Representation::KronSum(r)
    }
}

impl From<BlockLowRankRep> for Representation {
    fn from(r: BlockLowRankRep) -> Self {
        Representation::Blr(r)
    }
}

impl From<SpsdRep> for Representation {
    fn from(r: SpsdRep) -> Self {
        Representation::Spsd(r)
    }
}

impl From<SpdRep> for Representation {
    fn from(r: SpdRep) -> Self {
        Representation::Spd(r)
    }
}

impl From<MlKronSumRep> for Representation {
    fn from(r: MlKronSumRep) -> Self {
        Representation::Multilevel(r)
    }
}
