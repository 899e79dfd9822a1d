//! Error and storage metrics for compressed representations.

use crate::error::Result;
use crate::pattern::{BlockMatrix, DENSE_GUARD};
use crate::reconstruction::kron_sum::relative_error;
use crate::representation::Representation;

/// Facts about the original matrix kept alongside a compressed representation.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SourceInfo {
    pub rows: usize,
    pub cols: usize,
    pub nnz: usize,
    /// `p m n`: the values needed to store every class block densely.
    pub class_entries: usize,
    pub fro: f64,
    pub trace: f64,
}

impl SourceInfo {
    pub fn from_blocks(a: &BlockMatrix, p: usize) -> Self {
        let (m, n) = a.block_dims();
        Self {
            rows: a.rows(),
            cols: a.cols(),
            nnz: a.nnz(),
            class_entries: p * m * n,
            fro: a.frobenius_norm(),
            trace: a.trace(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metrics {
    pub relerr_fro: Option<f64>,
    pub relerr_trace: Option<f64>,
    pub storage: usize,
    pub storage_ratio: f64,
    pub terms: usize,
}

/// `|trace(C) − trace(Ĉ)| / |trace(C)|`.
pub fn trace_relerr(trace: f64, approx: f64) -> f64 {
    (trace - approx).abs() / trace.abs()
}

/// `(p r² + N r) / (p N²)` for a shared rank-`r` basis.
pub fn spsd_storage_ratio(p: usize, n: usize, r: usize) -> f64 {
    (p * r * r + n * r) as f64 / (p * n * n) as f64
}

/// Metrics of `rep` against `source`.
///
/// Kronecker-sum kinds report stored values over `nnz(A)`, the factored kinds
/// over `p m n`. `relerr_fro` needs the original blocks and is skipped above
/// the dense guard; `relerr_trace` only needs the source trace.
pub fn report_metrics(source: &SourceInfo, rep: &Representation, a: Option<&BlockMatrix>) -> Result<Metrics> {
    let storage = rep.storage();
    let denom = match rep {
        Representation::KronSum(_) | Representation::Multilevel(_) => source.nnz,
        _ => source.class_entries,
    };
    let relerr_fro = match a {
        Some(a) if a.rows().saturating_mul(a.cols()) <= DENSE_GUARD => {
            Some(relative_error(a, &rep.to_block_matrix()?)?)
        }
        _ => None,
    };
    let relerr_trace = if source.trace != 0.0 && rep.rows() == rep.cols() {
        Some(trace_relerr(source.trace, rep.trace()?))
    } else {
        None
    };
    Ok(Metrics {
        relerr_fro,
        relerr_trace,
        storage,
        storage_ratio: if denom == 0 { f64::NAN } else { storage as f64 / denom as f64 },
        terms: rep.terms(),
    })
}
