//! Compression of block-structured matrices through weighted tensor mappings.
//!
//! A matrix made of repeated blocks is described by a [`pattern::BlockPattern`]
//! (where each distinct block lives and how often) plus the distinct blocks.
//! Stacking the weighted blocks as lateral slices gives a third-order tensor
//! whose Frobenius distance to any approximation equals the matrix-side error,
//! so tensor compressions (Tucker, CP) carry over to Kronecker-sum and
//! block-low-rank matrix approximations with the same error.

pub mod applications;
pub mod cli;
pub mod decompositions;
pub mod error;
pub mod io;
pub mod multilevel;
pub mod pattern;
pub mod psd;
pub mod random;
pub mod sparse;
pub mod reconstruction;
pub mod representation;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::{Matrix, Tensor};

#[cfg(test)]
pub(crate) mod testutil {
    use crate::random::{gaussian_matrix, gaussian_vec, rng};
    use crate::tensor::{Matrix, Tensor};

    pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
        gaussian_matrix(rows, cols, &mut rng(seed))
    }

    pub fn random_tensor(dims: &[usize], seed: u64) -> Tensor {
        let len = dims.iter().product();
        Tensor::from_vec(dims, gaussian_vec(len, &mut rng(seed))).unwrap()
    }
}
