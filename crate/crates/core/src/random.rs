//! Seeded Gaussian generation.
//!
//! All randomness in the crate comes from a ChaCha8 stream seeded from a
//! single `u64` (`ChaCha8Rng::seed_from_u64`), with standard normal samples
//! drawn by the ziggurat method of `rand_distr::StandardNormal`. Matrices are
//! filled in column-major order, so a seed fixes every value bit-for-bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::tensor::Matrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `rows x cols` matrix of independent standard normal entries.
pub fn gaussian_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    Matrix::from_vec(rows, cols, data)
}

pub fn gaussian_vec<R: Rng>(len: usize, rng: &mut R) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}
