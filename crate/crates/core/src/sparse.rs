//! Coordinate-format sparse matrices.

use crate::error::{Error, Result};
use crate::tensor::Matrix;

/// Triplet storage; duplicate coordinates are summed on conversion.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CooMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl CooMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: Vec::new() }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        if i >= self.rows || j >= self.cols {
            return Err(Error::ShapeMismatch(format!(
                "entry ({i}, {j}) outside a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        self.entries.push((i, j, v));
        Ok(())
    }

    pub fn from_dense(a: &Matrix) -> Self {
        let mut out = Self::new(a.nrows(), a.ncols());
        for j in 0..a.ncols() {
            for i in 0..a.nrows() {
                let v = a[(i, j)];
                if v != 0.0 {
                    out.entries.push((i, j, v));
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> Matrix {
        let mut a = Matrix::zeros(self.rows, self.cols);
        for &(i, j, v) in &self.entries {
            a[(i, j)] += v;
        }
        a
    }

    pub fn nnz(&self) -> usize {
        self.entries.iter().filter(|e| e.2 != 0.0).count()
    }
}
