//! Dense real tensors with mode unfoldings and mode products.
//!
//! Storage is a flat `Vec<f64>` in first-index-fastest order (the natural
//! generalization of column-major). Every unfolding derives its column order
//! from that linearization: the mode-`k` unfolding of a tensor with extents
//! `(d0, .., dN-1)` has `dk` rows, and column `c` enumerates the remaining
//! indices with the lowest-numbered mode varying fastest. For an `m x p x n`
//! tensor this gives
//!
//! ```text
//! X(0) = [X[:,:,0], X[:,:,1], ...]               (m x pn)
//! X(1) = [X[:,:,0]^T, X[:,:,1]^T, ...]           (p x mn)
//! X(2) = [sq(X[:,0,:])^T, sq(X[:,1,:])^T, ...]   (n x mp)
//! ```
//!
//! Modes are 0-based in the API; documentation and file formats that speak of
//! "mode 1..N" refer to `mode = 0..N-1` here.

use nalgebra::{DMatrix, DMatrixView, DMatrixViewMut};

use crate::error::{shape_err, Error, Result};

/// Dense real matrix (column-major).
pub type Matrix = DMatrix<f64>;

/// Dense tensor of any order `>= 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(dims: &[usize]) -> Self {
        assert!(!dims.is_empty(), "tensor order must be at least 1");
        let len = dims.iter().product();
        Self {
            dims: dims.to_vec(),
            data: vec![0.0; len],
        }
    }

    pub fn from_vec(dims: &[usize], data: Vec<f64>) -> Result<Self> {
        if dims.is_empty() {
            return shape_err("tensor order must be at least 1");
        }
        let len: usize = dims.iter().product();
        if len != data.len() {
            return shape_err(format!(
                "extents {:?} need {} values, got {}",
                dims,
                len,
                data.len()
            ));
        }
        Ok(Self {
            dims: dims.to_vec(),
            data,
        })
    }

    /// Builds a tensor by evaluating `f` at every multi-index.
    pub fn from_fn(dims: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut t = Self::zeros(dims);
        let mut idx = vec![0usize; dims.len()];
        for v in t.data.iter_mut() {
            *v = f(&idx);
            for (i, d) in idx.iter_mut().zip(dims) {
                *i += 1;
                if *i < *d {
                    break;
                }
                *i = 0;
            }
        }
        t
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn linear_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        let mut lin = 0;
        let mut stride = 1;
        for (i, d) in idx.iter().zip(&self.dims) {
            debug_assert!(i < d);
            lin += i * stride;
            stride *= d;
        }
        lin
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.linear_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: f64) {
        let lin = self.linear_index(idx);
        self.data[lin] = value;
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `‖self - other‖_F`.
    pub fn distance(&self, other: &Tensor) -> Result<f64> {
        if self.dims != other.dims {
            return shape_err(format!("{:?} vs {:?}", self.dims, other.dims));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    pub fn scale(&self, alpha: f64) -> Tensor {
        Tensor {
            dims: self.dims.clone(),
            data: self.data.iter().map(|v| alpha * v).collect(),
        }
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        if self.dims != other.dims {
            return shape_err(format!("{:?} vs {:?}", self.dims, other.dims));
        }
        Ok(Tensor {
            dims: self.dims.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.order() {
            return Err(Error::ModeOutOfRange {
                mode,
                order: self.order(),
            });
        }
        Ok(())
    }

    /// (product of extents before `mode`, extent of `mode`, product after).
    fn split(&self, mode: usize) -> (usize, usize, usize) {
        let left = self.dims[..mode].iter().product();
        let right = self.dims[mode + 1..].iter().product();
        (left, self.dims[mode], right)
    }

    /// Mode-`mode` unfolding.
    pub fn unfold(&self, mode: usize) -> Result<Matrix> {
        self.check_mode(mode)?;
        let (left, dim, right) = self.split(mode);
        if left == 1 {
            return Ok(Matrix::from_column_slice(dim, right, &self.data));
        }
        let mut out = Matrix::zeros(dim, left * right);
        for rt in 0..right {
            for j in 0..dim {
                let base = left * (j + dim * rt);
                for l in 0..left {
                    out[(j, l + left * rt)] = self.data[base + l];
                }
            }
        }
        Ok(out)
    }

    /// Inverse of [`Tensor::unfold`].
    pub fn fold(m: &Matrix, mode: usize, dims: &[usize]) -> Result<Tensor> {
        if mode >= dims.len() {
            return Err(Error::ModeOutOfRange {
                mode,
                order: dims.len(),
            });
        }
        let total: usize = dims.iter().product();
        let dim = dims[mode];
        if m.nrows() != dim || m.nrows() * m.ncols() != total {
            return shape_err(format!(
                "cannot fold a {}x{} matrix along mode {} into {:?}",
                m.nrows(),
                m.ncols(),
                mode,
                dims
            ));
        }
        let left: usize = dims[..mode].iter().product();
        let right: usize = dims[mode + 1..].iter().product();
        let mut data = vec![0.0; total];
        for rt in 0..right {
            for j in 0..dim {
                let base = left * (j + dim * rt);
                for l in 0..left {
                    data[base + l] = m[(j, l + left * rt)];
                }
            }
        }
        Tensor::from_vec(dims, data)
    }

    /// `self ×_mode u`, i.e. the tensor whose mode-`mode` unfolding is `u · X(mode)`.
    pub fn mode_multiply(&self, mode: usize, u: &Matrix) -> Result<Tensor> {
        self.check_mode(mode)?;
        let (left, dim, right) = self.split(mode);
        if u.ncols() != dim {
            return shape_err(format!(
                "mode-{} product needs {} columns, factor has {}",
                mode,
                dim,
                u.ncols()
            ));
        }
        let rows = u.nrows();
        let mut dims = self.dims.clone();
        dims[mode] = rows;
        let mut data = vec![0.0; left * rows * right];
        if left == 1 {
            let x = DMatrixView::from_slice(&self.data, dim, right);
            let mut out = DMatrixViewMut::from_slice(&mut data, rows, right);
            out.gemm(1.0, u, &x, 0.0);
        } else {
            let ut = u.transpose();
            for rt in 0..right {
                let x = DMatrixView::from_slice(&self.data[rt * left * dim..(rt + 1) * left * dim], left, dim);
                let mut out =
                    DMatrixViewMut::from_slice(&mut data[rt * left * rows..(rt + 1) * left * rows], left, rows);
                out.gemm(1.0, &x, &ut, 0.0);
            }
        }
        Tensor::from_vec(&dims, data)
    }

    /// `self ×_mode uᵀ`, the projection used to form Tucker cores.
    pub fn mode_multiply_transpose(&self, mode: usize, u: &Matrix) -> Result<Tensor> {
        self.mode_multiply(mode, &u.transpose())
    }

    /// `m x n` matrix to `m x 1 x n` tensor.
    pub fn twist(m: &Matrix) -> Tensor {
        Tensor {
            dims: vec![m.nrows(), 1, m.ncols()],
            data: m.as_slice().to_vec(),
        }
    }

    /// `m x 1 x n` tensor to `m x n` matrix.
    pub fn squeeze(&self) -> Result<Matrix> {
        if self.order() != 3 || self.dims[1] != 1 {
            return shape_err(format!(
                "squeeze needs an order-3 tensor with singleton second mode, got {:?}",
                self.dims
            ));
        }
        Ok(Matrix::from_column_slice(self.dims[0], self.dims[2], &self.data))
    }

    /// Number of lateral slices: product of all extents except the first and last.
    pub fn lateral_count(&self) -> usize {
        if self.order() < 2 {
            return 1;
        }
        self.dims[1..self.order() - 1].iter().product()
    }

    /// `sq(X[:, k, :])` where `k` linearizes the middle modes (first middle mode fastest).
    pub fn lateral_slice(&self, k: usize) -> Matrix {
        assert!(self.order() >= 2, "lateral slices need order >= 2");
        let m = self.dims[0];
        let n = self.dims[self.order() - 1];
        let p = self.lateral_count();
        assert!(k < p, "lateral slice {k} out of range {p}");
        Matrix::from_fn(m, n, |i, j| self.data[i + m * (k + p * j)])
    }

    /// Stacks `m x n` matrices as the lateral slices of a tensor with the given
    /// middle extents (`m x mids.. x n`).
    pub fn from_lateral_slices(slices: &[Matrix], middle_dims: &[usize]) -> Result<Tensor> {
        let p: usize = middle_dims.iter().product();
        if slices.len() != p || p == 0 {
            return shape_err(format!(
                "{} slices for middle extents {:?}",
                slices.len(),
                middle_dims
            ));
        }
        let (m, n) = slices[0].shape();
        if slices.iter().any(|s| s.shape() != (m, n)) {
            return shape_err("lateral slices must share extents");
        }
        let mut dims = Vec::with_capacity(middle_dims.len() + 2);
        dims.push(m);
        dims.extend_from_slice(middle_dims);
        dims.push(n);
        let mut data = vec![0.0; m * p * n];
        for (k, s) in slices.iter().enumerate() {
            for j in 0..n {
                for i in 0..m {
                    data[i + m * (k + p * j)] = s[(i, j)];
                }
            }
        }
        Tensor::from_vec(&dims, data)
    }

    /// Number of entries that are not exactly zero.
    pub fn nnz(&self) -> usize {
        self.data.iter().filter(|v| **v != 0.0).count()
    }
}

/// `sqrt(sum of squares)` of a tensor.
pub fn frobenius_norm(t: &Tensor) -> f64 {
    t.frobenius_norm()
}
