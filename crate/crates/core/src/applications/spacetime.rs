//! Stationary space-time covariance matrices as symmetric block-Toeplitz patterns.

use crate::error::{Error, Result};
use crate::pattern::{BlockPattern, StructureClass};
use crate::tensor::Matrix;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum KernelFamily {
    /// `φ(r, τ) = exp(−((r/ℓₛ)² + (τ/ℓₜ)²))`.
    #[default]
    SquaredExponential,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelConfig {
    pub spatial_scale: f64,
    pub temporal_scale: f64,
    pub family: KernelFamily,
    /// Diagonal shift `δ` used when factoring the covariance.
    pub nugget: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self { spatial_scale: 90.0, temporal_scale: 0.5, family: KernelFamily::SquaredExponential, nugget: 1e-8 }
    }
}

impl KernelConfig {
    pub fn new(spatial_scale: f64, temporal_scale: f64) -> Result<Self> {
        if !(spatial_scale > 0.0 && temporal_scale > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "length scales must be positive, got {spatial_scale} and {temporal_scale}"
            )));
        }
        Ok(Self { spatial_scale, temporal_scale, ..Self::default() })
    }

    pub fn eval(&self, r: f64, tau: f64) -> f64 {
        match self.family {
            KernelFamily::SquaredExponential => {
                let a = r / self.spatial_scale;
                let b = tau / self.temporal_scale;
                (-(a * a + b * b)).exp()
            }
        }
    }
}

/// Pattern and classes `[C_k]_{jl} = φ(‖x_j − x_l‖, |t_k − t_0|)` of the
/// `NT x NT` covariance (class `k` is time lag `k`).
pub fn spacetime_build(points: &[Vec<f64>], times: &[f64], kcfg: &KernelConfig) -> Result<(BlockPattern, Vec<Matrix>)> {
    if points.is_empty() || times.is_empty() {
        return Err(Error::InvalidArgument("need at least one point and one time".into()));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::ShapeMismatch("points have different dimensions".into()));
    }
    if times.len() > 2 {
        let step = times[1] - times[0];
        let scale = times.iter().fold(step.abs(), |a, t| a.max(t.abs()));
        for w in times.windows(2) {
            if ((w[1] - w[0]) - step).abs() > 1e-12 * scale {
                return Err(Error::InvalidArgument("times are not equispaced".into()));
            }
        }
    }
    let n = points.len();
    let mut dist = Matrix::zeros(n, n);
    for j in 0..n {
        for l in 0..j {
            let d = points[j].iter().zip(&points[l]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            dist[(j, l)] = d;
            dist[(l, j)] = d;
        }
    }
    let blocks = times.iter().map(|t| {
        let tau = (t - times[0]).abs();
        dist.map(|r| kcfg.eval(r, tau))
    });
    let pattern = BlockPattern::build(StructureClass::Toeplitz { symmetric: true }, times.len(), times.len(), n, n)?;
    Ok((pattern, blocks.collect()))
}

/// Points of a `rows x cols` grid with the given spacing.
pub fn grid_points(rows: usize, cols: usize, spacing: f64) -> Vec<Vec<f64>> {
    (0..rows).flat_map(|i| (0..cols).map(move |j| vec![i as f64 * spacing, j as f64 * spacing])).collect()
}
