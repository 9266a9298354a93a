//! Conditioning of the data matrix near and far from `n = d`.
//!
//! Near criticality: start from `X = [d I_{d-1} | 0]`, whose nonzero singular
//! values all equal `d`, and append one Gaussian row `(g1, g2)`. The test
//! vector `v = (g1, -d)` gives `||v^T X_{n+1}|| = d |g2|`, so
//! `sigma_min(X_{n+1}) <= d |g2| / sqrt(||g1||^2 + d^2)`, which is O(1).
//!
//! Far from criticality: for Gaussian `G` with `n = d/10`, `sigma_min(G)^2 / d`
//! stays bounded away from zero.

use serde::Serialize;

use super::CONDITIONING_STREAM;
use crate::linalg;
use crate::randgen::{derive_seed, sample_gaussian_matrix, sample_gaussian_vector, RngState};
use crate::risk::median;
use crate::{Error, Matrix, Result};

pub const FAR_TRIALS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditioningReport {
    pub d: usize,
    pub seed: u64,
    /// Smallest nonzero singular value of `[d I_{d-1} | 0]`.
    pub pre_sigma_min: f64,
    /// Largest `|s_i - d|` over the nonzero singular values.
    pub pre_max_deviation: f64,
    pub g1_norm_sq: f64,
    pub g2: f64,
    pub post_sigma_min: f64,
    /// `d |g2| / sqrt(||g1||^2 + d^2)`.
    pub post_bound: f64,
    pub bound_holds: bool,
    /// Rows of the far-from-critical Gaussian matrix, `max(1, d / 10)`.
    pub far_n: usize,
    /// Median over [`FAR_TRIALS`] draws of `sigma_min(G)^2 / d`.
    pub far_ratio_median: f64,
}

/// `[scale * I_{d-1} | 0]`, a `(d-1) x d` matrix.
pub fn scaled_axis_matrix(d: usize, scale: f64) -> Matrix {
    let mut x = Matrix::zeros(d - 1, d);
    for i in 0..d - 1 {
        x[(i, i)] = scale;
    }
    x
}

pub fn run_conditioning_demo(d: usize, seed: u64) -> Result<ConditioningReport> {
    if d < 3 {
        return Err(Error::InvalidConfig(format!("conditioning demo needs d >= 3, got {d}")));
    }
    let df = d as f64;
    let pre = scaled_axis_matrix(d, df);
    let pre_factors = linalg::svd(&pre)?;
    let cutoff = pre_factors.cutoff();
    let nonzero: Vec<f64> = pre_factors.s.iter().copied().filter(|&s| s > cutoff).collect();
    let pre_sigma_min = nonzero.iter().copied().fold(f64::INFINITY, f64::min);
    let pre_max_deviation = nonzero.iter().map(|s| (s - df).abs()).fold(0.0, f64::max);

    let mut rng = RngState::new(derive_seed(seed, CONDITIONING_STREAM, 0));
    let row = sample_gaussian_vector(&mut rng, d);
    let g1_norm_sq = row.rows(0, d - 1).norm_squared();
    let g2 = row[d - 1];
    let mut post = pre.insert_row(d - 1, 0.0);
    post.row_mut(d - 1).copy_from(&row.transpose());
    let post_sigma_min = linalg::min_singular_value(&post)?;
    let post_bound = df * g2.abs() / (g1_norm_sq + df * df).sqrt();

    let far_n = (d / 10).max(1);
    let ratios: Vec<f64> = (0..FAR_TRIALS)
        .map(|t| {
            let mut rng = RngState::new(derive_seed(seed, CONDITIONING_STREAM, 1 + t as u64));
            let g = sample_gaussian_matrix(&mut rng, far_n, d);
            linalg::min_singular_value(&g).map(|s| s * s / df)
        })
        .collect::<Result<_>>()?;

    Ok(ConditioningReport {
        d,
        seed,
        pre_sigma_min,
        pre_max_deviation,
        g1_norm_sq,
        g2,
        post_sigma_min,
        post_bound,
        bound_holds: post_sigma_min <= post_bound,
        far_n,
        far_ratio_median: median(&ratios),
    })
}
