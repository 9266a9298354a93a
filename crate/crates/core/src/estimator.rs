//! Ridgeless least squares: the min-norm solution `X^+ y` and gradient
//! descent from zero on `||X b - y||^2`.

use serde::{Deserialize, Serialize};

use crate::linalg::{self, SvdFactors};
use crate::{Error, Matrix, Result, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `n <= d`: the fit interpolates. `n = d` lands here.
    Overparameterized,
    /// `n > d`: unique least-squares minimizer.
    Underparameterized,
}

impl Regime {
    pub fn of(n: usize, d: usize) -> Self {
        if n <= d {
            Self::Overparameterized
        } else {
            Self::Underparameterized
        }
    }
}

#[derive(Debug, Clone)]
pub struct Estimate {
    pub beta_hat: Vector,
    pub regime: Regime,
    pub sigma_min: f64,
    /// `Tr((X X^T)^{-1})`, present exactly when the regime is overparameterized.
    pub trace_inv_gram: Option<f64>,
    /// `||X beta_hat - y||`.
    pub train_residual: f64,
}

impl Estimate {
    fn from_factors(factors: &SvdFactors, x: &Matrix, y: &Vector, beta_hat: Vector) -> Result<Self> {
        let regime = Regime::of(x.nrows(), x.ncols());
        let trace_inv_gram = match regime {
            Regime::Overparameterized => Some(factors.trace_inv_gram()?),
            Regime::Underparameterized => None,
        };
        let train_residual = (x * &beta_hat - y).norm();
        Ok(Self {
            beta_hat,
            regime,
            sigma_min: factors.min_singular_value(),
            trace_inv_gram,
            train_residual,
        })
    }
}

fn check_dims(x: &Matrix, y: &Vector) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            what: "y length vs rows of X",
            expected: x.nrows(),
            got: y.len(),
        });
    }
    Ok(())
}

/// `beta_hat = X^+ y` with conditioning diagnostics.
///
/// Fails with [`Error::RankDeficient`] when an overparameterized `X` has lost
/// row rank, since the Gram trace is then undefined.
pub fn min_norm_fit(x: &Matrix, y: &Vector) -> Result<Estimate> {
    check_dims(x, y)?;
    let factors = linalg::svd(x)?;
    min_norm_fit_with(&factors, x, y)
}

/// [`min_norm_fit`] reusing an existing factorization of `x`.
pub fn min_norm_fit_with(factors: &SvdFactors, x: &Matrix, y: &Vector) -> Result<Estimate> {
    check_dims(x, y)?;
    let beta_hat = factors.pinv_apply(y)?;
    Estimate::from_factors(factors, x, y, beta_hat)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StepSize {
    /// `0.9 / s_1^2`.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GdConfig {
    pub max_steps: usize,
    pub step_size: StepSize,
    /// Stop once `||grad|| <= tolerance`.
    pub tolerance: f64,
}

impl Default for GdConfig {
    fn default() -> Self {
        Self {
            max_steps: 200_000,
            step_size: StepSize::Auto,
            tolerance: 1e-12,
        }
    }
}

pub fn gd_fit(x: &Matrix, y: &Vector, cfg: &GdConfig) -> Result<Estimate> {
    gd_fit_observed(x, y, cfg, |_, _| {})
}

/// Gradient descent from `beta = 0` with update `beta -= eta * 2 X^T (X beta - y)`.
///
/// `observe(t, beta_t)` sees every iterate, starting with `t = 0`. Running out
/// of steps is an error carrying the final gradient norm; a non-converged
/// iterate is never returned as an estimate.
pub fn gd_fit_observed<F>(x: &Matrix, y: &Vector, cfg: &GdConfig, mut observe: F) -> Result<Estimate>
where
    F: FnMut(usize, &Vector),
{
    check_dims(x, y)?;
    if cfg.max_steps == 0 {
        return Err(Error::InvalidConfig("max_steps must be at least 1".into()));
    }
    let factors = linalg::svd(x)?;
    let s1 = factors.largest_singular_value();
    let limit = 1.0 / (s1 * s1);
    let step = match cfg.step_size {
        StepSize::Auto => 0.9 * limit,
        StepSize::Fixed(step) => {
            if !(step > 0.0 && step < limit) {
                return Err(Error::InvalidStepSize { step, limit });
            }
            step
        }
    };

    let mut beta = Vector::zeros(x.ncols());
    let mut grad_norm = f64::INFINITY;
    for t in 0..=cfg.max_steps {
        observe(t, &beta);
        let residual = x * &beta - y;
        let grad = x.tr_mul(&residual) * 2.0;
        grad_norm = grad.norm();
        if grad_norm <= cfg.tolerance {
            return Estimate::from_factors(&factors, x, y, beta);
        }
        if t == cfg.max_steps {
            break;
        }
        beta.axpy(-step, &grad, 1.0);
    }
    Err(Error::NotConverged {
        steps: cfg.max_steps,
        grad_norm,
    })
}
