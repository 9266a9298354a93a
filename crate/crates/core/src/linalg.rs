//! Dense kernels built on a thin SVD `X = U diag(s) V^T`.
//!
//! Singular values are treated as zero only when they fall below
//! `max(n, d) * s_1 * eps`. That cutoff detects exact rank loss and nothing
//! more: near `n = d` the spectrum legitimately reaches very small values and
//! truncating them would regularize the estimator.

use faer::Mat;

use crate::{Error, Matrix, Result, Vector};

/// Thin SVD factors with `r = min(n, d)` singular triplets, `s` non-increasing.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: Matrix,
    pub s: Vector,
    pub v: Matrix,
}

pub fn svd(x: &Matrix) -> Result<SvdFactors> {
    let (n, d) = x.shape();
    if n == 0 || d == 0 {
        return Err(Error::EmptyMatrix { rows: n, cols: d });
    }
    let a = Mat::<f64>::from_fn(n, d, |i, j| x[(i, j)]);
    let f = a
        .thin_svd()
        .map_err(|_| Error::SvdNoConvergence { rows: n, cols: d })?;
    let r = n.min(d);
    let (u, s, v) = (f.U(), f.S().column_vector(), f.V());
    Ok(SvdFactors {
        u: Matrix::from_fn(n, r, |i, j| u[(i, j)]),
        s: Vector::from_fn(r, |i, _| s[i]),
        v: Matrix::from_fn(d, r, |i, j| v[(i, j)]),
    })
}

impl SvdFactors {
    pub fn nrows(&self) -> usize {
        self.u.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.v.nrows()
    }

    pub fn largest_singular_value(&self) -> f64 {
        self.s.get(0).copied().unwrap_or(0.0)
    }

    pub fn min_singular_value(&self) -> f64 {
        self.s.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn cutoff(&self) -> f64 {
        self.nrows().max(self.ncols()) as f64 * self.largest_singular_value() * f64::EPSILON
    }

    /// Number of singular values above the cutoff.
    pub fn rank(&self) -> usize {
        let cutoff = self.cutoff();
        self.s.iter().filter(|&&s| s > cutoff).count()
    }

    /// `X^+ y = V diag(1/s) U^T y` over the retained directions.
    pub fn pinv_apply(&self, y: &Vector) -> Result<Vector> {
        check_len("y length vs rows of X", self.nrows(), y.len())?;
        let mut coeffs = self.u.tr_mul(y);
        let cutoff = self.cutoff();
        for (c, &s) in coeffs.iter_mut().zip(self.s.iter()) {
            *c = if s > cutoff { *c / s } else { 0.0 };
        }
        Ok(&self.v * coeffs)
    }

    /// `(X^T)^+ x = U diag(1/s) V^T x`, the least-squares coefficients of `x`
    /// on the rows of `X`.
    pub fn pinv_transpose_apply(&self, x: &Vector) -> Result<Vector> {
        check_len("x length vs columns of X", self.ncols(), x.len())?;
        let mut coeffs = self.v.tr_mul(x);
        let cutoff = self.cutoff();
        for (c, &s) in coeffs.iter_mut().zip(self.s.iter()) {
            *c = if s > cutoff { *c / s } else { 0.0 };
        }
        Ok(&self.u * coeffs)
    }

    pub fn project_rowspace(&self, v: &Vector, complement: bool) -> Result<Vector> {
        check_len("v length vs columns of X", self.ncols(), v.len())?;
        let rank = self.rank();
        let basis = self.v.columns(0, rank);
        let proj = basis * basis.tr_mul(v);
        Ok(if complement { v - proj } else { proj })
    }

    /// `Tr((X X^T)^{-1}) = sum 1/s_i^2`, defined for full-row-rank `X` with `n <= d`.
    pub fn trace_inv_gram(&self) -> Result<f64> {
        if self.nrows() > self.ncols() {
            return Err(Error::NotWide {
                rows: self.nrows(),
                cols: self.ncols(),
            });
        }
        let sigma_min = self.min_singular_value();
        let cutoff = self.cutoff();
        if !(sigma_min > cutoff) {
            return Err(Error::RankDeficient { sigma_min, cutoff });
        }
        Ok(self.s.iter().map(|s| 1.0 / (s * s)).sum())
    }

    /// Pieces of the one-sample trace update for appending `x` as a new row.
    pub fn trace_increment(&self, x: &Vector) -> Result<TraceIncrement> {
        if self.nrows() >= self.ncols() {
            return Err(Error::NotWide {
                rows: self.nrows() + 1,
                cols: self.ncols(),
            });
        }
        let sigma_min = self.min_singular_value();
        let cutoff = self.cutoff();
        if !(sigma_min > cutoff) {
            return Err(Error::RankDeficient { sigma_min, cutoff });
        }
        let coeff_norm_sq = self.pinv_transpose_apply(x)?.norm_squared();
        let perp = self.project_rowspace(x, true)?;
        TraceIncrement::new(coeff_norm_sq, perp.norm_squared(), x, self.ncols())
    }
}

/// Decomposition of `Tr((X_{n+1} X_{n+1}^T)^{-1}) - Tr((X X^T)^{-1})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceIncrement {
    /// `||(X^T)^+ x||^2`.
    pub coeff_norm_sq: f64,
    /// `||Proj_perp(x)||^2`.
    pub perp_norm_sq: f64,
    /// `(1 + coeff_norm_sq) / perp_norm_sq`.
    pub value: f64,
}

impl TraceIncrement {
    fn new(coeff_norm_sq: f64, perp_norm_sq: f64, x: &Vector, d: usize) -> Result<Self> {
        let norm = perp_norm_sq.sqrt();
        let cutoff = d as f64 * f64::EPSILON * x.norm();
        if !(norm > cutoff) {
            return Err(Error::SingularIncrement { norm, cutoff });
        }
        Ok(Self {
            coeff_norm_sq,
            perp_norm_sq,
            value: (1.0 + coeff_norm_sq) / perp_norm_sq,
        })
    }
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { what, expected, got });
    }
    Ok(())
}

/// Applies the Moore–Penrose pseudoinverse: `X^+ y`.
///
/// A matrix with no rows maps everything to the zero vector.
pub fn pinv_apply(x: &Matrix, y: &Vector) -> Result<Vector> {
    check_len("y length vs rows of X", x.nrows(), y.len())?;
    if x.nrows() == 0 {
        return Ok(Vector::zeros(x.ncols()));
    }
    svd(x)?.pinv_apply(y)
}

/// Orthogonal projection of `v` onto the rowspace of `X`, or onto its
/// complement when `complement` is set.
pub fn project_rowspace(x: &Matrix, v: &Vector, complement: bool) -> Result<Vector> {
    check_len("v length vs columns of X", x.ncols(), v.len())?;
    if x.nrows() == 0 {
        return Ok(if complement { v.clone() } else { Vector::zeros(v.len()) });
    }
    svd(x)?.project_rowspace(v, complement)
}

/// `Tr((X X^T)^{-1})` from the singular values. An empty `X` has trace 0.
pub fn trace_inv_gram(x: &Matrix) -> Result<f64> {
    if x.nrows() == 0 {
        return Ok(0.0);
    }
    svd(x)?.trace_inv_gram()
}

/// Exact change in `Tr((X X^T)^{-1})` when `x` is appended as row `n + 1`:
/// `(1 + ||(X^T)^+ x||^2) / ||Proj_perp(x)||^2`.
pub fn trace_increment(x: &Matrix, sample: &Vector) -> Result<f64> {
    check_len("sample length vs columns of X", x.ncols(), sample.len())?;
    if x.nrows() == 0 {
        return Ok(TraceIncrement::new(0.0, sample.norm_squared(), sample, x.ncols())?.value);
    }
    Ok(svd(x)?.trace_increment(sample)?.value)
}

/// Same as [`trace_increment`] for an empty `X`, returning the full breakdown.
pub fn trace_increment_from_empty(sample: &Vector) -> Result<TraceIncrement> {
    TraceIncrement::new(0.0, sample.norm_squared(), sample, sample.len())
}

pub fn min_singular_value(x: &Matrix) -> Result<f64> {
    Ok(svd(x)?.min_singular_value())
}
