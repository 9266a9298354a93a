//! Randomized checks of the algebraic identities the experiments rely on.

use serde::Serialize;

use super::VERIFY_STREAM;
use crate::estimator::{gd_fit_observed, min_norm_fit, GdConfig};
use crate::exec::Executor;
use crate::linalg;
use crate::randgen::{derive_seed, sample_gaussian_matrix, sample_gaussian_vector, BetaMode, ModelSpec, RngState};
use crate::risk::monte_carlo_risk_for_beta;
use crate::{Matrix, Result, Vector};

pub const TRACE_IDENTITY_TOL: f64 = 1e-8;
pub const SIGNAL_NOISE_TOL: f64 = 1e-10;
pub const GD_GAP_TOL: f64 = 1e-6;
pub const GD_ROWSPACE_TOL: f64 = 1e-8;
pub const GD_CASES: usize = 100;
const BIAS_TRIALS: usize = 400;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub cases: usize,
    pub passed: usize,
    pub failed: usize,
    /// Worst error in the check's own units (see `tolerance`).
    pub worst_error: f64,
    pub tolerance: f64,
}

impl CheckResult {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            cases: 0,
            passed: 0,
            failed: 0,
            worst_error: 0.0,
            tolerance,
        }
    }

    fn record(&mut self, error: f64, ok: bool) {
        self.cases += 1;
        if ok && error.is_finite() {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
        self.worst_error = if error.is_nan() { f64::NAN } else { self.worst_error.max(error) };
    }

    fn fail(&mut self) {
        self.cases += 1;
        self.failed += 1;
        self.worst_error = f64::INFINITY;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.failed == 0 && c.cases > 0)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn append_row(x: &Matrix, row: &Vector) -> Matrix {
    let n = x.nrows();
    let mut out = x.clone().insert_row(n, 0.0);
    out.row_mut(n).copy_from(&row.transpose());
    out
}

/// Random `(n, d)` with `2 <= n < d <= 40`.
fn small_wide_shape(rng: &mut RngState) -> (usize, usize) {
    let d = 3 + (rng.next_u64() % 38) as usize;
    let n = 2 + (rng.next_u64() % (d as u64 - 2)) as usize;
    (n, d)
}

/// Trace before and after appending a row, against the closed increment.
pub fn check_trace_identity(cases: usize, seed: u64) -> CheckResult {
    let mut check = CheckResult::new("trace-increment", TRACE_IDENTITY_TOL);
    for c in 0..cases {
        let mut rng = RngState::new(derive_seed(seed, VERIFY_STREAM, c as u64));
        let (n, d) = small_wide_shape(&mut rng);
        let x = sample_gaussian_matrix(&mut rng, n, d);
        let row = sample_gaussian_vector(&mut rng, d);
        let outcome = (|| -> Result<f64> {
            let inc = linalg::trace_increment(&x, &row)?;
            let before = linalg::trace_inv_gram(&x)?;
            let after = linalg::trace_inv_gram(&append_row(&x, &row))?;
            Ok(rel_err(after - before, inc))
        })();
        match outcome {
            Ok(e) => check.record(e, e <= TRACE_IDENTITY_TOL),
            Err(_) => check.fail(),
        }
    }
    check
}

/// `X^+ (X beta + eta) = Proj_X(beta) + X^+ eta`.
fn check_signal_noise(cases: usize, seed: u64) -> CheckResult {
    let mut check = CheckResult::new("signal-noise-split", SIGNAL_NOISE_TOL);
    for c in 0..cases {
        let mut rng = RngState::new(derive_seed(seed, VERIFY_STREAM - 1, c as u64));
        let (n, d) = small_wide_shape(&mut rng);
        let x = sample_gaussian_matrix(&mut rng, n, d);
        let beta = sample_gaussian_vector(&mut rng, d);
        let eta = sample_gaussian_vector(&mut rng, n) * 0.1;
        let outcome = (|| -> Result<f64> {
            let f = linalg::svd(&x)?;
            let lhs = f.pinv_apply(&(&x * &beta + &eta))?;
            let rhs = f.project_rowspace(&beta, false)? + f.pinv_apply(&eta)?;
            Ok((lhs.clone() - rhs).norm() / lhs.norm())
        })();
        match outcome {
            Ok(e) => check.record(e, e <= SIGNAL_NOISE_TOL),
            Err(_) => check.fail(),
        }
    }
    check
}

/// `||beta - mean beta_hat||^2` against `||mean Proj_perp(beta)||^2` on the
/// same draws, in units of the excess-risk standard error.
fn check_bias_forms(seed: u64) -> Result<CheckResult> {
    let mut check = CheckResult::new("bias-forms", 3.0);
    let exec = Executor::default();
    for (k, &(n, d)) in [(3usize, 12usize), (6, 12), (9, 12), (10, 40), (20, 40), (30, 40)]
        .iter()
        .enumerate()
    {
        let spec = ModelSpec::new(d, 0.1, 1.0, BetaMode::RandomUnit)?;
        let base = derive_seed(seed, VERIFY_STREAM - 2, k as u64);
        let beta = crate::randgen::experiment_beta(&spec, base);
        let per_trial = exec.map(BIAS_TRIALS, |t| -> Result<(Vector, Vector)> {
            let mut rng = RngState::new(derive_seed(base, n as u64, t as u64));
            let data = crate::randgen::sample_dataset(&mut rng, &spec, &beta, n)?;
            let est = min_norm_fit(&data.x, &data.y)?;
            let perp = linalg::project_rowspace(&data.x, &beta, true)?;
            Ok((est.beta_hat, perp))
        });
        let per_trial: Vec<(Vector, Vector)> = per_trial.into_iter().collect::<Result<_>>()?;
        let t = per_trial.len() as f64;
        let mean_hat = per_trial.iter().fold(Vector::zeros(d), |acc, (b, _)| acc + b) / t;
        let mean_perp = per_trial.iter().fold(Vector::zeros(d), |acc, (_, p)| acc + p) / t;
        let direct = (&beta - mean_hat).norm_squared();
        let projected = mean_perp.norm_squared();
        let summary = monte_carlo_risk_for_beta(&spec, &beta, n, BIAS_TRIALS, base, &exec)?;
        let z = (direct - projected).abs() / summary.excess_stderr;
        check.record(z, z <= 3.0);
    }
    Ok(check)
}

/// Gradient descent from zero against the pseudoinverse, away from `n = d`.
/// Every iterate is checked for rowspace confinement when `n < d`.
pub fn check_gd(cases: usize, seed: u64) -> (CheckResult, CheckResult) {
    let mut gap = CheckResult::new("gd-equivalence", GD_GAP_TOL);
    let mut rowspace = CheckResult::new("gd-rowspace", GD_ROWSPACE_TOL);
    let cfg = GdConfig {
        max_steps: 2_000_000,
        tolerance: 1e-12,
        ..GdConfig::default()
    };
    let mut c = 0u64;
    let mut done = 0;
    while done < cases {
        let mut rng = RngState::new(derive_seed(seed, VERIFY_STREAM - 3, c));
        c += 1;
        let d = 10 + (rng.next_u64() % 31) as usize;
        let n = 1 + (rng.next_u64() % (2 * d as u64)) as usize;
        let ratio = n as f64 / d as f64;
        if ratio > 0.9 && ratio < 1.1 {
            continue;
        }
        done += 1;
        let x = sample_gaussian_matrix(&mut rng, n, d);
        let beta = sample_gaussian_vector(&mut rng, d);
        let y = &x * &beta + sample_gaussian_vector(&mut rng, n) * 0.1;
        let outcome = (|| -> Result<(f64, f64)> {
            let f = linalg::svd(&x)?;
            let mut worst_off = 0.0f64;
            let est = gd_fit_observed(&x, &y, &cfg, |_, b| {
                if n < d {
                    let norm = b.norm();
                    if norm > 0.0 {
                        let off = f.project_rowspace(b, true).map(|p| p.norm() / norm).unwrap_or(f64::INFINITY);
                        worst_off = worst_off.max(off);
                    }
                }
            })?;
            let direct = min_norm_fit(&x, &y)?;
            Ok(((&est.beta_hat - &direct.beta_hat).norm() / direct.beta_hat.norm(), worst_off))
        })();
        match outcome {
            Ok((g, off)) => {
                gap.record(g, g <= GD_GAP_TOL);
                rowspace.record(off, off <= GD_ROWSPACE_TOL);
            }
            Err(_) => {
                gap.fail();
                rowspace.fail();
            }
        }
    }
    (gap, rowspace)
}

/// Runs every check. `cases` sets the instance count for the exact
/// identities; gradient descent uses `min(cases, 100)` instances.
pub fn verify_identities(cases: usize, seed: u64) -> Result<VerifyReport> {
    if cases == 0 {
        return Err(crate::Error::InvalidConfig("verify needs at least one case".into()));
    }
    let (gd_gap, gd_rowspace) = check_gd(cases.min(GD_CASES), seed);
    Ok(VerifyReport {
        seed,
        checks: vec![
            check_trace_identity(cases, seed),
            check_signal_noise(cases, seed),
            check_bias_forms(seed)?,
            gd_gap,
            gd_rowspace,
        ],
    })
}
