//! Excess risk, its Monte Carlo bias/variance decomposition, and the
//! closed-form predictions it is compared against.
//!
//! For `n <= d` the variance splits into a design term
//! `(A) = E||Proj_X(beta) - E Proj_X(beta)||^2` and a noise term
//! `(B) = sigma^2 E Tr((X X^T)^{-1})`. For `n > d` the rowspace is all of
//! `R^d`, term (A) vanishes and the noise term is measured directly as
//! `E||X^+ eta||^2`.

use serde::Serialize;

use crate::estimator::{min_norm_fit_with, Regime};
use crate::exec::Executor;
use crate::linalg;
use crate::randgen::{derive_seed, experiment_beta, sample_dataset, ModelSpec, RngState};
use crate::{Error, Result, Vector};

/// `||beta_hat - beta||^2`, the excess test risk under isotropic covariates.
pub fn excess_risk(beta_hat: &Vector, beta: &Vector) -> Result<f64> {
    if beta_hat.len() != beta.len() {
        return Err(Error::DimensionMismatch {
            what: "beta_hat length vs beta length",
            expected: beta.len(),
            got: beta_hat.len(),
        });
    }
    Ok((beta_hat - beta).norm_squared())
}

/// Monte Carlo aggregates at one `(n, d)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskSummary {
    pub n: usize,
    pub d: usize,
    /// Trials that entered the statistics.
    pub trials: usize,
    /// Rank-deficient draws that were dropped.
    pub skipped: usize,
    /// Unbiased estimate of `||beta - E beta_hat||^2`, clamped at zero.
    pub bias_sq: f64,
    #[serde(rename = "var_A")]
    pub var_a: f64,
    #[serde(rename = "var_B")]
    pub var_b: f64,
    pub excess_mean: f64,
    pub excess_median: f64,
    pub excess_stderr: f64,
}

struct TrialOutcome {
    beta_hat: Vector,
    proj_beta: Vector,
    excess: f64,
    /// `sigma^2 Tr((X X^T)^{-1})` for `n <= d`, `||X^+ eta||^2` otherwise.
    noise_var: f64,
}

fn run_trial(spec: &ModelSpec, beta: &Vector, n: usize, seed: u64) -> Result<TrialOutcome> {
    let mut rng = RngState::new(seed);
    let data = sample_dataset(&mut rng, spec, beta, n)?;
    let factors = linalg::svd(&data.x)?;
    let est = min_norm_fit_with(&factors, &data.x, &data.y)?;
    let proj_beta = factors.project_rowspace(beta, false)?;
    let noise_var = match est.regime {
        Regime::Overparameterized => {
            spec.sigma * spec.sigma * est.trace_inv_gram.expect("overparameterized fit carries the trace")
        }
        Regime::Underparameterized => {
            let eta = data.eta.as_ref().expect("sampled data stores eta");
            factors.pinv_apply(eta)?.norm_squared()
        }
    };
    let excess = excess_risk(&est.beta_hat, beta)?;
    Ok(TrialOutcome {
        beta_hat: est.beta_hat,
        proj_beta,
        excess,
        noise_var,
    })
}

/// Monte Carlo risk at `n` samples; `beta` is drawn once from `base_seed`.
pub fn monte_carlo_risk(spec: &ModelSpec, n: usize, trials: usize, base_seed: u64) -> Result<RiskSummary> {
    monte_carlo_risk_with(spec, n, trials, base_seed, &Executor::default())
}

pub fn monte_carlo_risk_with(
    spec: &ModelSpec,
    n: usize,
    trials: usize,
    base_seed: u64,
    exec: &Executor,
) -> Result<RiskSummary> {
    let beta = experiment_beta(spec, base_seed);
    monte_carlo_risk_for_beta(spec, &beta, n, trials, base_seed, exec)
}

/// Trial `t` draws `(X, y)` from `derive_seed(base_seed, n, t)`, so the result
/// is independent of how trials are scheduled.
pub fn monte_carlo_risk_for_beta(
    spec: &ModelSpec,
    beta: &Vector,
    n: usize,
    trials: usize,
    base_seed: u64,
    exec: &Executor,
) -> Result<RiskSummary> {
    spec.validate()?;
    if trials < 2 {
        return Err(Error::TooFewTrials {
            valid: trials,
            requested: trials,
        });
    }
    if beta.len() != spec.d {
        return Err(Error::DimensionMismatch {
            what: "beta length vs d",
            expected: spec.d,
            got: beta.len(),
        });
    }

    let results = exec.map(trials, |t| run_trial(spec, beta, n, derive_seed(base_seed, n as u64, t as u64)));
    let mut outcomes = Vec::with_capacity(trials);
    let mut skipped = 0;
    for r in results {
        match r {
            Ok(o) => outcomes.push(o),
            Err(Error::RankDeficient { .. }) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    if outcomes.len() < 2 {
        return Err(Error::TooFewTrials {
            valid: outcomes.len(),
            requested: trials,
        });
    }
    Ok(summarize(n, spec, beta, &outcomes, skipped))
}

fn mean_vector<'a>(d: usize, vs: impl Iterator<Item = &'a Vector>) -> Vector {
    let mut sum = Vector::zeros(d);
    let mut count = 0usize;
    for v in vs {
        sum += v;
        count += 1;
    }
    sum / count as f64
}

fn summarize(n: usize, spec: &ModelSpec, beta: &Vector, outcomes: &[TrialOutcome], skipped: usize) -> RiskSummary {
    let d = spec.d;
    let t = outcomes.len() as f64;

    let mean_hat = mean_vector(d, outcomes.iter().map(|o| &o.beta_hat));
    let spread: f64 = outcomes.iter().map(|o| (&o.beta_hat - &mean_hat).norm_squared()).sum();
    // ||beta - mean||^2 overshoots B_n by tr Cov(beta_hat) / T.
    let bias_sq = ((beta - &mean_hat).norm_squared() - spread / (t * (t - 1.0))).max(0.0);

    let mean_proj = mean_vector(d, outcomes.iter().map(|o| &o.proj_beta));
    let var_a = outcomes
        .iter()
        .map(|o| (&o.proj_beta - &mean_proj).norm_squared())
        .sum::<f64>()
        / (t - 1.0);

    let var_b = outcomes.iter().map(|o| o.noise_var).sum::<f64>() / t;

    let excess: Vec<f64> = outcomes.iter().map(|o| o.excess).collect();
    let excess_mean = excess.iter().sum::<f64>() / t;
    let sd = (excess.iter().map(|e| (e - excess_mean).powi(2)).sum::<f64>() / (t - 1.0)).sqrt();

    RiskSummary {
        n,
        d,
        trials: outcomes.len(),
        skipped,
        bias_sq,
        var_a,
        var_b,
        excess_mean,
        excess_median: median(&excess),
        excess_stderr: sd / t.sqrt(),
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m == 0 {
        return f64::NAN;
    }
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Closed-form bias, variance and excess risk at `gamma = n / d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoryPoint {
    pub gamma: f64,
    pub bias_sq: f64,
    pub variance: f64,
    pub excess: f64,
}

/// Overparameterized prediction, `0 < gamma < 1`:
/// bias `(1-g)^2 |b|^2`, variance `g(1-g)|b|^2 + s^2 g/(1-g)`.
pub fn theory_overparam(gamma: f64, beta_norm: f64, sigma: f64) -> Result<TheoryPoint> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::OutOfDomain {
            what: "gamma",
            value: gamma,
            domain: "(0, 1); use theory_underparam for gamma > 1",
        });
    }
    let b2 = beta_norm * beta_norm;
    let noise = sigma * sigma * gamma / (1.0 - gamma);
    let bias_sq = (1.0 - gamma).powi(2) * b2;
    let variance = gamma * (1.0 - gamma) * b2 + noise;
    Ok(TheoryPoint {
        gamma,
        bias_sq,
        variance,
        excess: bias_sq + variance,
    })
}

/// Underparameterized prediction, `gamma > 1`: zero bias, variance `s^2 / (g - 1)`.
pub fn theory_underparam(gamma: f64, sigma: f64) -> Result<TheoryPoint> {
    if !(gamma > 1.0) {
        return Err(Error::OutOfDomain {
            what: "gamma",
            value: gamma,
            domain: "(1, inf); use theory_overparam for gamma < 1",
        });
    }
    let variance = sigma * sigma / (gamma - 1.0);
    Ok(TheoryPoint {
        gamma,
        bias_sq: 0.0,
        variance,
        excess: variance,
    })
}

/// Whichever closed form applies at `n / d`; `None` at `n = d`.
pub fn theory_at(n: usize, d: usize, beta_norm: f64, sigma: f64) -> Option<TheoryPoint> {
    let gamma = n as f64 / d as f64;
    match n.cmp(&d) {
        std::cmp::Ordering::Less => theory_overparam(gamma, beta_norm, sigma).ok(),
        std::cmp::Ordering::Equal => None,
        std::cmp::Ordering::Greater => theory_underparam(gamma, sigma).ok(),
    }
}

/// Iterates `T_{k+1} = T_k (1 + 1/(d-k)) + 1/(d-k)` from `T_0 = 0` and
/// returns `T_n`, the expected trace when the perpendicular component of
/// each new sample is replaced by its mean `d - k`.
pub fn trace_recursion(d: usize, n: usize) -> Result<f64> {
    if n >= d {
        return Err(Error::OutOfDomain {
            what: "n",
            value: n as f64,
            domain: "0 <= n < d",
        });
    }
    let mut t = 0.0;
    for k in 0..n {
        let r = 1.0 / (d - k) as f64;
        t = t * (1.0 + r) + r;
    }
    Ok(t)
}

/// `gamma / (1 - gamma)`, the large-`d` limit of `E Tr((X X^T)^{-1})`.
pub fn trace_asymptotic(gamma: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::OutOfDomain {
            what: "gamma",
            value: gamma,
            domain: "[0, 1)",
        });
    }
    Ok(gamma / (1.0 - gamma))
}
