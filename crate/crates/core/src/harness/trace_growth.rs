//! Growth of `Tr((X_n X_n^T)^{-1})` as samples are appended one at a time.
//!
//! Each trial grows its own `X` row by row. At every `n` the table records
//! the measured trace, the exact one-sample increment, the increment
//! predicted by replacing `||Proj_perp(x)||^2` with `d - n`, and the
//! deterministic recursion and asymptote for comparison.

use std::path::PathBuf;

use serde::Serialize;

use super::output::{fmt_f64, fmt_opt, write_csv, write_meta, PendingFile};
use super::TRACE_GROWTH_STREAM;
use crate::exec::{Executor, Parallelism};
use crate::linalg::{self, TraceIncrement};
use crate::randgen::{derive_seed, sample_gaussian_vector, RngState};
use crate::risk::{median, trace_asymptotic, trace_recursion};
use crate::{Error, Matrix, Result};

pub const TRACE_GROWTH_HEADER: [&str; 15] = [
    "n",
    "d",
    "gamma",
    "trials",
    "trace_mean",
    "trace_median",
    "measured_increment_mean",
    "identity_increment_mean",
    "predicted_increment_mean",
    "proj_perp_sq_mean",
    "trace_recursion",
    "trace_asymptotic",
    "identity_max_rel_err",
    "flagged",
    "seed",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceGrowthConfig {
    pub d: usize,
    pub n_max: usize,
    pub trials: usize,
    pub base_seed: u64,
    pub parallelism: Parallelism,
    pub output_path: Option<PathBuf>,
}

/// Per-trial values at one `n`. Increment fields describe appending sample `n + 1`.
#[derive(Debug, Clone, Copy, Default)]
struct Step {
    trace: Option<f64>,
    increment: Option<TraceIncrement>,
    measured_increment: Option<f64>,
    flagged: bool,
}

/// Aggregates over trials at one `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceGrowthRow {
    pub n: usize,
    pub d: usize,
    pub gamma: f64,
    /// Trials with a measured trace at this `n`.
    pub trials: usize,
    pub trace_mean: Option<f64>,
    pub trace_median: Option<f64>,
    pub measured_increment_mean: Option<f64>,
    pub identity_increment_mean: Option<f64>,
    /// Mean of `(1 + T_n) / (d - n)`.
    pub predicted_increment_mean: Option<f64>,
    pub proj_perp_sq_mean: Option<f64>,
    pub trace_recursion: f64,
    pub trace_asymptotic: f64,
    /// Worst `|measured - identity| / identity` over trials.
    pub identity_max_rel_err: Option<f64>,
    pub flagged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceGrowthTable {
    pub d: usize,
    pub seed: u64,
    pub rows: Vec<TraceGrowthRow>,
}

impl TraceGrowthTable {
    pub fn max_identity_rel_err(&self) -> f64 {
        self.rows
            .iter()
            .filter_map(|r| r.identity_max_rel_err)
            .fold(0.0, f64::max)
    }

    pub fn flagged(&self) -> usize {
        self.rows.iter().map(|r| r.flagged).sum()
    }

    fn csv_record(&self, r: &TraceGrowthRow) -> Vec<String> {
        vec![
            r.n.to_string(),
            r.d.to_string(),
            fmt_f64(r.gamma),
            r.trials.to_string(),
            fmt_opt(r.trace_mean),
            fmt_opt(r.trace_median),
            fmt_opt(r.measured_increment_mean),
            fmt_opt(r.identity_increment_mean),
            fmt_opt(r.predicted_increment_mean),
            fmt_opt(r.proj_perp_sq_mean),
            fmt_f64(r.trace_recursion),
            fmt_f64(r.trace_asymptotic),
            fmt_opt(r.identity_max_rel_err),
            r.flagged.to_string(),
            self.seed.to_string(),
        ]
    }
}

fn grow_one(d: usize, n_max: usize, seed: u64) -> Vec<Step> {
    let mut rng = RngState::new(seed);
    let mut x = Matrix::zeros(0, d);
    let mut steps = vec![Step::default(); n_max + 1];
    let mut alive = true;
    for n in 0..=n_max {
        if !alive {
            break;
        }
        let factors = if n == 0 {
            None
        } else {
            match linalg::svd(&x) {
                Ok(f) => Some(f),
                Err(_) => {
                    steps[n].flagged = true;
                    break;
                }
            }
        };
        let trace = match &factors {
            None => Ok(0.0),
            Some(f) => f.trace_inv_gram(),
        };
        match trace {
            Ok(t) => {
                steps[n].trace = Some(t);
                if n > 0 {
                    if let Some(prev) = steps[n - 1].trace {
                        steps[n - 1].measured_increment = Some(t - prev);
                    }
                }
            }
            Err(_) => {
                steps[n].flagged = true;
                alive = false;
            }
        }
        if n == n_max {
            break;
        }
        let sample = sample_gaussian_vector(&mut rng, d);
        let inc = match &factors {
            None => linalg::trace_increment_from_empty(&sample),
            Some(f) => f.trace_increment(&sample),
        };
        match inc {
            Ok(inc) => steps[n].increment = Some(inc),
            Err(_) => steps[n].flagged = true,
        }
        x = x.insert_row(n, 0.0);
        x.row_mut(n).copy_from(&sample.transpose());
    }
    steps
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

fn aggregate(d: usize, n: usize, per_trial: &[Vec<Step>]) -> TraceGrowthRow {
    let steps: Vec<&Step> = per_trial.iter().map(|s| &s[n]).collect();
    let traces: Vec<f64> = steps.iter().filter_map(|s| s.trace).collect();
    let measured: Vec<f64> = steps.iter().filter_map(|s| s.measured_increment).collect();
    let identity: Vec<f64> = steps.iter().filter_map(|s| s.increment.map(|i| i.value)).collect();
    let perp: Vec<f64> = steps.iter().filter_map(|s| s.increment.map(|i| i.perp_norm_sq)).collect();
    let predicted: Vec<f64> = if n < d {
        steps
            .iter()
            .filter(|s| s.increment.is_some())
            .filter_map(|s| s.trace.map(|t| (1.0 + t) / (d - n) as f64))
            .collect()
    } else {
        Vec::new()
    };
    let rel_errs: Vec<f64> = steps
        .iter()
        .filter_map(|s| match (s.measured_increment, s.increment) {
            (Some(m), Some(i)) => Some((m - i.value).abs() / i.value.abs()),
            _ => None,
        })
        .collect();
    let gamma = n as f64 / d as f64;
    TraceGrowthRow {
        n,
        d,
        gamma,
        trials: traces.len(),
        trace_mean: mean(&traces),
        trace_median: (!traces.is_empty()).then(|| median(&traces)),
        measured_increment_mean: mean(&measured),
        identity_increment_mean: mean(&identity),
        predicted_increment_mean: mean(&predicted),
        proj_perp_sq_mean: mean(&perp),
        trace_recursion: trace_recursion(d, n).unwrap_or(f64::NAN),
        trace_asymptotic: trace_asymptotic(gamma).unwrap_or(f64::NAN),
        identity_max_rel_err: (!rel_errs.is_empty()).then(|| rel_errs.iter().copied().fold(0.0, f64::max)),
        flagged: steps.iter().filter(|s| s.flagged).count(),
    }
}

/// Grows `trials` independent data matrices up to `n_max` rows and tabulates
/// the trace statistics for `n = 0..=n_max`. Writes the table when
/// `output_path` is set.
pub fn run_trace_growth(cfg: &TraceGrowthConfig) -> Result<TraceGrowthTable> {
    if cfg.d == 0 || cfg.n_max >= cfg.d {
        return Err(Error::InvalidConfig(format!(
            "trace growth needs 0 <= n_max < d, got n_max = {} and d = {}",
            cfg.n_max, cfg.d
        )));
    }
    if cfg.trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    let pending = cfg.output_path.as_deref().map(PendingFile::prepare).transpose()?;
    let exec = Executor::new(cfg.parallelism)?;
    let per_trial = exec.map(cfg.trials, |t| {
        grow_one(cfg.d, cfg.n_max, derive_seed(cfg.base_seed, TRACE_GROWTH_STREAM, t as u64))
    });
    let rows = (0..=cfg.n_max).map(|n| aggregate(cfg.d, n, &per_trial)).collect();
    let table = TraceGrowthTable {
        d: cfg.d,
        seed: cfg.base_seed,
        rows,
    };
    if let (Some(pending), Some(path)) = (pending, cfg.output_path.as_deref()) {
        write_csv(pending, &TRACE_GROWTH_HEADER, table.rows.iter().map(|r| table.csv_record(r)))?;
        write_meta(path, "trace-growth", cfg)?;
    }
    Ok(table)
}
