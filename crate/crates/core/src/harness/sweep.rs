//! Test risk against sample count, with closed-form columns alongside.

use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;

use super::output::{fmt_f64, fmt_opt, write_csv, write_meta, PendingFile};
use crate::exec::{Executor, Parallelism};
use crate::randgen::{experiment_beta, BetaMode, ModelSpec};
use crate::risk::{monte_carlo_risk_for_beta, theory_at, RiskSummary, TheoryPoint};
use crate::{Error, Result};

pub const SWEEP_HEADER: [&str; 16] = [
    "n",
    "d",
    "gamma",
    "trials",
    "bias_sq",
    "var_A",
    "var_B",
    "excess_mean",
    "excess_median",
    "excess_stderr",
    "theory_bias",
    "theory_variance",
    "theory_excess",
    "seed",
    "wall_time_ms",
    "error",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub d: usize,
    pub sigma: f64,
    pub beta_norm: f64,
    pub beta_mode: BetaMode,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub base_seed: u64,
    pub parallelism: Parallelism,
    pub output_path: PathBuf,
}

impl SweepConfig {
    pub fn model(&self) -> Result<ModelSpec> {
        ModelSpec::new(self.d, self.sigma, self.beta_norm, self.beta_mode)
    }

    pub fn validate(&self) -> Result<()> {
        self.model()?;
        if self.n_grid.is_empty() {
            return Err(Error::InvalidConfig("n grid is empty".into()));
        }
        if self.n_grid[0] == 0 || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "n grid must be strictly increasing with every entry >= 1".into(),
            ));
        }
        if self.trials < 2 {
            return Err(Error::InvalidConfig(format!(
                "trials must be at least 2 for variance estimates, got {}",
                self.trials
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub d: usize,
    pub gamma: f64,
    pub trials: usize,
    pub summary: Option<RiskSummary>,
    /// `None` at `n = d`, where neither closed form applies.
    pub theory: Option<TheoryPoint>,
    pub seed: u64,
    pub wall_time_ms: u64,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn csv_record(&self) -> Vec<String> {
        let s = self.summary.as_ref();
        let t = self.theory.as_ref();
        vec![
            self.n.to_string(),
            self.d.to_string(),
            fmt_f64(self.gamma),
            self.trials.to_string(),
            fmt_opt(s.map(|s| s.bias_sq)),
            fmt_opt(s.map(|s| s.var_a)),
            fmt_opt(s.map(|s| s.var_b)),
            fmt_opt(s.map(|s| s.excess_mean)),
            fmt_opt(s.map(|s| s.excess_median)),
            fmt_opt(s.map(|s| s.excess_stderr)),
            fmt_opt(t.map(|t| t.bias_sq)),
            fmt_opt(t.map(|t| t.variance)),
            fmt_opt(t.map(|t| t.excess)),
            self.seed.to_string(),
            self.wall_time_ms.to_string(),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

/// Runs every grid point without touching the filesystem.
///
/// Rows are computed in grid order; trials inside a row go through `exec`.
/// A failing row carries its message in `error` and the sweep continues.
pub fn compute_sweep(cfg: &SweepConfig, exec: &Executor) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let spec = cfg.model()?;
    let beta = experiment_beta(&spec, cfg.base_seed);
    let rows = cfg
        .n_grid
        .iter()
        .map(|&n| {
            let start = Instant::now();
            let result = monte_carlo_risk_for_beta(&spec, &beta, n, cfg.trials, cfg.base_seed, exec);
            let wall_time_ms = start.elapsed().as_millis() as u64;
            let (summary, error) = match result {
                Ok(s) => (Some(s), None),
                Err(e) => (None, Some(e.to_string())),
            };
            SweepRow {
                n,
                d: cfg.d,
                gamma: n as f64 / cfg.d as f64,
                trials: summary.as_ref().map_or(cfg.trials, |s| s.trials),
                summary,
                theory: theory_at(n, cfg.d, cfg.beta_norm, cfg.sigma),
                seed: cfg.base_seed,
                wall_time_ms,
                error,
            }
        })
        .collect();
    Ok(rows)
}

/// Runs the sweep and persists `output_path` (CSV) plus its `.meta.json`.
///
/// The destination is checked for writability before any trial runs.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let pending = PendingFile::prepare(&cfg.output_path)?;
    let exec = Executor::new(cfg.parallelism)?;
    let rows = compute_sweep(cfg, &exec)?;
    write_csv(pending, &SWEEP_HEADER, rows.iter().map(SweepRow::csv_record))?;
    write_meta(&cfg.output_path, "sweep", cfg)?;
    Ok(rows)
}
