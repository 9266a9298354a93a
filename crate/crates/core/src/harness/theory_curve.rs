//! Closed-form bias, variance and risk curves without sampling.

use std::path::Path;

use serde::Serialize;

use super::output::{fmt_f64, fmt_opt, write_csv, PendingFile};
use crate::risk::{theory_at, trace_asymptotic};
use crate::Result;

pub const THEORY_HEADER: [&str; 7] = [
    "n",
    "d",
    "gamma",
    "theory_bias",
    "theory_variance",
    "theory_excess",
    "trace_asymptotic",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryRow {
    pub n: usize,
    pub d: usize,
    pub gamma: f64,
    pub bias_sq: Option<f64>,
    pub variance: Option<f64>,
    pub excess: Option<f64>,
    pub trace_asymptotic: Option<f64>,
}

pub fn theory_table(d: usize, beta_norm: f64, sigma: f64, n_grid: &[usize]) -> Vec<TheoryRow> {
    n_grid
        .iter()
        .map(|&n| {
            let gamma = n as f64 / d as f64;
            let p = theory_at(n, d, beta_norm, sigma);
            TheoryRow {
                n,
                d,
                gamma,
                bias_sq: p.map(|p| p.bias_sq),
                variance: p.map(|p| p.variance),
                excess: p.map(|p| p.excess),
                trace_asymptotic: trace_asymptotic(gamma).ok(),
            }
        })
        .collect()
}

pub fn write_theory_table(rows: &[TheoryRow], path: &Path) -> Result<()> {
    let pending = PendingFile::prepare(path)?;
    write_csv(
        pending,
        &THEORY_HEADER,
        rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                r.d.to_string(),
                fmt_f64(r.gamma),
                fmt_opt(r.bias_sq),
                fmt_opt(r.variance),
                fmt_opt(r.excess),
                fmt_opt(r.trace_asymptotic),
            ]
        }),
    )
}
