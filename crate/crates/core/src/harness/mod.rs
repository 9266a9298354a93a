//! Experiment orchestration: risk sweeps, trace growth, the conditioning
//! demonstration, identity verification and closed-form curves.

pub mod conditioning;
pub mod config;
pub mod output;
pub mod sweep;
pub mod theory_curve;
pub mod trace_growth;
pub mod verify;

pub use conditioning::{run_conditioning_demo, ConditioningReport};
pub use sweep::{run_sweep, SweepConfig, SweepRow, SWEEP_HEADER};
pub use theory_curve::{theory_table, TheoryRow};
pub use trace_growth::{run_trace_growth, TraceGrowthConfig, TraceGrowthRow, TraceGrowthTable};
pub use verify::{verify_identities, CheckResult, VerifyReport};

use crate::{Error, Result};

/// Seed stream tags, disjoint from any sample count `n`.
pub(crate) const TRACE_GROWTH_STREAM: u64 = u64::MAX - 1;
pub(crate) const CONDITIONING_STREAM: u64 = u64::MAX - 2;
pub(crate) const VERIFY_STREAM: u64 = u64::MAX - 3;

/// Default sample grid from 10 to `2d`: steps of `d/10` away from
/// criticality and `d/50` inside `[0.8d, 1.2d]`.
pub fn default_n_grid(d: usize) -> Vec<usize> {
    let at = |frac: f64| (frac * d as f64).round() as usize;
    let mut grid = vec![10];
    grid.extend((1..=7).map(|k| at(k as f64 / 10.0)));
    grid.extend((40..=60).map(|k| at(k as f64 / 50.0)));
    grid.extend((13..=20).map(|k| at(k as f64 / 10.0)));
    grid.retain(|&n| (1..=2 * d).contains(&n));
    grid.sort_unstable();
    grid.dedup();
    grid
}

/// Parses `10,20,30`.
pub fn parse_n_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse::<usize>()
                .map_err(|_| Error::InvalidConfig(format!("bad sample count `{p}` in n grid")))
        })
        .collect()
}

/// Parses `START:STOP:STEP`, inclusive of `STOP` when it lands on the step.
pub fn parse_n_range(s: &str) -> Result<Vec<usize>> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let bad = || Error::InvalidConfig(format!("n range must be START:STOP:STEP, got `{s}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<usize> = parts
        .iter()
        .map(|p| p.parse::<usize>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if step == 0 || start > stop {
        return Err(bad());
    }
    Ok((start..=stop).step_by(step).collect())
}

/// Merges grids into one sorted, duplicate-free list.
pub fn merge_grids(grids: impl IntoIterator<Item = Vec<usize>>) -> Vec<usize> {
    let mut all: Vec<usize> = grids.into_iter().flatten().collect();
    all.sort_unstable();
    all.dedup();
    all
}
