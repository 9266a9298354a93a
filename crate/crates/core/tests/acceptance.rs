//! End-to-end acceptance checks. Prints one `[PASS]`/`[FAIL]` line per
//! criterion and exits non-zero if any fails.
//!
//! ```text
//! cargo test --release --test acceptance            # all criteria
//! cargo test --release --test acceptance -- c2 c9   # a subset
//! ```

use std::fmt::Write as _;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{ensure, Result};

use ddlab::harness::verify::{check_gd, check_trace_identity};
use ddlab::harness::{
    default_n_grid, run_conditioning_demo, run_sweep, run_trace_growth, SweepConfig, SweepRow, TraceGrowthConfig,
    SWEEP_HEADER,
};
use ddlab::risk::monte_carlo_risk_with;
use ddlab::{BetaMode, Executor, ModelSpec, Parallelism};

const SEED: u64 = 20191;
const SIGMA: f64 = 0.1;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn rel(measured: f64, expected: f64) -> f64 {
    (measured - expected).abs() / expected.abs()
}

fn secs(d: Duration) -> String {
    format!("{:.1} s", d.as_secs_f64())
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).expect("create scratch dir");
    dir.join(name)
}

fn sweep_config(d: usize, n_grid: Vec<usize>, trials: usize, threads: Parallelism, out: PathBuf) -> SweepConfig {
    SweepConfig {
        d,
        sigma: SIGMA,
        beta_norm: 1.0,
        beta_mode: BetaMode::FirstAxis,
        n_grid,
        trials,
        base_seed: SEED,
        parallelism: threads,
        output_path: out,
    }
}

fn threads(n: usize) -> Parallelism {
    Parallelism::Threads(NonZeroUsize::new(n).unwrap())
}

fn c1_trace_identity() -> Result<Outcome> {
    let start = Instant::now();
    let check = check_trace_identity(1000, SEED);
    let elapsed = start.elapsed();
    let pass = check.cases == 1000 && check.failed == 0 && check.worst_error <= 1e-8 && elapsed.as_secs_f64() < 10.0;
    Ok(Outcome::new(
        pass,
        format!(
            "worst rel err {:.2e} over {} instances, {} failed, {} (tol 1e-8, < 10 s)",
            check.worst_error,
            check.cases,
            check.failed,
            secs(elapsed)
        ),
    ))
}

fn c2_overparameterized() -> Result<Outcome> {
    let d = 200;
    let spec = ModelSpec::new(d, SIGMA, 1.0, BetaMode::FirstAxis)?;
    let exec = Executor::default();
    let start = Instant::now();
    let mut pass = true;
    let mut detail = String::new();
    for gamma in [0.1, 0.25, 0.5, 0.75, 0.9] {
        let n = (gamma * d as f64).round() as usize;
        let s = monte_carlo_risk_with(&spec, n, 1000, SEED, &exec)?;
        let e_excess = rel(s.excess_mean, (1.0 - gamma) + 0.01 * gamma / (1.0 - gamma));
        let e_bias = rel(s.bias_sq, (1.0 - gamma).powi(2));
        let e_var = rel(s.var_a, gamma * (1.0 - gamma));
        pass &= e_excess <= 0.05 && e_bias <= 0.05 && e_var <= 0.10;
        write!(detail, "g={gamma}: {e_excess:.3}/{e_bias:.3}/{e_var:.3}; ")?;
    }
    Ok(Outcome::new(
        pass,
        format!("rel err excess/bias/var_A {detail}tol 0.05/0.05/0.10, {}", secs(start.elapsed())),
    ))
}

fn c3_underparameterized() -> Result<Outcome> {
    let d = 100;
    let spec = ModelSpec::new(d, SIGMA, 1.0, BetaMode::FirstAxis)?;
    let exec = Executor::default();
    let start = Instant::now();
    let mut pass = true;
    let mut detail = String::new();
    for n in [150, 200, 400] {
        let gamma = n as f64 / d as f64;
        let s = monte_carlo_risk_with(&spec, n, 1000, SEED, &exec)?;
        let e = rel(s.excess_mean, SIGMA * SIGMA / (gamma - 1.0));
        pass &= e <= 0.10;
        write!(detail, "n={n}: {e:.3}; ")?;
    }
    let elapsed = start.elapsed();
    pass &= elapsed.as_secs_f64() < 60.0;
    Ok(Outcome::new(pass, format!("rel err excess {detail}tol 0.10, {} (< 60 s)", secs(elapsed))))
}

fn c4_trace_convergence() -> Result<Outcome> {
    let table = run_trace_growth(&TraceGrowthConfig {
        d: 200,
        n_max: 100,
        trials: 200,
        base_seed: SEED,
        parallelism: Parallelism::Auto,
        output_path: None,
    })?;
    let row = &table.rows[100];
    ensure!(row.n == 100, "unexpected row layout");
    let mean = row.trace_mean.unwrap_or(f64::NAN);
    let (e_asym, e_rec) = (rel(mean, 1.0), rel(mean, 100.0 / 101.0));
    Ok(Outcome::new(
        e_asym <= 0.05 && e_rec <= 0.05 && row.trials == 200,
        format!(
            "mean trace {mean:.5} over {} trials; rel err vs 1.0 {e_asym:.4}, vs 100/101 {e_rec:.4} (tol 0.05)",
            row.trials
        ),
    ))
}

/// Runs the `d = 100`, 500-trial sweep at `n = 50, 100, 150` once and scores
/// both criteria 5 and 6 on it.
fn peak_run() -> Result<Vec<SweepRow>> {
    let cfg = sweep_config(100, vec![50, 100, 150], 500, Parallelism::Auto, scratch("peak_d100.csv"));
    let rows = run_sweep(&cfg)?;
    ensure!(rows.iter().all(|r| r.summary.is_some()), "peak run has failed rows");
    Ok(rows)
}

fn median_at(rows: &[SweepRow], n: usize) -> f64 {
    rows.iter()
        .find(|r| r.n == n)
        .and_then(|r| r.summary.as_ref())
        .map_or(f64::NAN, |s| s.excess_median)
}

fn peak_ratios(rows: &[SweepRow], below: usize, at: usize, above: usize) -> (f64, f64, f64) {
    let m = median_at(rows, at);
    (m, m / median_at(rows, below), m / median_at(rows, above))
}

fn c5_peak(rows: &[SweepRow]) -> Result<Outcome> {
    let (m, lo, hi) = peak_ratios(rows, 50, 100, 150);
    Ok(Outcome::new(
        lo >= 10.0 && hi >= 10.0,
        format!("median at n=100 {m:.4}; ratio vs n=50 {lo:.2}, vs n=150 {hi:.2} (need >= 10 each)"),
    ))
}

fn c6_more_data_hurts(rows: &[SweepRow]) -> Result<Outcome> {
    let (m50, m100) = (median_at(rows, 50), median_at(rows, 100));
    Ok(Outcome::new(
        m100 > m50,
        format!("median at n=50 {m50:.4}, at n=100 {m100:.4}"),
    ))
}

fn c7_gd_equivalence() -> Result<Outcome> {
    let start = Instant::now();
    let (gap, rowspace) = check_gd(100, SEED);
    let pass = gap.cases == 100 && gap.failed == 0 && gap.worst_error <= 1e-6 && rowspace.failed == 0;
    Ok(Outcome::new(
        pass,
        format!(
            "{} instances; worst gap {:.2e} (tol 1e-6), worst off-rowspace {:.2e}, {} failures, {}",
            gap.cases,
            gap.worst_error,
            rowspace.worst_error,
            gap.failed + rowspace.failed,
            secs(start.elapsed())
        ),
    ))
}

fn c8_conditioning() -> Result<Outcome> {
    let mut pass = true;
    let mut detail = String::new();
    for d in [10, 100, 1000] {
        let r = run_conditioning_demo(d, SEED)?;
        let ok = r.pre_sigma_min == d as f64 && r.pre_max_deviation == 0.0 && r.post_sigma_min <= r.post_bound;
        pass &= ok;
        write!(
            detail,
            "d={d}: pre {} dev {:.1e}, post {:.4} <= {:.4}; ",
            r.pre_sigma_min, r.pre_max_deviation, r.post_sigma_min, r.post_bound
        )?;
    }
    Ok(Outcome::new(pass, detail.trim_end_matches("; ").to_string()))
}

fn c9_full_curve() -> Result<Outcome> {
    let d = 1000;
    let out = scratch("curve_d1000.csv");
    let cfg = sweep_config(d, default_n_grid(d), 50, Parallelism::Auto, out.clone());
    let start = Instant::now();
    let rows = run_sweep(&cfg)?;
    let elapsed = start.elapsed();

    let mut failures = Vec::new();
    if elapsed.as_secs_f64() >= 3600.0 {
        failures.push(format!("runtime {}", secs(elapsed)));
    }
    for r in rows.iter().filter(|r| r.error.is_some()) {
        failures.push(format!("n={} errored", r.n));
    }
    let (m, lo, hi) = peak_ratios(&rows, 500, 1000, 1500);
    if !(lo >= 10.0 && hi >= 10.0) {
        failures.push(format!("peak ratios {lo:.2}/{hi:.2} < 10"));
    }
    if median_at(&rows, 1000) <= median_at(&rows, 500) {
        failures.push("median at n=d not above n=d/2".into());
    }
    let mut checked = 0;
    for r in &rows {
        let Some(s) = &r.summary else { continue };
        let g = r.gamma;
        if (0.9..=1.1).contains(&g) {
            continue;
        }
        checked += 1;
        if g < 1.0 {
            let e_excess = rel(s.excess_mean, (1.0 - g) + SIGMA * SIGMA * g / (1.0 - g));
            let e_bias = rel(s.bias_sq, (1.0 - g).powi(2));
            let e_var = rel(s.var_a, g * (1.0 - g));
            if e_excess > 0.05 || e_bias > 0.05 || e_var > 0.10 {
                failures.push(format!("n={} excess/bias/var_A {e_excess:.3}/{e_bias:.3}/{e_var:.3}", r.n));
            }
        } else {
            let e_excess = rel(s.excess_mean, SIGMA * SIGMA / (g - 1.0));
            if e_excess > 0.05 {
                failures.push(format!("n={} excess {e_excess:.3}", r.n));
            }
        }
    }
    let summary = format!(
        "{} rows in {}, {checked} checked against theory, median at n=d {m:.3}, peak ratios {lo:.1}/{hi:.1}, csv {}",
        rows.len(),
        secs(elapsed),
        out.display()
    );
    Ok(if failures.is_empty() {
        Outcome::new(true, summary)
    } else {
        Outcome::new(false, format!("{summary}; {}", failures.join("; ")))
    })
}

/// CSV rows with the timing column removed.
fn numeric_columns(path: &Path) -> Result<Vec<Vec<String>>> {
    let mut reader = csv::Reader::from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    let skip = header.iter().position(|h| h == "wall_time_ms");
    let mut rows = vec![header];
    for rec in reader.records() {
        rows.push(rec?.iter().map(str::to_owned).collect());
    }
    if let Some(i) = skip {
        for row in &mut rows {
            row.remove(i);
        }
    }
    Ok(rows)
}

fn c10_determinism() -> Result<Outcome> {
    let start = Instant::now();
    let mut compared = Vec::new();
    for (name, d, grid, trials) in [
        ("peak", 100, vec![50, 100, 150], 500),
        ("under", 100, vec![150, 200, 400], 1000),
    ] {
        let mut tables = Vec::new();
        for (k, t) in [1, 4, 4].into_iter().enumerate() {
            let out = scratch(&format!("det_{name}_{k}_t{t}.csv"));
            run_sweep(&sweep_config(d, grid.clone(), trials, threads(t), out.clone()))?;
            tables.push(numeric_columns(&out)?);
        }
        ensure!(tables[0][0].len() == SWEEP_HEADER.len() - 1, "unexpected sweep header");
        if tables.windows(2).any(|w| w[0] != w[1]) {
            return Ok(Outcome::new(false, format!("sweep `{name}` differs across runs")));
        }
        compared.push(name);
    }
    let mut tables = Vec::new();
    for t in [1, 4] {
        let out = scratch(&format!("det_trace_t{t}.csv"));
        run_trace_growth(&TraceGrowthConfig {
            d: 200,
            n_max: 100,
            trials: 200,
            base_seed: SEED,
            parallelism: threads(t),
            output_path: Some(out.clone()),
        })?;
        tables.push(numeric_columns(&out)?);
    }
    if tables[0] != tables[1] {
        return Ok(Outcome::new(false, "trace-growth table differs across thread counts"));
    }
    compared.push("trace-growth");
    Ok(Outcome::new(
        true,
        format!(
            "{} identical across 1 and 4 threads and on rerun, {}",
            compared.join(", "),
            secs(start.elapsed())
        ),
    ))
}

type Runner = Box<dyn Fn(&mut Option<Vec<SweepRow>>) -> Result<Outcome>>;
type Criterion = (&'static str, &'static str, Runner);

fn with_peak(f: fn(&[SweepRow]) -> Result<Outcome>) -> Runner {
    Box::new(move |cache| {
        if cache.is_none() {
            *cache = Some(peak_run()?);
        }
        f(cache.as_deref().unwrap())
    })
}

fn plain(f: fn() -> Result<Outcome>) -> Runner {
    Box::new(move |_| f())
}

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        ("C1", "trace identity", plain(c1_trace_identity)),
        ("C2", "overparameterized theory", plain(c2_overparameterized)),
        ("C3", "underparameterized theory", plain(c3_underparameterized)),
        ("C4", "trace convergence", plain(c4_trace_convergence)),
        ("C5", "peak at criticality", with_peak(c5_peak)),
        ("C6", "more data hurts", with_peak(c6_more_data_hurts)),
        ("C7", "gradient descent equivalence", plain(c7_gd_equivalence)),
        ("C8", "conditioning", plain(c8_conditioning)),
        ("C9", "full curve at d=1000", plain(c9_full_curve)),
        ("C10", "determinism", plain(c10_determinism)),
    ];

    let filters: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .map(|a| a.to_ascii_uppercase())
        .collect();
    let selected: Vec<&Criterion> = criteria
        .iter()
        .filter(|(id, _, _)| filters.is_empty() || filters.iter().any(|f| f == id))
        .collect();

    let mut peak_cache = None;
    let mut failed = 0;
    for (id, title, run) in &selected {
        let start = Instant::now();
        let outcome = run(&mut peak_cache).unwrap_or_else(|e| Outcome::new(false, format!("error: {e:#}")));
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        if !outcome.pass {
            failed += 1;
        }
        println!("[{tag}] {id} {title}: {} [{}]", outcome.detail, secs(start.elapsed()));
    }
    println!(
        "acceptance: {} of {} criteria passed",
        selected.len() - failed,
        selected.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
