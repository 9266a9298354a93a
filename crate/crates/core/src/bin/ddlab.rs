//! Command-line front end for the double-descent experiments.
//!
//! ```text
//! ddlab sweep --d 200 --sigma 0.1 --trials 100 --out sweep.csv
//! ddlab trace-growth --d 200 --n-max 150 --trials 200 --out trace.csv
//! ddlab conditioning --d 1000
//! ddlab verify --trials 1000
//! ddlab theory --d 1000 --out theory.csv
//! ```

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use ddlab::harness::config::KeyValues;
use ddlab::harness::theory_curve::write_theory_table;
use ddlab::harness::{
    default_n_grid, merge_grids, parse_n_list, parse_n_range, run_conditioning_demo, run_sweep, run_trace_growth,
    theory_table, verify_identities, SweepConfig, TraceGrowthConfig,
};
use ddlab::{BetaMode, Parallelism};

const DEFAULT_D: usize = 200;
const DEFAULT_SIGMA: f64 = 0.1;
const DEFAULT_BETA_NORM: f64 = 1.0;
const DEFAULT_TRIALS: usize = 50;
const DEFAULT_SEED: u64 = 20191;
const DEFAULT_VERIFY_CASES: usize = 1000;

#[derive(Parser, Debug)]
#[command(name = "ddlab", version, about = "Sample-wise double descent in ridgeless linear regression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte Carlo test risk over a grid of sample counts.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated sample counts.
        #[arg(long)]
        n_grid: Option<String>,
        /// START:STOP:STEP sample counts (merged with --n-grid).
        #[arg(long)]
        n_range: Option<String>,
    },
    /// Growth of Tr((X X^T)^-1) as samples are appended one at a time.
    TraceGrowth {
        #[command(flatten)]
        common: CommonArgs,
        /// Largest sample count (must be < d). Defaults to 3d/4.
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Smallest singular value before and after one Gaussian row.
    Conditioning {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Randomized checks of the exact identities; --trials sets the case count.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Closed-form curves on the sweep grid, no sampling.
    Theory {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        n_grid: Option<String>,
        #[arg(long)]
        n_range: Option<String>,
    },
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// Ambient dimension.
    #[arg(long)]
    d: Option<usize>,
    /// Noise standard deviation.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    beta_norm: Option<f64>,
    /// first-axis or random-unit.
    #[arg(long)]
    beta_mode: Option<BetaMode>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads: a positive integer or `auto`.
    #[arg(long)]
    threads: Option<Parallelism>,
    /// key=value file; explicit flags win over its entries.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Flag values merged over the config file and the defaults.
struct Resolved {
    d: usize,
    sigma: f64,
    beta_norm: f64,
    beta_mode: BetaMode,
    trials: Option<usize>,
    seed: u64,
    out: Option<PathBuf>,
    threads: Parallelism,
    file: KeyValues,
}

impl CommonArgs {
    fn resolve(&self) -> Result<Resolved> {
        let file = match &self.config {
            Some(path) => KeyValues::load(path).with_context(|| format!("reading config {}", path.display()))?,
            None => KeyValues::default(),
        };
        Ok(Resolved {
            d: pick(self.d, &file, "d")?.unwrap_or(DEFAULT_D),
            sigma: pick(self.sigma, &file, "sigma")?.unwrap_or(DEFAULT_SIGMA),
            beta_norm: pick(self.beta_norm, &file, "beta-norm")?.unwrap_or(DEFAULT_BETA_NORM),
            beta_mode: pick(self.beta_mode, &file, "beta-mode")?.unwrap_or_default(),
            trials: pick(self.trials, &file, "trials")?,
            seed: pick(self.seed, &file, "seed")?.unwrap_or(DEFAULT_SEED),
            out: pick(self.out.clone(), &file, "out")?,
            threads: pick(self.threads, &file, "threads")?.unwrap_or_default(),
            file,
        })
    }
}

fn pick<T: std::str::FromStr>(flag: Option<T>, file: &KeyValues, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match flag {
        Some(v) => Ok(Some(v)),
        None => Ok(file.get(key)?),
    }
}

fn resolve_grid(d: usize, flag_list: &Option<String>, flag_range: &Option<String>, file: &KeyValues) -> Result<Vec<usize>> {
    let list = flag_list.clone().or_else(|| file.raw("n-grid").map(str::to_owned));
    let range = flag_range.clone().or_else(|| file.raw("n-range").map(str::to_owned));
    let mut grids = Vec::new();
    if let Some(l) = list {
        grids.push(parse_n_list(&l)?);
    }
    if let Some(r) = range {
        grids.push(parse_n_range(&r)?);
    }
    Ok(if grids.is_empty() {
        default_n_grid(d)
    } else {
        merge_grids(grids)
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Sweep { common, n_grid, n_range } => {
            let r = common.resolve()?;
            let cfg = SweepConfig {
                d: r.d,
                sigma: r.sigma,
                beta_norm: r.beta_norm,
                beta_mode: r.beta_mode,
                n_grid: resolve_grid(r.d, &n_grid, &n_range, &r.file)?,
                trials: r.trials.unwrap_or(DEFAULT_TRIALS),
                base_seed: r.seed,
                parallelism: r.threads,
                output_path: r.out.unwrap_or_else(|| PathBuf::from(format!("sweep_d{}.csv", r.d))),
            };
            let rows = run_sweep(&cfg)?;
            let failed = rows.iter().filter(|row| row.error.is_some()).count();
            for row in &rows {
                match (&row.summary, &row.error) {
                    (Some(s), _) => println!(
                        "n={:>6} gamma={:.3} excess_mean={:.6e} excess_median={:.6e} theory={} ({} ms)",
                        row.n,
                        row.gamma,
                        s.excess_mean,
                        s.excess_median,
                        row.theory.map_or("-".to_string(), |t| format!("{:.6e}", t.excess)),
                        row.wall_time_ms
                    ),
                    (None, Some(e)) => println!("n={:>6} error: {e}", row.n),
                    (None, None) => unreachable!("row without summary carries an error"),
                }
            }
            println!("wrote {}", cfg.output_path.display());
            if failed > 0 {
                eprintln!("{failed} row(s) failed");
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::TraceGrowth { common, n_max } => {
            let r = common.resolve()?;
            let n_max = match n_max {
                Some(v) => v,
                None => r.file.get("n-max")?.unwrap_or(3 * r.d / 4),
            };
            let cfg = TraceGrowthConfig {
                d: r.d,
                n_max,
                trials: r.trials.unwrap_or(200),
                base_seed: r.seed,
                parallelism: r.threads,
                output_path: Some(r.out.unwrap_or_else(|| PathBuf::from(format!("trace_growth_d{}.csv", r.d)))),
            };
            let table = run_trace_growth(&cfg)?;
            let last = table.rows.last().expect("n_max + 1 rows");
            println!(
                "d={} n={} mean trace={:.6} recursion={:.6} asymptote={:.6}",
                table.d,
                last.n,
                last.trace_mean.unwrap_or(f64::NAN),
                last.trace_recursion,
                last.trace_asymptotic
            );
            println!(
                "worst identity error {:.3e}, {} flagged step(s)",
                table.max_identity_rel_err(),
                table.flagged()
            );
            println!("wrote {}", cfg.output_path.as_ref().unwrap().display());
        }
        Command::Conditioning { common } => {
            let r = common.resolve()?;
            let report = run_conditioning_demo(r.d, r.seed)?;
            let json = serde_json::to_string_pretty(&report)?;
            println!("{json}");
            if let Some(out) = r.out {
                std::fs::write(&out, json + "\n").with_context(|| format!("writing {}", out.display()))?;
            }
            if !report.bound_holds {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Verify { common } => {
            let r = common.resolve()?;
            let cases = r.trials.unwrap_or(DEFAULT_VERIFY_CASES);
            let report = verify_identities(cases, r.seed)?;
            for c in &report.checks {
                println!(
                    "{:<20} {:>5} cases  {:>5} pass  {:>3} fail  worst {:.3e} (tol {:.1e})",
                    c.name, c.cases, c.passed, c.failed, c.worst_error, c.tolerance
                );
            }
            if let Some(out) = r.out {
                std::fs::write(&out, serde_json::to_string_pretty(&report)? + "\n")
                    .with_context(|| format!("writing {}", out.display()))?;
            }
            if !report.all_passed() {
                eprintln!("verification failed");
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Theory { common, n_grid, n_range } => {
            let r = common.resolve()?;
            let grid = resolve_grid(r.d, &n_grid, &n_range, &r.file)?;
            if grid.contains(&0) {
                bail!("sample counts must be positive");
            }
            let rows = theory_table(r.d, r.beta_norm, r.sigma, &grid);
            match r.out {
                Some(out) => {
                    write_theory_table(&rows, &out)?;
                    println!("wrote {}", out.display());
                }
                None => {
                    for row in rows {
                        println!(
                            "n={:>6} gamma={:.3} bias={} variance={} excess={}",
                            row.n,
                            row.gamma,
                            fmt(row.bias_sq),
                            fmt(row.variance),
                            fmt(row.excess)
                        );
                    }
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn fmt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.6e}"))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
