use std::path::PathBuf;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ddlab::harness::sweep::compute_sweep;
use ddlab::harness::SweepConfig;
use ddlab::risk::monte_carlo_risk_with;
use ddlab::{BetaMode, Executor, ModelSpec, Parallelism};

fn executors() -> Vec<(&'static str, Executor)> {
    vec![
        ("sequential", Executor::sequential()),
        ("rayon", Executor::new(Parallelism::Auto).expect("global pool")),
    ]
}

fn risk_at_point(c: &mut Criterion) {
    let mut group = c.benchmark_group("monte_carlo_risk");
    group.sample_size(10);
    let spec = ModelSpec::new(200, 0.1, 1.0, BetaMode::FirstAxis).unwrap();
    for n in [100, 200, 300] {
        for (name, exec) in executors() {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, &n| {
                b.iter(|| monte_carlo_risk_with(&spec, n, 64, 7, &exec).unwrap())
            });
        }
    }
    group.finish();
}

fn small_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep_d100");
    group.sample_size(10);
    let cfg = SweepConfig {
        d: 100,
        sigma: 0.1,
        beta_norm: 1.0,
        beta_mode: BetaMode::FirstAxis,
        n_grid: vec![25, 50, 90, 100, 110, 150, 200],
        trials: 32,
        base_seed: 7,
        parallelism: Parallelism::Auto,
        output_path: PathBuf::from("unused.csv"),
    };
    for (name, exec) in executors() {
        group.bench_function(name, |b| b.iter(|| compute_sweep(&cfg, &exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, risk_at_point, small_sweep);
criterion_main!(benches);
