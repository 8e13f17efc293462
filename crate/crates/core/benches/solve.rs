use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use svc_knapsack::eval::evaluate_seeds;
use svc_knapsack::io::{generate, GenParams};
use svc_knapsack::report::run;
use svc_knapsack::SolverConfig;

// threads = 1 takes the sequential path; 0 uses every core when the
// `parallel` feature is on and falls back to sequential otherwise
const MODES: [(&str, usize); 2] = [("sequential", 1), ("parallel", 0)];

fn config(threads: usize) -> SolverConfig {
    SolverConfig {
        threads,
        ..SolverConfig::default()
    }
}

fn large_instance(c: &mut Criterion) {
    let params = GenParams {
        services: 3000,
        depth: 12,
        concepts: 1300,
        fan_in: (1, 5),
        fan_out: (1, 4),
        planted: Some(10),
        ..GenParams::default()
    };
    let bundle = generate(7, &params).unwrap().resolve().unwrap();
    let mut group = c.benchmark_group("solve_3000_services");
    group.sample_size(20);
    for (name, threads) in MODES {
        let cfg = config(threads);
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| black_box(run(&bundle, cfg).unwrap().result.c_services()))
        });
    }
    group.finish();
}

fn batch_evaluation(c: &mut Criterion) {
    let params = GenParams::default();
    let mut group = c.benchmark_group("evaluate_64_seeds");
    group.sample_size(10);
    for (name, threads) in MODES {
        let cfg = config(threads);
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| black_box(evaluate_seeds(0..64, &params, cfg, 14).unwrap().len()))
        });
    }
    group.finish();
}

criterion_group!(benches, large_instance, batch_evaluation);
criterion_main!(benches);
