use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use slbfgs::analysis::{lemma12_sweep, lemma4_sweep, measure_spectrum, SpectrumBounds};
use slbfgs::experiment::{run_grid, ExperimentConfig, ObjectiveSpec, Problem};
use slbfgs::io::{gen_synthetic_ridge, SyntheticSpec};
use slbfgs::objectives::make_ridge;
use slbfgs::Execution;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn step_size_grid(c: &mut Criterion) {
    let config = ExperimentConfig {
        objective: ObjectiveSpec {
            synthetic: Some(SyntheticSpec { n: 1000, d: 50, cond: 2.5, noise: 0.1, reg: 1e-3, seed: 0 }),
            ..Default::default()
        },
        eta: vec![0.01, 0.02, 0.05, 0.1],
        seeds: vec![0, 1],
        epochs: 3,
        ..Default::default()
    };
    let problem = Problem::build(&config).unwrap();
    let etas = config.etas().unwrap();
    let mut group = c.benchmark_group("grid_8_cells");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| run_grid(&problem, &config, &etas, &config.seeds, exec).unwrap())
        });
    }
    group.finish();
}

fn lemma_sweeps(c: &mut Criterion) {
    let bounds = SpectrumBounds::new(0.1, 10.0);
    let mut group = c.benchmark_group("lemma12_100_memories");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| lemma12_sweep(100, &[10, 20, 50], &[5, 10], bounds, black_box(1), exec).unwrap())
        });
    }
    group.finish();

    let spec = SyntheticSpec { n: 1000, d: 20, cond: 10.0, noise: 0.1, reg: 1e-3, seed: 0 };
    let (data, reference) = gen_synthetic_ridge(&spec).unwrap();
    let obj = make_ridge(data, 1e-3).unwrap();
    let big_lambda = measure_spectrum(&obj, &reference.w_star, Execution::Parallel).unwrap().big_lambda;
    let mut group = c.benchmark_group("lemma4_enumeration");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| lemma4_sweep(&obj, &reference.w_star, big_lambda, 10, black_box(2), exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, step_size_grid, lemma_sweeps);
criterion_main!(benches);
