//! Sequential vs parallel execution of trials and solver batches.
//!
//! `workers = 1` always takes the sequential path; `workers = 0` uses the
//! rayon pool when the `parallel` feature is on.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use beaconloc::constraint::AnnulusConstraint;
use beaconloc::exec::par_map;
use beaconloc::harness::{
    run_sweep, run_trial_traced, Estimator, ExperimentConfig, ScenarioTemplate, SweepAxes, TrialOptions,
};
use beaconloc::solver::{estimate_position, SolverConfig};

fn experiment(workers: usize) -> ExperimentConfig {
    ExperimentConfig {
        template: ScenarioTemplate::default().with_central_obstacle(20.0),
        axes: SweepAxes {
            doi: vec![0.2],
            fading_f: vec![0.1],
            relay: vec![true],
            estimator: vec![Estimator::Convex],
            trajectory_step: Vec::new(),
        },
        trials_per_point: 16,
        base_seed: 1,
        workers,
        solver: SolverConfig::default(),
    }
}

fn constraint_batch() -> Vec<Vec<AnnulusConstraint>> {
    let scenario = ScenarioTemplate::default().instantiate(3);
    let (_, trace) = run_trial_traced(&scenario, &TrialOptions::default()).unwrap();
    trace
        .constraints
        .into_values()
        .filter(|c| !c.is_empty())
        .collect()
}

fn sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep_16_trials");
    group.sample_size(10);
    for (name, workers) in [("sequential", 1), ("parallel", 0)] {
        let cfg = experiment(workers);
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| run_sweep(black_box(cfg)).unwrap())
        });
    }
    group.finish();
}

fn solve_batch(c: &mut Criterion) {
    let batch = constraint_batch();
    let cfg = SolverConfig::default();
    let mut group = c.benchmark_group("solve_batch");
    for (name, workers) in [("sequential", 1), ("parallel", 0)] {
        group.bench_function(name, |b| {
            b.iter(|| {
                par_map(batch.len(), workers, |i| {
                    estimate_position(black_box(&batch[i]), &cfg).unwrap().x_hat
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, sweep, solve_batch);
criterion_main!(benches);
