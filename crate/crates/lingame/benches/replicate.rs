//! Parallel vs sequential replication on a small benchmark grid.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use lingame::bench::{make_counterexample, MPolicy};
use lingame::samplers::SamplerKind;
use lingame::simulator::{replicate, replicate_sequential, RunMatrix, RunParams};

fn small_matrix(n_reps: u32) -> RunMatrix {
    let instance = make_counterexample(2, std::f64::consts::FRAC_PI_6, MPolicy::default()).unwrap();
    RunMatrix {
        instances: vec![instance],
        algorithms: vec![SamplerKind::LinGameC, SamplerKind::LinGame],
        deltas: vec![0.1],
        n_reps,
        master_seed: 2024,
        params: RunParams {
            max_steps: 200_000,
            ..Default::default()
        },
    }
}

fn bench_replicate(c: &mut Criterion) {
    let matrix = small_matrix(8);
    let mut group = c.benchmark_group("replicate");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| black_box(replicate_sequential(black_box(&matrix))))
    });
    group.bench_function("parallel-4", |b| {
        b.iter(|| black_box(replicate(black_box(&matrix), 4)))
    });
    group.finish();
}

criterion_group!(benches, bench_replicate);
criterion_main!(benches);
