use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fastcorr::cli::{equivalence_trial, Solver};
use fastcorr::parallel::{map_trials, Execution};
use fastcorr::sensing::derive_seed;
use fastcorr::TransformKind;

// Sequential versus rayon execution of the same equivalence campaign.
fn campaign(c: &mut Criterion) {
    let trials = 64;
    let mut group = c.benchmark_group("campaign/omp/fourier/N=1024,M=256,K=8");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_function(BenchmarkId::from_parameter(format!("{exec:?}")), |b| {
            b.iter(|| {
                map_trials(trials, exec, |i| {
                    equivalence_trial(Solver::Omp, TransformKind::Fourier, 1024, 256, 8, 0.0, derive_seed(9, i as u64))
                        .unwrap()
                        .mismatch
                })
            })
        });
    }
    group.finish();

    let mut group = c.benchmark_group("campaign/cosamp/hadamard/N=1024,M=128,K=4");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_function(BenchmarkId::from_parameter(format!("{exec:?}")), |b| {
            b.iter(|| {
                black_box(map_trials(trials, exec, |i| {
                    equivalence_trial(Solver::Cosamp, TransformKind::Hadamard, 1024, 128, 4, 0.0, derive_seed(10, i as u64))
                        .unwrap()
                        .max_deviation
                }))
            })
        });
    }
    group.finish();
}

criterion_group!(benches, campaign);
criterion_main!(benches);
