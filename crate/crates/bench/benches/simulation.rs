use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use risctl_bench::{catalog, setup};
use risctl_core::metrics::simulate_trials;
use risctl_core::*;

fn channel(c: &mut Criterion) {
    let mut group = c.benchmark_group("channel");
    for n in [16usize, 100, 256] {
        let ch = sample_realization(n, 1.0, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let cfg = optimal_config(&ch, 2).unwrap();
        group.bench_with_input(BenchmarkId::new("effective_snr", n), &n, |b, _| {
            b.iter(|| effective_snr(black_box(&ch), black_box(&cfg)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("optimal_config", n), &n, |b, _| {
            b.iter(|| optimal_config(black_box(&ch), 2).unwrap())
        });
    }
    group.finish();
}

fn trials(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate_trials_1000");
    group.sample_size(20);
    let s = setup(1000);
    for scheme in Scheme::ALL {
        let p = SchemeParams::new(scheme);
        group.bench_function(scheme.as_str(), |b| {
            b.iter(|| simulate_trials(black_box(&p), &s).unwrap())
        });
    }
    group.finish();
}

fn reliability(c: &mut Criterion) {
    let axis: Vec<f64> = (0..=30).map(f64::from).collect();
    let cat = catalog(&SchemeParams::new(Scheme::Oce));
    c.bench_function("reliability_grid_31x31", |b| {
        b.iter(|| reliability_grid(black_box(&cat), ControlMode::InBand, &axis, &axis, 84).unwrap())
    });
}

criterion_group!(benches, channel, trials, reliability);
criterion_main!(benches);
