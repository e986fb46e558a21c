use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ipdsaw_core::free_energy::excess_free_energy;
use ipdsaw_core::ipsaw::enumerate_family;
use ipdsaw_core::partition::{dp_log_z, walk_repr_log_z};
use ipdsaw_core::sampler::sample_mcmc;
use ipdsaw_core::wulff::wulff_curve;
use ipdsaw_core::{ExactSampler, Family, McmcParams, ModelParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn partition(c: &mut Criterion) {
    let mut g = c.benchmark_group("partition");
    for l in [256usize, 1024] {
        g.bench_with_input(BenchmarkId::new("stretch_dp", l), &l, |b, &l| b.iter(|| dp_log_z(black_box(l), 1.0).unwrap()));
    }
    let p = ModelParams::new(1.0).unwrap();
    g.bench_function("walk_table/256", |b| b.iter(|| walk_repr_log_z(black_box(256), &p).unwrap()));
    g.finish();
}

fn free_energy(c: &mut Criterion) {
    let mut g = c.benchmark_group("free_energy");
    for beta in [0.5, 1.1] {
        let p = ModelParams::new(beta).unwrap();
        g.bench_with_input(BenchmarkId::new("excess", beta), &p, |b, p| b.iter(|| excess_free_energy(black_box(p)).unwrap()));
    }
    g.finish();
}

fn sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("sampling");
    let p = ModelParams::new(2.0).unwrap();
    g.bench_function("exact_table/512", |b| b.iter(|| ExactSampler::new(black_box(512), &p).unwrap()));
    let mut sampler = ExactSampler::new(1024, &p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    g.bench_function("exact_draw/1024", |b| b.iter(|| sampler.sample(&mut rng)));
    let schedule = McmcParams {
        samples: 100,
        burn_in: 0,
        thin: 100,
    };
    g.bench_function("mcmc_10k_proposals/256", |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        b.iter(|| sample_mcmc(256, 2.0, &mut rng, schedule).unwrap())
    });
    g.finish();
}

fn shapes(c: &mut Criterion) {
    let mut g = c.benchmark_group("shapes");
    let p = ModelParams::new(2.0).unwrap();
    g.bench_function("wulff_curve/101", |b| b.iter(|| wulff_curve(black_box(&p), 101).unwrap()));
    g.bench_function("enumerate_ne/12", |b| b.iter(|| enumerate_family(Family::Ne, black_box(12)).unwrap()));
    g.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10).measurement_time(Duration::from_secs(5));
    targets = partition, free_energy, sampling, shapes
}
criterion_main!(benches);
