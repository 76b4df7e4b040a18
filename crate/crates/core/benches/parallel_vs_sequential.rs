//! Default rayon pool against a single-thread pool on the hot loops.
//! Built with `--no-default-features` both arms run sequentially.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use iht_ensemble::classifiers::{forest, RfParams};
use iht_ensemble::ensemble::{grid_search_on_probabilities, WeightGrid};
use iht_ensemble::evaluate::{cross_validate, CvConfig};
use iht_ensemble::preprocess::fit_scaler;
use iht_ensemble::resample::{hardness_scores, ResampleConfig};
use iht_ensemble::synthetic::{two_blobs, BlobSpec};
use rand::{Rng, SeedableRng};
use rayon::ThreadPool;

fn pools() -> Vec<(&'static str, ThreadPool)> {
    let all = rayon::ThreadPoolBuilder::new().build().unwrap();
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    vec![("pool", all), ("single", one)]
}

fn bench_forest(c: &mut Criterion) {
    let ds = two_blobs(&BlobSpec::balanced(500).with_separation(1.5).with_features(10), 1);
    let params = RfParams {
        n_trees: 50,
        ..RfParams::default()
    };
    let mut group = c.benchmark_group("random_forest_fit");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| forest::fit(&ds.features, &ds.labels, &params).unwrap()))
        });
    }
    group.finish();
}

fn bench_grid(c: &mut Criterion) {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
    let n = 2000;
    let base: Vec<Vec<f64>> = (0..4).map(|_| (0..n).map(|_| rng.random()).collect()).collect();
    let y: Vec<u8> = (0..n).map(|_| rng.random_range(0..2u8)).collect();
    let grid = WeightGrid::default();
    let mut group = c.benchmark_group("weight_grid_search");
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| grid_search_on_probabilities(&base, &y, &grid).unwrap()))
        });
    }
    group.finish();
}

fn bench_hardness(c: &mut Criterion) {
    let ds = two_blobs(&BlobSpec::imbalanced().with_features(20), 3);
    let x = fit_scaler(&ds.features).unwrap().transform(&ds.features).unwrap();
    let config = ResampleConfig::default();
    let mut group = c.benchmark_group("iht_hardness");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| hardness_scores(&x, &ds.labels, &config).unwrap()))
        });
    }
    group.finish();
}

fn bench_cross_validate(c: &mut Criterion) {
    let ds = two_blobs(&BlobSpec::balanced(100).with_separation(2.0).with_features(5), 4);
    let mut config = CvConfig {
        folds: 5,
        ..CvConfig::default()
    };
    config.models.rf.n_trees = 20;
    config.models.mlp.epochs = 30;
    let mut group = c.benchmark_group("cross_validate");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| cross_validate(&ds, &config).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_forest, bench_grid, bench_hardness, bench_cross_validate);
criterion_main!(benches);
