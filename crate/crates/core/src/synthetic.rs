//! Seeded Gaussian two-blob datasets used by the tests, benches and the
//! `synth` command.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::matrix::Matrix;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlobSpec {
    pub n_normal: usize,
    pub n_fraud: usize,
    pub n_features: usize,
    /// Distance between the class means along every axis, in units of the
    /// (unit) per-axis standard deviation.
    pub separation: f64,
}

impl BlobSpec {
    /// 1000 normal to 50 fraudulent samples with overlapping classes.
    pub fn imbalanced() -> Self {
        BlobSpec {
            n_normal: 1000,
            n_fraud: 50,
            n_features: 5,
            separation: 2.0,
        }
    }

    /// Same shape as [`BlobSpec::imbalanced`] but the blobs are ten standard
    /// deviations apart on every axis, so any sensible model is perfect.
    pub fn separable() -> Self {
        BlobSpec {
            separation: 10.0,
            ..BlobSpec::imbalanced()
        }
    }

    pub fn balanced(per_class: usize) -> Self {
        BlobSpec {
            n_normal: per_class,
            n_fraud: per_class,
            n_features: 2,
            separation: 8.0,
        }
    }

    pub fn with_separation(mut self, separation: f64) -> Self {
        self.separation = separation;
        self
    }

    pub fn with_features(mut self, n_features: usize) -> Self {
        self.n_features = n_features;
        self
    }
}

/// Class 0 is centred at `-separation/2` on every axis and class 1 at
/// `+separation/2`. Rows are shuffled.
pub fn two_blobs(spec: &BlobSpec, seed_value: u64) -> Dataset {
    let mut rng = seed::rng_for(seed_value, "two_blobs", 0);
    let n = spec.n_normal + spec.n_fraud;
    let mut labels: Vec<u8> = std::iter::repeat_n(0u8, spec.n_normal)
        .chain(std::iter::repeat_n(1u8, spec.n_fraud))
        .collect();
    use rand::seq::SliceRandom;
    labels.shuffle(&mut rng);
    let half = spec.separation / 2.0;
    let mut data = Vec::with_capacity(n * spec.n_features);
    for &l in &labels {
        let centre = if l == 1 { half } else { -half };
        for _ in 0..spec.n_features {
            let z: f64 = rng.sample(StandardNormal);
            data.push(centre + z);
        }
    }
    let names = (1..=spec.n_features).map(|j| format!("V{j}")).collect();
    Dataset::new(Matrix::new(n, spec.n_features, data).expect("shape"), labels, names).expect("valid")
}
