use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 5 }
    }
}

/// Brute-force Euclidean nearest neighbours over the stored training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    pub features: Matrix,
    pub labels: Vec<u8>,
}

pub fn fit(x: &Matrix, y: &[u8], params: &KnnParams) -> Result<Knn> {
    if params.k == 0 || params.k.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "k must be a positive odd integer, got {}",
            params.k
        )));
    }
    if x.n_rows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.n_rows(),
            right: y.len(),
        });
    }
    if params.k > x.n_rows() {
        return Err(Error::InvalidParameter(format!(
            "k = {} exceeds the {} training samples",
            params.k,
            x.n_rows()
        )));
    }
    Ok(Knn {
        k: params.k,
        features: x.clone(),
        labels: y.to_vec(),
    })
}

impl Knn {
    /// Indices of the k nearest stored rows; equal distances go to the
    /// lower stored index.
    pub fn neighbours(&self, query: &[f64]) -> Vec<usize> {
        let mut dist: Vec<(f64, usize)> = self
            .features
            .rows()
            .enumerate()
            .map(|(i, r)| (r.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum(), i))
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < dist.len() {
            dist.select_nth_unstable_by(self.k - 1, cmp);
            dist.truncate(self.k);
        }
        dist.sort_unstable_by(cmp);
        dist.into_iter().map(|(_, i)| i).collect()
    }

    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<f64>> {
        x.check_cols(self.features.n_cols())?;
        Ok(par::map_indexed(x.n_rows(), |i| {
            let ones = self
                .neighbours(x.row(i))
                .into_iter()
                .filter(|&j| self.labels[j] == 1)
                .count();
            ones as f64 / self.k as f64
        }))
    }
}
