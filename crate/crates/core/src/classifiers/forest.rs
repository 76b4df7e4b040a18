use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::tree::{build_tree, DecisionTree, DtParams, FeatureSampling};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::{par, seed};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RfParams {
    pub n_trees: usize,
    /// Features drawn per split; `None` means ⌊√d⌋ (at least 1).
    pub max_features: Option<usize>,
    pub bootstrap: bool,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub seed: u64,
}

impl Default for RfParams {
    fn default() -> Self {
        RfParams {
            n_trees: 100,
            max_features: None,
            bootstrap: true,
            max_depth: None,
            min_samples_split: 2,
            seed: 0,
        }
    }
}

impl RfParams {
    fn tree_params(&self) -> DtParams {
        DtParams {
            max_depth: self.max_depth,
            min_samples_split: self.min_samples_split,
            seed: self.seed,
        }
    }

    pub fn resolved_max_features(&self, n_features: usize) -> usize {
        self.max_features
            .unwrap_or_else(|| (n_features as f64).sqrt().floor() as usize)
            .clamp(1, n_features.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub n_features: usize,
    pub trees: Vec<DecisionTree>,
}

impl RandomForest {
    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<f64>> {
        x.check_cols(self.n_features)?;
        let mut sum = vec![0.0; x.n_rows()];
        for tree in &self.trees {
            for (s, p) in sum.iter_mut().zip(tree.predict_proba(x)?) {
                *s += p;
            }
        }
        let n = self.trees.len() as f64;
        Ok(sum.into_iter().map(|s| s / n).collect())
    }
}

/// Each tree draws its bootstrap sample and split features from a stream
/// keyed by `(seed, tree index)`, so the forest does not depend on how
/// trees are scheduled across threads.
pub fn fit(x: &Matrix, y: &[u8], params: &RfParams) -> Result<RandomForest> {
    if params.n_trees == 0 {
        return Err(Error::InvalidParameter("n_trees must be positive".into()));
    }
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = x.n_rows();
    let size = params.resolved_max_features(x.n_cols());
    let trees = par::try_map_indexed(params.n_trees, |t| {
        let mut rng = seed::rng_for(params.seed, "random_forest_tree", t as u64);
        let rows: Vec<usize> = if params.bootstrap {
            (0..n).map(|_| rng.random_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        build_tree(
            x,
            y,
            rows,
            params.tree_params(),
            FeatureSampling::Subset { size, rng: &mut rng },
        )
    })?;
    Ok(RandomForest {
        n_features: x.n_cols(),
        trees,
    })
}
