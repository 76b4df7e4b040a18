//! The four base learners behind one probability contract.
//!
//! Rough costs for n training rows, d features, T trees, k neighbours and
//! an MLP with W weights trained for E epochs:
//!
//! | model | training            | prediction per row | storage   |
//! |-------|---------------------|--------------------|-----------|
//! | DT    | O(d · n log n · depth) | O(depth)        | O(nodes)  |
//! | RF    | T × DT on √d features | O(T · depth)     | O(T · nodes) |
//! | KNN   | O(1)                | O(n · d)           | O(n · d)  |
//! | MLP   | O(E · n · W)        | O(W)               | O(W)      |
//!
//! The weighted vote adds O(models) per row on top of the base predictions.

pub mod forest;
pub mod knn;
pub mod mlp;
pub mod tree;

use serde::{Deserialize, Serialize};

pub use forest::{RandomForest, RfParams};
pub use knn::{Knn, KnnParams};
pub use mlp::{Mlp, MlpParams};
pub use tree::{DecisionTree, DtParams};

use crate::error::Result;
use crate::matrix::Matrix;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Dt,
    Rf,
    Knn,
    Mlp,
}

impl ModelKind {
    /// Ensemble order: DT, RF, KNN, MLP.
    pub const ALL: [ModelKind; 4] = [ModelKind::Dt, ModelKind::Rf, ModelKind::Knn, ModelKind::Mlp];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Dt => "dt",
            ModelKind::Rf => "rf",
            ModelKind::Knn => "knn",
            ModelKind::Mlp => "mlp",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum TrainedModel {
    DecisionTree(DecisionTree),
    RandomForest(RandomForest),
    Knn(Knn),
    Mlp(Mlp),
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedModel::DecisionTree(_) => ModelKind::Dt,
            TrainedModel::RandomForest(_) => ModelKind::Rf,
            TrainedModel::Knn(_) => ModelKind::Knn,
            TrainedModel::Mlp(_) => ModelKind::Mlp,
        }
    }

    /// P(class = 1) for every row.
    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<f64>> {
        match self {
            TrainedModel::DecisionTree(m) => m.predict_proba(x),
            TrainedModel::RandomForest(m) => m.predict_proba(x),
            TrainedModel::Knn(m) => m.predict_proba(x),
            TrainedModel::Mlp(m) => m.predict_proba(x),
        }
    }

    pub fn predict(&self, x: &Matrix, threshold: f64) -> Result<Vec<u8>> {
        Ok(predict_labels(&self.predict_proba(x)?, threshold))
    }
}

/// Label 1 iff the probability reaches the threshold.
pub fn predict_labels(proba: &[f64], threshold: f64) -> Vec<u8> {
    proba.iter().map(|&p| (p >= threshold) as u8).collect()
}

pub fn train_decision_tree(x: &Matrix, y: &[u8], params: &DtParams) -> Result<TrainedModel> {
    tree::fit(x, y, params).map(TrainedModel::DecisionTree)
}

pub fn train_random_forest(x: &Matrix, y: &[u8], params: &RfParams) -> Result<TrainedModel> {
    forest::fit(x, y, params).map(TrainedModel::RandomForest)
}

pub fn train_knn(x: &Matrix, y: &[u8], params: &KnnParams) -> Result<TrainedModel> {
    knn::fit(x, y, params).map(TrainedModel::Knn)
}

pub fn train_mlp(x: &Matrix, y: &[u8], params: &MlpParams) -> Result<TrainedModel> {
    mlp::fit(x, y, params).map(TrainedModel::Mlp)
}

/// Hyperparameters for all four learners. Seeds inside are ignored by
/// [`ModelParams::train`], which derives them from the seed it is given.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelParams {
    pub dt: DtParams,
    pub rf: RfParams,
    pub knn: KnnParams,
    pub mlp: MlpParams,
}

impl ModelParams {
    pub fn train(&self, kind: ModelKind, x: &Matrix, y: &[u8], seed_value: u64) -> Result<TrainedModel> {
        let s = seed::derive_seed(seed_value, kind.name(), 0);
        match kind {
            ModelKind::Dt => train_decision_tree(x, y, &DtParams { seed: s, ..self.dt }),
            ModelKind::Rf => train_random_forest(x, y, &RfParams { seed: s, ..self.rf }),
            ModelKind::Knn => train_knn(x, y, &self.knn),
            ModelKind::Mlp => train_mlp(
                x,
                y,
                &MlpParams {
                    seed: s,
                    ..self.mlp.clone()
                },
            ),
        }
    }

    /// Trains DT, RF, KNN and MLP in that order.
    pub fn train_all(&self, x: &Matrix, y: &[u8], seed_value: u64) -> Result<Vec<TrainedModel>> {
        crate::par::try_map_indexed(4, |i| self.train(ModelKind::ALL[i], x, y, seed_value))
    }
}
