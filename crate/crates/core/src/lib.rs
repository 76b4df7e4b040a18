//! Fraud detection on imbalanced tabular data: instance-hardness
//! undersampling, four base classifiers, a weighted soft-voting ensemble
//! and stratified cross-validated evaluation.
//!
//! With the default `parallel` feature the data-parallel loops (trees,
//! neighbour queries, hardness folds, grid points, CV folds) run on rayon.
//! Without it the same code runs sequentially and yields identical output.

pub mod classifiers;
pub mod config;
pub mod data;
pub mod ensemble;
pub mod error;
pub mod evaluate;
pub mod matrix;
pub mod par;
pub mod persist;
pub mod pipeline;
pub mod preprocess;
pub mod resample;
pub mod seed;
pub mod synthetic;

pub use classifiers::{ModelKind, ModelParams, TrainedModel};
pub use config::PipelineConfig;
pub use data::{Dataset, RawDataset};
pub use ensemble::{combine, grid_search_weights, EnsembleWeights, GridSearchResult, WeightGrid};
pub use error::{Error, ErrorKind, Result};
pub use evaluate::{cross_validate, CvConfig, EvaluationReport};
pub use matrix::Matrix;
pub use persist::SavedModel;
pub use preprocess::{fit_scaler, LabelMap, ScalerParams};
pub use resample::{iht_undersample, ResampleConfig};
