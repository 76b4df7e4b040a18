//! Stratified k-fold evaluation, metrics, ROC/AUC and the run report.

pub mod cv;
pub mod folds;
pub mod metrics;
pub mod roc;

pub use cv::{cross_validate, CvConfig, EvaluationReport, GridSettings};
pub use folds::{stratified_holdout, stratified_kfold, FoldPlan};
pub use metrics::{
    confusion, label_errors, metric_set, metrics_from_confusion, regression_errors, ClassificationScores,
    ConfusionMatrix, MetricSet,
};
pub use roc::{auc, roc_curve, RocPoint};
