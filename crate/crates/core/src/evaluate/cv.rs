use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::folds::{stratified_holdout, stratified_kfold};
use super::metrics::{metric_set, ConfusionMatrix, MetricSet};
use super::roc::{roc_curve, RocPoint};
use crate::classifiers::{predict_labels, ModelKind, ModelParams, TrainedModel};
use crate::data::Dataset;
use crate::ensemble::{
    base_probabilities, combine, grid_search_weights, normalize_weights, EnsembleWeights, GridRow, SelectionMetric,
    WeightGrid,
};
use crate::error::{Error, Result};
use crate::preprocess::fit_scaler;
use crate::{par, seed};

pub const ENSEMBLE_NAME: &str = "ens";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSettings {
    pub values: Vec<f64>,
    pub metric: SelectionMetric,
    /// Re-run the search inside every fold instead of once on fold 0.
    pub per_fold: bool,
    pub validation_fraction: f64,
}

impl Default for GridSettings {
    fn default() -> Self {
        GridSettings {
            values: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            metric: SelectionMetric::MacroF1,
            per_fold: false,
            validation_fraction: 0.2,
        }
    }
}

impl GridSettings {
    pub fn grid(&self) -> WeightGrid {
        WeightGrid::uniform(self.values.clone(), self.metric)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvConfig {
    pub folds: usize,
    pub seed: u64,
    pub models: ModelParams,
    pub grid: GridSettings,
    pub threshold: f64,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: 10,
            seed: 0,
            models: ModelParams::default(),
            grid: GridSettings::default(),
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResult {
    pub model: String,
    pub confusion: ConfusionMatrix,
    pub metrics: MetricSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub weights: EnsembleWeights,
    pub models: Vec<ModelResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateMetrics {
    pub mean: MetricSet,
    /// population standard deviation across folds
    pub std: MetricSet,
    /// `mean` in percent, two decimals
    pub mean_percent: MetricSet,
    /// confusion counts summed over folds
    pub pooled_confusion: ConfusionMatrix,
}

/// One run of the weight search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSelection {
    /// fold whose inner validation split was searched
    pub fold: usize,
    pub weights: EnsembleWeights,
    pub normalized: [f64; 4],
    pub score: f64,
    pub accuracy: f64,
    pub equal_weights_score: f64,
    pub n_validation: usize,
    #[serde(skip)]
    pub table: Vec<GridRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_ms: u64,
    pub weight_search_ms: u64,
    pub folds_ms: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub config: serde_json::Value,
    pub seed: u64,
    pub folds: Vec<FoldReport>,
    /// keyed by model name (`dt`, `rf`, `knn`, `mlp`, `ens`)
    pub aggregate: BTreeMap<String, AggregateMetrics>,
    pub ensemble_weights: Vec<WeightSelection>,
    pub timings_ms: Timings,
    /// ROC over the pooled out-of-fold scores, per model; exported as CSV.
    #[serde(skip)]
    pub roc: BTreeMap<String, Vec<RocPoint>>,
}

impl EvaluationReport {
    pub fn model_names() -> Vec<&'static str> {
        let mut v: Vec<&str> = ModelKind::ALL.iter().map(|k| k.name()).collect();
        v.push(ENSEMBLE_NAME);
        v
    }

    pub fn mean(&self, model: &str) -> Option<&MetricSet> {
        self.aggregate.get(model).map(|a| &a.mean)
    }

    /// Per-fold values of one model, in fold order.
    pub fn fold_metrics(&self, model: &str) -> Vec<MetricSet> {
        self.folds
            .iter()
            .filter_map(|f| f.models.iter().find(|m| m.model == model).map(|m| m.metrics))
            .collect()
    }

    /// Serialized report without the `timings_ms` key, for comparing runs.
    pub fn without_timings(&self) -> Result<serde_json::Value> {
        let mut v = serde_json::to_value(self)?;
        if let Some(obj) = v.as_object_mut() {
            obj.remove("timings_ms");
        }
        Ok(v)
    }
}

struct FoldOutcome {
    report: FoldReport,
    test: Vec<usize>,
    /// out-of-fold probabilities for dt, rf, knn, mlp, ens
    proba: Vec<Vec<f64>>,
    millis: u64,
}

/// Fits the scaler on `train`, trains the four models on it and returns
/// them with the standardized `other` matrix.
fn fit_on(
    data: &Dataset,
    train: &[usize],
    other: &[usize],
    params: &ModelParams,
    seed_value: u64,
) -> Result<(Vec<TrainedModel>, crate::matrix::Matrix)> {
    let x_train = data.features.select_rows(train);
    let scaler = fit_scaler(&x_train)?;
    let x_train = scaler.transform(&x_train)?;
    let x_other = scaler.transform(&data.features.select_rows(other))?;
    let y_train = crate::matrix::select(&data.labels, train);
    let models = params.train_all(&x_train, &y_train, seed_value)?;
    Ok((models, x_other))
}

/// Grid search on a stratified inner split of `train`.
pub fn select_weights(data: &Dataset, train: &[usize], config: &CvConfig, fold: usize) -> Result<WeightSelection> {
    let inner_seed = seed::derive_seed(config.seed, "inner_split", fold as u64);
    let y_train = crate::matrix::select(&data.labels, train);
    let (inner_train, inner_val) = stratified_holdout(&y_train, config.grid.validation_fraction, inner_seed)?;
    let inner_train: Vec<usize> = inner_train.iter().map(|&i| train[i]).collect();
    let inner_val: Vec<usize> = inner_val.iter().map(|&i| train[i]).collect();
    let model_seed = seed::derive_seed(config.seed, "inner_models", fold as u64);
    let (models, x_val) = fit_on(data, &inner_train, &inner_val, &config.models, model_seed)?;
    let y_val = crate::matrix::select(&data.labels, &inner_val);
    let result = grid_search_weights(&models, &x_val, &y_val, &config.grid.grid())?;
    let equal_weights_score = match result.score_of(&EnsembleWeights::EQUAL) {
        Some(s) => s,
        None => {
            // equal weights may fall outside a custom grid
            let base = base_probabilities(&models, &x_val)?;
            let single = crate::ensemble::grid_search_on_probabilities(
                &base,
                &y_val,
                &WeightGrid {
                    candidates: [vec![0.25], vec![0.25], vec![0.25], vec![0.25]],
                    metric: config.grid.metric,
                },
            )?;
            single.score
        }
    };
    Ok(WeightSelection {
        fold,
        weights: result.best,
        normalized: normalize_weights(result.best.values())?,
        score: result.score,
        accuracy: result.accuracy,
        equal_weights_score,
        n_validation: inner_val.len(),
        table: result.table,
    })
}

fn evaluate_fold(
    data: &Dataset,
    train: &[usize],
    test: &[usize],
    weights: EnsembleWeights,
    config: &CvConfig,
    fold: usize,
) -> Result<FoldOutcome> {
    let start = Instant::now();
    let fold_seed = seed::derive_seed(config.seed, "fold_models", fold as u64);
    let (models, x_test) = fit_on(data, train, test, &config.models, fold_seed)?;
    let y_test = crate::matrix::select(&data.labels, test);
    let mut proba = base_probabilities(&models, &x_test)?;
    proba.push(combine(&proba, &weights)?);
    let mut results = Vec::with_capacity(5);
    for (name, p) in EvaluationReport::model_names().into_iter().zip(&proba) {
        let pred = predict_labels(p, config.threshold);
        let (confusion, metrics) = metric_set(&y_test, &pred, p)?;
        results.push(ModelResult {
            model: name.to_string(),
            confusion,
            metrics,
        });
    }
    Ok(FoldOutcome {
        report: FoldReport {
            fold,
            n_train: train.len(),
            n_test: test.len(),
            weights,
            models: results,
        },
        test: test.to_vec(),
        proba,
        millis: start.elapsed().as_millis() as u64,
    })
}

fn aggregate(folds: &[FoldReport], model: &str) -> AggregateMetrics {
    let rows: Vec<(ConfusionMatrix, [f64; 8])> = folds
        .iter()
        .filter_map(|f| f.models.iter().find(|m| m.model == model))
        .map(|m| (m.confusion, m.metrics.values()))
        .collect();
    let n = rows.len() as f64;
    let mut mean = [0.0; 8];
    for (_, v) in &rows {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = [0.0; 8];
    for (_, v) in &rows {
        for ((s, x), m) in var.iter_mut().zip(v).zip(&mean) {
            *s += (x - m) * (x - m);
        }
    }
    let mean = MetricSet::from_values(mean);
    AggregateMetrics {
        mean,
        std: MetricSet::from_values(var.map(|s| (s / n).sqrt())),
        mean_percent: mean.map(|v| (v * 10_000.0).round() / 100.0),
        pooled_confusion: rows.iter().fold(ConfusionMatrix::default(), |acc, (c, _)| acc.add(c)),
    }
}

/// Runs stratified k-fold evaluation of the four base models and the
/// weighted ensemble. Scaling is fitted on each training fold only. The
/// ensemble weights come from a grid search on an inner validation split
/// of the training data, never from the test fold.
pub fn cross_validate(data: &Dataset, config: &CvConfig) -> Result<EvaluationReport> {
    let start = Instant::now();
    if !(config.threshold > 0.0 && config.threshold < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold must be in (0,1), got {}",
            config.threshold
        )));
    }
    let plan = stratified_kfold(
        &data.labels,
        config.folds,
        seed::derive_seed(config.seed, "cv_folds", 0),
    )?;

    let search_start = Instant::now();
    let selections: Vec<WeightSelection> = if config.grid.per_fold {
        par::try_map_indexed(plan.k, |f| {
            select_weights(data, &plan.train_indices(f), config, f).map_err(|e| Error::Fold {
                fold: f,
                source: Box::new(e),
            })
        })?
    } else {
        vec![
            select_weights(data, &plan.train_indices(0), config, 0).map_err(|e| Error::Fold {
                fold: 0,
                source: Box::new(e),
            })?,
        ]
    };
    let weight_search_ms = search_start.elapsed().as_millis() as u64;

    let outcomes = par::try_map_indexed(plan.k, |f| {
        let weights = selections[if config.grid.per_fold { f } else { 0 }].weights;
        evaluate_fold(data, &plan.train_indices(f), &plan.test_indices(f), weights, config, f).map_err(|e| {
            Error::Fold {
                fold: f,
                source: Box::new(e),
            }
        })
    })?;

    let names = EvaluationReport::model_names();
    let mut pooled = vec![vec![0.0; data.n_samples()]; names.len()];
    for o in &outcomes {
        for (m, p) in o.proba.iter().enumerate() {
            for (&i, &v) in o.test.iter().zip(p) {
                pooled[m][i] = v;
            }
        }
    }
    let mut roc = BTreeMap::new();
    for (name, scores) in names.iter().zip(&pooled) {
        roc.insert(name.to_string(), roc_curve(&data.labels, scores)?);
    }

    let folds: Vec<FoldReport> = outcomes.iter().map(|o| o.report.clone()).collect();
    let aggregate = names.iter().map(|n| (n.to_string(), aggregate(&folds, n))).collect();
    Ok(EvaluationReport {
        config: serde_json::to_value(config)?,
        seed: config.seed,
        folds,
        aggregate,
        ensemble_weights: selections,
        timings_ms: Timings {
            total_ms: start.elapsed().as_millis() as u64,
            weight_search_ms,
            folds_ms: outcomes.iter().map(|o| o.millis).collect(),
        },
        roc,
    })
}

pub fn write_roc_csv<W: std::io::Write>(points: &[RocPoint], mut out: W) -> std::io::Result<()> {
    writeln!(out, "fpr,tpr")?;
    for p in points {
        writeln!(out, "{},{}", p.fpr, p.tpr)?;
    }
    Ok(())
}

pub fn read_roc_csv<R: std::io::Read>(input: R) -> Result<Vec<RocPoint>> {
    let mut rdr = csv::Reader::from_reader(input);
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}
