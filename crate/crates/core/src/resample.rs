//! Instance Hardness Threshold undersampling driven by logistic regression.
//!
//! Hardness of a sample is one minus the out-of-fold probability that a
//! logistic model assigns to the sample's true class. Majority samples are
//! removed hardest first until the requested class ratio is reached; the
//! minority class is never touched.

use serde::{Deserialize, Serialize};

use crate::data::class_counts;
use crate::error::{Error, Result};
use crate::evaluate::folds::stratified_kfold;
use crate::matrix::{select, Matrix};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LrConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub seed: u64,
}

impl Default for LrConfig {
    fn default() -> Self {
        LrConfig {
            learning_rate: 0.1,
            epochs: 300,
            l2: 1e-4,
            seed: 0,
        }
    }
}

impl LrConfig {
    fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "l2 must be non-negative, got {}",
                self.l2
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub training_config: LrConfig,
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `-[y ln p + (1-y) ln(1-p)]` computed from the logit without forming `p`.
#[inline]
pub(crate) fn bce_from_logit(z: f64, y: f64) -> f64 {
    // ln(1 + e^z) - y z, stable for large |z|
    let softplus = if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    };
    softplus - y * z
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Mean binary cross-entropy plus `l2/2 * |w|²` (bias unpenalised).
pub fn logistic_loss(weights: &[f64], bias: f64, x: &Matrix, y: &[u8], l2: f64) -> f64 {
    let n = x.n_rows() as f64;
    let data: f64 = x
        .rows()
        .zip(y)
        .map(|(row, &t)| bce_from_logit(dot(weights, row) + bias, t as f64))
        .sum();
    data / n + 0.5 * l2 * dot(weights, weights)
}

/// Analytic gradient of [`logistic_loss`]: `(dw, db)`.
pub fn logistic_gradient(weights: &[f64], bias: f64, x: &Matrix, y: &[u8], l2: f64) -> (Vec<f64>, f64) {
    let n = x.n_rows() as f64;
    let mut gw = vec![0.0; weights.len()];
    let mut gb = 0.0;
    for (row, &t) in x.rows().zip(y) {
        let r = sigmoid(dot(weights, row) + bias) - t as f64;
        for (g, v) in gw.iter_mut().zip(row) {
            *g += r * v;
        }
        gb += r;
    }
    for (g, w) in gw.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
    }
    (gw, gb / n)
}

/// Full-batch gradient descent from zero. Returns the model and the loss
/// before every step plus the final loss (`epochs + 1` values).
pub fn fit_logistic_traced(x: &Matrix, y: &[u8], config: &LrConfig) -> Result<(LogisticModel, Vec<f64>)> {
    config.validate()?;
    if x.n_rows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.n_rows(),
            right: y.len(),
        });
    }
    let [n0, n1] = class_counts(y);
    if n0 == 0 || n1 == 0 {
        return Err(Error::SingleClass);
    }
    let mut w = vec![0.0; x.n_cols()];
    let mut b = 0.0;
    let mut history = Vec::with_capacity(config.epochs + 1);
    for epoch in 0..=config.epochs {
        let loss = logistic_loss(&w, b, x, y, config.l2);
        if !loss.is_finite() || w.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged {
                model: "logistic regression",
                epoch,
            });
        }
        history.push(loss);
        if epoch == config.epochs {
            break;
        }
        let (gw, gb) = logistic_gradient(&w, b, x, y, config.l2);
        for (wi, g) in w.iter_mut().zip(&gw) {
            *wi -= config.learning_rate * g;
        }
        b -= config.learning_rate * gb;
    }
    Ok((
        LogisticModel {
            weights: w,
            bias: b,
            training_config: *config,
        },
        history,
    ))
}

pub fn fit_logistic(x: &Matrix, y: &[u8], config: &LrConfig) -> Result<LogisticModel> {
    fit_logistic_traced(x, y, config).map(|(m, _)| m)
}

impl LogisticModel {
    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<f64>> {
        x.check_cols(self.weights.len())?;
        Ok(x.rows().map(|r| sigmoid(dot(&self.weights, r) + self.bias)).collect())
    }
}

pub fn predict_proba_logistic(model: &LogisticModel, x: &Matrix) -> Result<Vec<f64>> {
    model.predict_proba(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ResampleConfig {
    /// minority : majority after resampling
    pub target_ratio: f64,
    pub cv_folds: usize,
    pub lr: LrConfig,
    pub seed: u64,
}

impl Default for ResampleConfig {
    fn default() -> Self {
        ResampleConfig {
            target_ratio: 1.0,
            cv_folds: 5,
            lr: LrConfig::default(),
            seed: 0,
        }
    }
}

impl ResampleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_ratio > 0.0 && self.target_ratio <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "target_ratio must be in (0, 1], got {}",
                self.target_ratio
            )));
        }
        if self.cv_folds < 2 {
            return Err(Error::InvalidParameter(format!(
                "cv_folds must be at least 2, got {}",
                self.cv_folds
            )));
        }
        self.lr.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardnessScores {
    pub scores: Vec<f64>,
    pub fold_assignment: Vec<usize>,
}

pub fn hardness_scores(x: &Matrix, y: &[u8], config: &ResampleConfig) -> Result<HardnessScores> {
    config.validate()?;
    if x.n_rows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.n_rows(),
            right: y.len(),
        });
    }
    let plan = stratified_kfold(y, config.cv_folds, config.seed)?;
    // LR is deterministic given its data, so fold order cannot change scores.
    let per_fold = par::try_map_indexed(plan.k, |fold| -> Result<(Vec<usize>, Vec<f64>)> {
        let train = plan.train_indices(fold);
        let test = plan.test_indices(fold);
        let model = fit_logistic(&x.select_rows(&train), &select(y, &train), &config.lr)?;
        let proba = model.predict_proba(&x.select_rows(&test))?;
        Ok((test, proba))
    })?;
    let mut scores = vec![0.0; y.len()];
    for (test, proba) in per_fold {
        for (i, p) in test.into_iter().zip(proba) {
            scores[i] = if y[i] == 1 { 1.0 - p } else { p };
        }
    }
    Ok(HardnessScores {
        scores,
        fold_assignment: plan.assignments,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Undersampled {
    pub features: Matrix,
    pub labels: Vec<u8>,
    pub kept_indices: Vec<usize>,
    pub hardness: HardnessScores,
}

/// Which samples survive, given precomputed hardness scores.
pub fn select_by_hardness(y: &[u8], hardness: &[f64], target_ratio: f64) -> Result<Vec<usize>> {
    let [n0, n1] = class_counts(y);
    // Ties in class size: class 0 plays the majority.
    let (majority, n_major, n_minor) = if n1 > n0 { (1u8, n1, n0) } else { (0u8, n0, n1) };
    let target = (n_minor as f64 / target_ratio).round() as usize;
    if target < 1 {
        return Err(Error::UnattainableTarget {
            target,
            available: n_major,
        });
    }
    if target > n_major {
        return Err(Error::UnattainableTarget {
            target,
            available: n_major,
        });
    }
    let mut major: Vec<usize> = (0..y.len()).filter(|&i| y[i] == majority).collect();
    // Hardest first, lower index first among equals.
    major.sort_by(|&a, &b| hardness[b].total_cmp(&hardness[a]).then(a.cmp(&b)));
    let mut removed = vec![false; y.len()];
    for &i in &major[..n_major - target] {
        removed[i] = true;
    }
    Ok((0..y.len()).filter(|&i| !removed[i]).collect())
}

pub fn iht_undersample(x: &Matrix, y: &[u8], config: &ResampleConfig) -> Result<Undersampled> {
    config.validate()?;
    let hardness = hardness_scores(x, y, config)?;
    let kept_indices = select_by_hardness(y, &hardness.scores, config.target_ratio)?;
    Ok(Undersampled {
        features: x.select_rows(&kept_indices),
        labels: select(y, &kept_indices),
        kept_indices,
        hardness,
    })
}

/// One-column CSV of kept row indices.
pub fn write_kept_indices<W: std::io::Write>(indices: &[usize], mut out: W) -> std::io::Result<()> {
    writeln!(out, "index")?;
    for i in indices {
        writeln!(out, "{i}")?;
    }
    Ok(())
}

pub fn read_kept_indices<R: std::io::Read>(input: R) -> Result<Vec<usize>> {
    let mut rdr = csv::Reader::from_reader(input);
    rdr.records()
        .map(|r| {
            let r = r?;
            r.get(0)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::InvalidParameter(format!("bad index row {r:?}")))
        })
        .collect()
}
