//! Confusion matrix, the accuracy / precision / recall / F1 family with
//! macro averaging over both classes, and error rates on hard labels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts with class 1 (fraudulent) as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn new(tp: usize, fp: usize, fn_: usize, tn: usize) -> Self {
        ConfusionMatrix { tp, fp, fn_, tn }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn errors(&self) -> usize {
        self.fp + self.fn_
    }

    pub fn add(&self, other: &ConfusionMatrix) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tp + other.tp,
            fp: self.fp + other.fp,
            fn_: self.fn_ + other.fn_,
            tn: self.tn + other.tn,
        }
    }

    /// Scores for class 0 and class 1, in that order.
    pub fn per_class(&self) -> [ClassScores; 2] {
        let positive = ClassScores::from_counts(self.tp, self.fp, self.fn_);
        // Class 0 as positive: its true positives are our true negatives.
        let negative = ClassScores::from_counts(self.tn, self.fn_, self.fp);
        [negative, positive]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ClassScores {
    fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        ClassScores { precision, recall, f1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationScores {
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

/// Full metric row for one model on one fold. All values are fractions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub mae: f64,
    pub mse: f64,
    pub rmse: f64,
    pub auc: f64,
}

impl MetricSet {
    pub const NAMES: [&'static str; 8] = [
        "accuracy",
        "macro_precision",
        "macro_recall",
        "macro_f1",
        "mae",
        "mse",
        "rmse",
        "auc",
    ];

    pub fn values(&self) -> [f64; 8] {
        [
            self.accuracy,
            self.macro_precision,
            self.macro_recall,
            self.macro_f1,
            self.mae,
            self.mse,
            self.rmse,
            self.auc,
        ]
    }

    pub fn from_values(v: [f64; 8]) -> Self {
        MetricSet {
            accuracy: v[0],
            macro_precision: v[1],
            macro_recall: v[2],
            macro_f1: v[3],
            mae: v[4],
            mse: v[5],
            rmse: v[6],
            auc: v[7],
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        MetricSet::from_values(self.values().map(f))
    }
}

pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t == 1, p == 1) {
            (true, true) => cm.tp += 1,
            (false, true) => cm.fp += 1,
            (true, false) => cm.fn_ += 1,
            (false, false) => cm.tn += 1,
        }
    }
    Ok(cm)
}

pub fn metrics_from_confusion(cm: &ConfusionMatrix) -> ClassificationScores {
    let total = cm.total();
    let accuracy = if total == 0 {
        0.0
    } else {
        (cm.tp + cm.tn) as f64 / total as f64
    };
    let [c0, c1] = cm.per_class();
    ClassificationScores {
        accuracy,
        macro_precision: (c0.precision + c1.precision) / 2.0,
        macro_recall: (c0.recall + c1.recall) / 2.0,
        macro_f1: (c0.f1 + c1.f1) / 2.0,
    }
}

/// Mean absolute error, mean squared error and root mean squared error.
pub fn regression_errors(y_true: &[f64], y_pred: &[f64]) -> Result<(f64, f64, f64)> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = y_true.len() as f64;
    let (abs, sq) = y_true.iter().zip(y_pred).fold((0.0, 0.0), |(a, s), (t, p)| {
        let d = t - p;
        (a + d.abs(), s + d * d)
    });
    let mse = sq / n;
    Ok((abs / n, mse, mse.sqrt()))
}

pub fn label_errors(y_true: &[u8], y_pred: &[u8]) -> Result<(f64, f64, f64)> {
    let t: Vec<f64> = y_true.iter().map(|&v| v as f64).collect();
    let p: Vec<f64> = y_pred.iter().map(|&v| v as f64).collect();
    regression_errors(&t, &p)
}

/// Builds the complete metric row from hard predictions and scores.
pub fn metric_set(y_true: &[u8], y_pred: &[u8], scores: &[f64]) -> Result<(ConfusionMatrix, MetricSet)> {
    let cm = confusion(y_true, y_pred)?;
    let c = metrics_from_confusion(&cm);
    let (mae, mse, rmse) = label_errors(y_true, y_pred)?;
    let auc = match super::roc::roc_curve(y_true, scores) {
        Ok(points) => super::roc::auc(&points)?,
        // single-class test fold: AUC is undefined
        Err(Error::SingleClass) => f64::NAN,
        Err(e) => return Err(e),
    };
    Ok((
        cm,
        MetricSet {
            accuracy: c.accuracy,
            macro_precision: c.macro_precision,
            macro_recall: c.macro_recall,
            macro_f1: c.macro_f1,
            mae,
            mse,
            rmse,
            auc,
        },
    ))
}
