//! Standardization and label encoding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Per-column mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub n_fitted: usize,
}

pub fn fit_scaler(features: &Matrix) -> Result<ScalerParams> {
    if features.is_empty() || features.n_cols() == 0 {
        return Err(Error::EmptyInput);
    }
    let n = features.n_rows() as f64;
    let d = features.n_cols();
    let mut means = vec![0.0; d];
    for row in features.rows() {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    means.iter_mut().for_each(|m| *m /= n);
    // Two-pass variance.
    let mut vars = vec![0.0; d];
    for row in features.rows() {
        for ((s, v), m) in vars.iter_mut().zip(row).zip(&means) {
            let c = v - m;
            *s += c * c;
        }
    }
    let stds = vars.into_iter().map(|s| (s / n).sqrt()).collect();
    Ok(ScalerParams {
        means,
        stds,
        n_fitted: features.n_rows(),
    })
}

impl ScalerParams {
    pub fn transform(&self, features: &Matrix) -> Result<Matrix> {
        features.check_cols(self.means.len())?;
        let mut out = features.clone();
        for i in 0..out.n_rows() {
            for ((v, m), s) in out.row_mut(i).iter_mut().zip(&self.means).zip(&self.stds) {
                *v = if *s > 0.0 { (*v - m) / s } else { 0.0 };
            }
        }
        Ok(out)
    }
}

pub fn transform(params: &ScalerParams, features: &Matrix) -> Result<Matrix> {
    params.transform(features)
}

/// Category text to integer code; the code is the position in `categories`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMap {
    categories: Vec<String>,
}

impl LabelMap {
    pub fn from_categories(categories: Vec<String>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        if !categories.iter().all(|c| seen.insert(c.as_str())) {
            return Err(Error::InvalidParameter("label map is not injective".into()));
        }
        Ok(LabelMap { categories })
    }

    /// `"0" -> 0`, `"1" -> 1`, for files that already carry numeric classes.
    pub fn identity() -> Self {
        LabelMap {
            categories: vec!["0".into(), "1".into()],
        }
    }

    /// Picks the identity map for 0/1 labels and encodes anything else.
    /// Fails unless the result is binary.
    pub fn for_labels(labels: &[String]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyInput);
        }
        let map = if labels.iter().all(|l| l == "0" || l == "1") {
            LabelMap::identity()
        } else {
            encode_labels(labels)?.1
        };
        if map.len() > 2 {
            return Err(Error::NotBinary(map.len()));
        }
        Ok(map)
    }

    pub fn code(&self, category: &str) -> Option<usize> {
        self.categories.iter().position(|c| c == category)
    }

    pub fn decode(&self, code: usize) -> Option<&str> {
        self.categories.get(code).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }
}

/// Assigns codes in first-appearance order, except that the pair
/// {normal, fraudulent} (any case) always maps normal to 0.
pub fn encode_labels(raw_labels: &[String]) -> Result<(Vec<usize>, LabelMap)> {
    if raw_labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut categories: Vec<String> = Vec::new();
    for l in raw_labels {
        if !categories.contains(l) {
            categories.push(l.clone());
        }
    }
    if categories.len() == 2 {
        let lower: Vec<String> = categories.iter().map(|c| c.to_lowercase()).collect();
        if lower[0] == "fraudulent" && lower[1] == "normal" {
            categories.swap(0, 1);
        }
    }
    let map = LabelMap { categories };
    let codes = raw_labels
        .iter()
        .map(|l| map.code(l).expect("category collected above"))
        .collect();
    Ok((codes, map))
}
