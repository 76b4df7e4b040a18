//! Saved-model document: a JSON envelope holding a format version, a
//! SHA-256 checksum and the payload the checksum covers, byte for byte.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};

use crate::classifiers::TrainedModel;
use crate::ensemble::{base_probabilities, combine, EnsembleWeights};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::preprocess::{LabelMap, ScalerParams};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedModel {
    pub feature_names: Vec<String>,
    pub label_column: String,
    pub scaler: ScalerParams,
    pub label_map: LabelMap,
    /// DT, RF, KNN, MLP
    pub models: Vec<TrainedModel>,
    pub weights: EnsembleWeights,
    pub threshold: f64,
    pub config: serde_json::Value,
}

#[derive(Serialize, Deserialize)]
struct Envelope<'a> {
    format_version: u32,
    checksum: String,
    #[serde(borrow)]
    payload: &'a RawValue,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl SavedModel {
    /// Ensemble P(class = 1) on raw (unscaled) features in training order.
    pub fn predict_proba(&self, raw_features: &Matrix) -> Result<Vec<f64>> {
        let x = self.scaler.transform(raw_features)?;
        combine(&base_probabilities(&self.models, &x)?, &self.weights)
    }

    pub fn to_json(&self) -> Result<String> {
        let payload = serde_json::to_string(self)?;
        let raw = RawValue::from_string(payload)?;
        let env = Envelope {
            format_version: FORMAT_VERSION,
            checksum: sha256_hex(raw.get().as_bytes()),
            payload: &raw,
        };
        Ok(serde_json::to_string(&env)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let env: Envelope = serde_json::from_str(text)?;
        if env.format_version != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion(env.format_version));
        }
        let computed = sha256_hex(env.payload.get().as_bytes());
        if computed != env.checksum {
            return Err(Error::ChecksumMismatch {
                expected: env.checksum,
                computed,
            });
        }
        // Deep trees exceed serde_json's default nesting limit.
        let mut de = serde_json::Deserializer::from_str(env.payload.get());
        de.disable_recursion_limit();
        Ok(SavedModel::deserialize(&mut de)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
