//! Pipeline configuration, read from a TOML file and overridden by flags.
//!
//! ```toml
//! input = "creditcard.csv"
//! label_column = "Class"
//! seed = 42
//! folds = 10
//! out_dir = "out"
//!
//! [resample]
//! enabled = true
//! target_ratio = 1.0
//!
//! [models.rf]
//! n_trees = 100
//!
//! [grid]
//! values = [0.0, 0.25, 0.5, 0.75, 1.0]
//! metric = "macro_f1"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifiers::ModelParams;
use crate::data::DEFAULT_LABEL_COLUMN;
use crate::error::{Error, Result};
use crate::evaluate::{CvConfig, GridSettings};
use crate::resample::{LrConfig, ResampleConfig};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResampleSettings {
    pub enabled: bool,
    pub target_ratio: f64,
    pub cv_folds: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for ResampleSettings {
    fn default() -> Self {
        let d = ResampleConfig::default();
        ResampleSettings {
            enabled: true,
            target_ratio: d.target_ratio,
            cv_folds: d.cv_folds,
            learning_rate: d.lr.learning_rate,
            epochs: d.lr.epochs,
            l2: d.lr.l2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExportSettings {
    pub report: bool,
    pub roc: bool,
    pub grid: bool,
    /// balanced CSV and kept indices from the resampling stage
    pub balanced: bool,
}

impl Default for ExportSettings {
    fn default() -> Self {
        ExportSettings {
            report: true,
            roc: true,
            grid: true,
            balanced: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: Option<PathBuf>,
    pub label_column: String,
    /// Required; there is no clock-based fallback.
    pub seed: Option<u64>,
    pub folds: usize,
    pub resample: ResampleSettings,
    pub models: ModelParams,
    pub grid: GridSettings,
    pub out_dir: PathBuf,
    pub save_model: Option<PathBuf>,
    /// worker threads; 0 = all cores
    pub threads: usize,
    pub export: ExportSettings,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            input: None,
            label_column: DEFAULT_LABEL_COLUMN.to_string(),
            seed: None,
            folds: 10,
            resample: ResampleSettings::default(),
            models: ModelParams::default(),
            grid: GridSettings::default(),
            out_dir: PathBuf::from("out"),
            save_model: None,
            threads: 0,
            export: ExportSettings::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config("a seed is required (--seed or `seed = ...`)".into()))
    }

    pub fn input(&self) -> Result<&Path> {
        let input = self
            .input
            .as_deref()
            .ok_or_else(|| Error::Config("an input file is required (--input or `input = ...`)".into()))?;
        if !input.is_file() {
            return Err(Error::io(
                input,
                std::io::Error::new(std::io::ErrorKind::NotFound, "no such file"),
            ));
        }
        Ok(input)
    }

    /// Checks everything that can be checked before touching data.
    pub fn validate(&self) -> Result<()> {
        self.seed()?;
        if self.folds < 2 {
            return Err(Error::Config(format!("folds must be at least 2, got {}", self.folds)));
        }
        if self.resample.enabled {
            self.resample_config()?
                .validate()
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.grid.values.is_empty() {
            return Err(Error::Config("grid.values must not be empty".into()));
        }
        self.input()?;
        Ok(())
    }

    pub fn resample_config(&self) -> Result<ResampleConfig> {
        let s = &self.resample;
        Ok(ResampleConfig {
            target_ratio: s.target_ratio,
            cv_folds: s.cv_folds,
            lr: LrConfig {
                learning_rate: s.learning_rate,
                epochs: s.epochs,
                l2: s.l2,
                seed: seed::derive_seed(self.seed()?, "resample_lr", 0),
            },
            seed: seed::derive_seed(self.seed()?, "resample", 0),
        })
    }

    pub fn cv_config(&self) -> Result<CvConfig> {
        Ok(CvConfig {
            folds: self.folds,
            seed: seed::derive_seed(self.seed()?, "cross_validate", 0),
            models: self.models.clone(),
            grid: self.grid.clone(),
            threshold: 0.5,
        })
    }
}
