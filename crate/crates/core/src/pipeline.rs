//! End-to-end orchestration: ingest → standardize → balance → split →
//! train → ensemble → analyze, plus the stage-only entry points used by
//! the `balance`, `grid` and `score` commands.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::classifiers::ModelKind;
use crate::config::PipelineConfig;
use crate::data::{self, Cell, Dataset};
use crate::ensemble::write_grid_table;
use crate::error::{Error, ErrorKind};
use crate::evaluate::cv::{select_weights, write_roc_csv, WeightSelection};
use crate::evaluate::{cross_validate, EvaluationReport};
use crate::matrix::Matrix;
use crate::persist::SavedModel;
use crate::preprocess::{fit_scaler, LabelMap};
use crate::resample::{iht_undersample, write_kept_indices};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Ingest,
    Preprocess,
    Balance,
    Evaluate,
    Export,
    Score,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Preprocess => "preprocess",
            Stage::Balance => "balance",
            Stage::Evaluate => "evaluate",
            Stage::Export => "export",
            Stage::Score => "score",
        })
    }
}

#[derive(Debug, Error)]
#[error("{stage} stage failed: {source}")]
pub struct StageError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

impl StageError {
    /// 1 usage, 2 data, 3 training or evaluation.
    pub fn exit_code(&self) -> i32 {
        match self.source.kind() {
            ErrorKind::Usage => 1,
            ErrorKind::Data => 2,
            ErrorKind::Training => 3,
        }
    }
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, StageError>;
}

impl<T> AtStage<T> for Result<T, Error> {
    fn at(self, stage: Stage) -> Result<T, StageError> {
        self.map_err(|source| StageError { stage, source })
    }
}

/// Dataset after ingestion and (optional) balancing, still in raw units.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub dataset: Dataset,
    pub label_map: LabelMap,
    pub n_input_rows: usize,
    pub n_dropped: usize,
    /// rows of the cleaned input kept by resampling
    pub kept_indices: Option<Vec<usize>>,
}

pub fn prepare(config: &PipelineConfig) -> Result<Prepared, StageError> {
    config.validate().at(Stage::Config)?;
    let input = config.input().at(Stage::Config)?;
    let (dataset, label_map, n_dropped) = data::load_dataset(input, &config.label_column).at(Stage::Ingest)?;
    let n_input_rows = dataset.n_samples() + n_dropped;
    if !config.resample.enabled {
        return Ok(Prepared {
            dataset,
            label_map,
            n_input_rows,
            n_dropped,
            kept_indices: None,
        });
    }
    // Hardness is estimated on standardized features.
    let scaled = fit_scaler(&dataset.features)
        .and_then(|s| s.transform(&dataset.features))
        .at(Stage::Preprocess)?;
    let resample = config.resample_config().at(Stage::Config)?;
    let out = iht_undersample(&scaled, &dataset.labels, &resample).at(Stage::Balance)?;
    Ok(Prepared {
        dataset: dataset.subset(&out.kept_indices),
        label_map,
        n_input_rows,
        n_dropped,
        kept_indices: Some(out.kept_indices),
    })
}

fn create_out_dir(dir: &Path) -> Result<(), StageError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::io(dir, e))
        .at(Stage::Export)
}

fn write_file(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<PathBuf, StageError> {
    let mut buf = Vec::new();
    f(&mut buf)
        .and_then(|_| std::fs::write(path, &buf))
        .map_err(|e| Error::io(path, e))
        .at(Stage::Export)?;
    Ok(path.to_path_buf())
}

fn export_balanced(config: &PipelineConfig, prepared: &Prepared, files: &mut Vec<PathBuf>) -> Result<(), StageError> {
    if let Some(kept) = &prepared.kept_indices {
        files.push(write_file(&config.out_dir.join("kept_indices.csv"), |b| {
            write_kept_indices(kept, b)
        })?);
    }
    files.push(write_file(&config.out_dir.join("balanced.csv"), |b| {
        data::write_csv(&prepared.dataset, &config.label_column, b)
    })?);
    Ok(())
}

fn export_grid(dir: &Path, selections: &[WeightSelection], files: &mut Vec<PathBuf>) -> Result<(), StageError> {
    for s in selections {
        let name = if selections.len() == 1 {
            "grid.csv".to_string()
        } else {
            format!("grid_fold{}.csv", s.fold)
        };
        files.push(write_file(&dir.join(name), |b| write_grid_table(&s.table, b))?);
    }
    Ok(())
}

#[derive(Debug)]
pub struct RunSummary {
    pub prepared: Prepared,
    pub report: EvaluationReport,
    pub files: Vec<PathBuf>,
}

pub fn report_json(report: &EvaluationReport) -> Result<String, Error> {
    Ok(serde_json::to_string_pretty(report)?)
}

pub fn run(config: &PipelineConfig) -> Result<RunSummary, StageError> {
    crate::par::set_threads(config.threads);
    let prepared = prepare(config)?;
    let cv = config.cv_config().at(Stage::Config)?;
    let mut report = cross_validate(&prepared.dataset, &cv).at(Stage::Evaluate)?;
    report.config = serde_json::to_value(config).map_err(Error::from).at(Stage::Export)?;
    report.seed = config.seed().at(Stage::Config)?;

    create_out_dir(&config.out_dir)?;
    let mut files = Vec::new();
    if config.export.report {
        let json = report_json(&report).at(Stage::Export)?;
        files.push(write_file(&config.out_dir.join("report.json"), |b| {
            b.write_all(json.as_bytes())
        })?);
    }
    if config.export.roc {
        for (model, points) in &report.roc {
            files.push(write_file(&config.out_dir.join(format!("roc_{model}.csv")), |b| {
                write_roc_csv(points, b)
            })?);
        }
    }
    if config.export.grid {
        export_grid(&config.out_dir, &report.ensemble_weights, &mut files)?;
    }
    if config.export.balanced {
        export_balanced(config, &prepared, &mut files)?;
    }
    if let Some(path) = &config.save_model {
        let model = fit_final(config, &prepared, &report.ensemble_weights[0])?;
        model.save(path).at(Stage::Export)?;
        files.push(path.clone());
    }
    Ok(RunSummary {
        prepared,
        report,
        files,
    })
}

/// Trains the deployable ensemble on the whole (balanced) dataset.
pub fn fit_final(
    config: &PipelineConfig,
    prepared: &Prepared,
    selection: &WeightSelection,
) -> Result<SavedModel, StageError> {
    let ds = &prepared.dataset;
    let scaler = fit_scaler(&ds.features).at(Stage::Preprocess)?;
    let x = scaler.transform(&ds.features).at(Stage::Preprocess)?;
    let seed = crate::seed::derive_seed(config.seed().at(Stage::Config)?, "final_models", 0);
    let models = config.models.train_all(&x, &ds.labels, seed).at(Stage::Evaluate)?;
    Ok(SavedModel {
        feature_names: ds.feature_names.clone(),
        label_column: config.label_column.clone(),
        scaler,
        label_map: prepared.label_map.clone(),
        models,
        weights: selection.weights,
        threshold: 0.5,
        config: serde_json::to_value(config).map_err(Error::from).at(Stage::Export)?,
    })
}

/// IHT only: writes `balanced.csv` and `kept_indices.csv`.
pub fn balance(config: &PipelineConfig) -> Result<(Prepared, Vec<PathBuf>), StageError> {
    crate::par::set_threads(config.threads);
    let prepared = prepare(config)?;
    create_out_dir(&config.out_dir)?;
    let mut files = Vec::new();
    export_balanced(config, &prepared, &mut files)?;
    Ok((prepared, files))
}

/// Weight search only, on a stratified validation split of the whole
/// (balanced) dataset. Writes `grid.csv`.
pub fn grid(config: &PipelineConfig) -> Result<(WeightSelection, Vec<PathBuf>), StageError> {
    crate::par::set_threads(config.threads);
    let prepared = prepare(config)?;
    let cv = config.cv_config().at(Stage::Config)?;
    let all: Vec<usize> = (0..prepared.dataset.n_samples()).collect();
    let selection = select_weights(&prepared.dataset, &all, &cv, 0).at(Stage::Evaluate)?;
    create_out_dir(&config.out_dir)?;
    let mut files = Vec::new();
    export_grid(&config.out_dir, std::slice::from_ref(&selection), &mut files)?;
    Ok((selection, files))
}

/// Reorders the input's columns into the model's feature order.
fn scoring_matrix(model: &SavedModel, raw: &data::RawDataset) -> Result<Matrix, Error> {
    let missing: Vec<String> = model
        .feature_names
        .iter()
        .filter(|f| raw.column_index(f).is_none())
        .cloned()
        .collect();
    let extra: Vec<String> = raw
        .column_names
        .iter()
        .filter(|c| **c != model.label_column && !model.feature_names.contains(c))
        .cloned()
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(Error::ColumnMismatch { missing, extra });
    }
    let cols: Vec<usize> = model
        .feature_names
        .iter()
        .map(|f| raw.column_index(f).expect("checked above"))
        .collect();
    let mut data = Vec::with_capacity(raw.n_rows() * cols.len());
    let mut bad = Vec::new();
    for (r, row) in raw.rows.iter().enumerate() {
        for &c in &cols {
            match row[c] {
                Cell::Number(v) => data.push(v),
                _ => {
                    bad.push((r, raw.column_names[c].clone()));
                    data.push(0.0);
                }
            }
        }
    }
    if !bad.is_empty() {
        return Err(Error::NonNumericCells(bad));
    }
    Matrix::new(raw.n_rows(), cols.len(), data)
}

/// Scores every row of `input` and writes `row_index,probability,label`.
pub fn score<W: Write>(model_path: &Path, input: &Path, out: W) -> Result<usize, StageError> {
    let model = SavedModel::load(model_path).at(Stage::Score)?;
    let raw = data::load_csv(input).at(Stage::Ingest)?;
    let x = scoring_matrix(&model, &raw).at(Stage::Ingest)?;
    let proba = model.predict_proba(&x).at(Stage::Score)?;
    write_scores(&proba, model.threshold, out)
        .map_err(|e| Error::io(input, e))
        .at(Stage::Export)?;
    Ok(proba.len())
}

pub fn write_scores<W: Write>(proba: &[f64], threshold: f64, mut out: W) -> std::io::Result<()> {
    writeln!(out, "row_index,probability,label")?;
    for (i, p) in proba.iter().enumerate() {
        writeln!(out, "{i},{p},{}", (*p >= threshold) as u8)?;
    }
    out.flush()
}

pub fn summary_line(report: &EvaluationReport) -> String {
    let mut parts = Vec::new();
    for kind in ModelKind::ALL
        .iter()
        .map(|k| k.name())
        .chain([crate::evaluate::cv::ENSEMBLE_NAME])
    {
        if let Some(m) = report.aggregate.get(kind) {
            parts.push(format!(
                "{kind}: acc {:.2}% f1 {:.2}%",
                m.mean_percent.accuracy, m.mean_percent.macro_f1
            ));
        }
    }
    parts.join(" | ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{two_blobs, BlobSpec};

    fn config_for(dir: &Path, input: &Path) -> PipelineConfig {
        let mut c = PipelineConfig {
            input: Some(input.to_path_buf()),
            seed: Some(5),
            folds: 3,
            out_dir: dir.join("out"),
            ..PipelineConfig::default()
        };
        c.models.rf.n_trees = 10;
        c.models.mlp.epochs = 20;
        c
    }

    #[test]
    fn score_checks_columns() {
        let dir = tempfile::tempdir().unwrap();
        let ds = two_blobs(&BlobSpec::balanced(30).with_separation(6.0), 1);
        let input = dir.path().join("train.csv");
        data::save_csv(&ds, "Class", &input).unwrap();
        let mut cfg = config_for(dir.path(), &input);
        cfg.resample.enabled = false;
        let prepared = prepare(&cfg).unwrap();
        let (sel, _) = grid(&cfg).unwrap();
        let model = fit_final(&cfg, &prepared, &sel).unwrap();
        let model_path = dir.path().join("model.json");
        model.save(&model_path).unwrap();

        let mut out = Vec::new();
        assert_eq!(score(&model_path, &input, &mut out).unwrap(), 60);
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("row_index,probability,label\n0,"));
        let labels: Vec<u8> = text
            .lines()
            .skip(1)
            .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
            .collect();
        assert_eq!(labels, ds.labels);

        let renamed = dir.path().join("renamed.csv");
        let body = std::fs::read_to_string(&input).unwrap().replacen("V2", "V9", 1);
        std::fs::write(&renamed, body).unwrap();
        let err = score(&model_path, &renamed, Vec::new()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let msg = err.to_string();
        assert!(msg.contains("V2") && msg.contains("V9"), "{msg}");
    }

    #[test]
    fn stage_errors_map_to_exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("missing.csv");
        let cfg = config_for(dir.path(), &missing);
        let err = run(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("missing.csv"));
        let no_seed = PipelineConfig { seed: None, ..cfg };
        assert_eq!(run(&no_seed).unwrap_err().exit_code(), 1);
    }
}
