use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use iht_ensemble::config::PipelineConfig;
use iht_ensemble::pipeline::{self, StageError};
use iht_ensemble::synthetic::{two_blobs, BlobSpec};
use iht_ensemble::{data, Error};

#[derive(Parser)]
#[command(
    name = "iht-ensemble",
    version,
    about = "Hardness-based undersampling and weighted ensembles for fraud detection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: balance, cross-validate, write the report.
    Run(PipelineArgs),
    /// Undersample only; writes balanced.csv and kept_indices.csv.
    Balance(PipelineArgs),
    /// Weight grid search only; writes grid.csv.
    Grid(PipelineArgs),
    /// Score a CSV with a saved model.
    Score(ScoreArgs),
    /// Write a synthetic two-blob dataset.
    Synth(SynthArgs),
}

/// Flags override values from `--config`.
#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    label_column: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    folds: Option<usize>,
    /// minority:majority ratio after undersampling
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long)]
    no_resample: bool,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    save_model: Option<PathBuf>,
    /// 0 = all cores
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    /// defaults to stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    n_normal: usize,
    #[arg(long, default_value_t = 50)]
    n_fraud: usize,
    #[arg(long, default_value_t = 5)]
    features: usize,
    #[arg(long, default_value_t = 2.0)]
    separation: f64,
}

impl PipelineArgs {
    fn resolve(self) -> Result<PipelineConfig, Error> {
        let mut c = match &self.config {
            Some(p) => PipelineConfig::load(p)?,
            None => PipelineConfig::default(),
        };
        if let Some(v) = self.input {
            c.input = Some(v);
        }
        if let Some(v) = self.label_column {
            c.label_column = v;
        }
        if let Some(v) = self.seed {
            c.seed = Some(v);
        }
        if let Some(v) = self.folds {
            c.folds = v;
        }
        if let Some(v) = self.ratio {
            c.resample.target_ratio = v;
        }
        if self.no_resample {
            c.resample.enabled = false;
        }
        if let Some(v) = self.out_dir {
            c.out_dir = v;
        }
        if let Some(v) = self.save_model {
            c.save_model = Some(v);
        }
        if let Some(v) = self.threads {
            c.threads = v;
        }
        Ok(c)
    }
}

fn list(files: &[PathBuf]) {
    for f in files {
        eprintln!("wrote {}", f.display());
    }
}

fn execute(command: Command) -> Result<(), StageError> {
    let config_err = |source| StageError {
        stage: pipeline::Stage::Config,
        source,
    };
    match command {
        Command::Run(args) => {
            let config = args.resolve().map_err(config_err)?;
            let summary = pipeline::run(&config)?;
            let p = &summary.prepared;
            eprintln!(
                "{} rows read, {} dropped, {} after balancing",
                p.n_input_rows,
                p.n_dropped,
                p.dataset.n_samples()
            );
            list(&summary.files);
            println!("{}", pipeline::summary_line(&summary.report));
        }
        Command::Balance(args) => {
            let config = args.resolve().map_err(config_err)?;
            let (prepared, files) = pipeline::balance(&config)?;
            let [n0, n1] = prepared.dataset.class_counts();
            eprintln!(
                "kept {} rows ({n0} class 0, {n1} class 1)",
                prepared.dataset.n_samples()
            );
            list(&files);
        }
        Command::Grid(args) => {
            let config = args.resolve().map_err(config_err)?;
            let (selection, files) = pipeline::grid(&config)?;
            list(&files);
            let w = selection.weights.values();
            println!(
                "best weights dt={} rf={} knn={} mlp={} score={:.6}",
                w[0], w[1], w[2], w[3], selection.score
            );
        }
        Command::Score(args) => {
            let n = match &args.output {
                Some(path) => {
                    let file = std::fs::File::create(path).map_err(|e| StageError {
                        stage: pipeline::Stage::Export,
                        source: Error::io(path, e),
                    })?;
                    pipeline::score(&args.model, &args.input, std::io::BufWriter::new(file))?
                }
                None => pipeline::score(&args.model, &args.input, std::io::stdout().lock())?,
            };
            eprintln!("scored {n} rows");
        }
        Command::Synth(args) => {
            let spec = BlobSpec {
                n_normal: args.n_normal,
                n_fraud: args.n_fraud,
                n_features: args.features,
                separation: args.separation,
            };
            let ds = two_blobs(&spec, args.seed);
            data::save_csv(&ds, data::DEFAULT_LABEL_COLUMN, &args.out).map_err(|source| StageError {
                stage: pipeline::Stage::Export,
                source,
            })?;
            list(std::slice::from_ref(&args.out));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
