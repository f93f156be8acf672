//! Command-line front end. All output goes to files; stdout carries only a
//! short summary per command.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::dataio::{fit_scaler, save_csv, Dataset, Preset, SignalSample};
use crate::error::{Error, Result};
use crate::eval::{save_bytes, DEFAULT_GRID_RESOLUTION};
use crate::experiment::{
    run_experiment, train_model, DataSource, ExperimentConfig, ModelDocument, ModelKind, Scaling,
    CONFUSION_FILE, OUT_DIR_ENV, REPORT_FILE,
};
use crate::qkernel::{gram_symmetric, KernelMode};
use crate::svm::SvmConfig;

#[derive(Debug, Parser)]
#[command(
    name = "gnss-qsvm",
    version,
    about = "Quantum-kernel SVM for GPS LOS/NLOS classification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded synthetic dataset as CSV.
    Synth {
        #[arg(long)]
        preset: Preset,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit scaler and model on the training sources and save the model JSON.
    Train {
        #[command(flatten)]
        opts: TrainOpts,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict labels for a dataset; writes the input rows with predicted labels.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: DataSource,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a saved model on a labelled dataset.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        test: DataSource,
        #[arg(long, env = OUT_DIR_ENV, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Evaluate a saved model on a lattice over the scaled feature square.
    Boundary {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = DEFAULT_GRID_RESOLUTION)]
        resolution: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export the training Gram matrix of a dataset as CSV.
    Kernel {
        #[arg(long)]
        input: DataSource,
        #[command(flatten)]
        kernel: KernelOpts,
        #[arg(long)]
        out: PathBuf,
    },
    /// Full train → test run writing report, confusion matrix, model and grid.
    Experiment {
        #[command(flatten)]
        opts: TrainOpts,
        #[arg(long)]
        test: DataSource,
        /// Also write a decision grid at this resolution.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, env = OUT_DIR_ENV, default_value = "out")]
        out_dir: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct KernelOpts {
    /// qsvm (ZZ fidelity kernel) or svm (RBF).
    #[arg(long, default_value = "qsvm")]
    pub model: ModelKind,
    /// Fidelity evaluation for qsvm: exact or sampled.
    #[arg(long, default_value = "exact")]
    pub kernel: KernelMode,
    #[arg(long, default_value_t = 1000)]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2)]
    pub reps: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub range_lo: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub range_hi: f64,
    /// Skip min-max scaling and use features in native units.
    #[arg(long)]
    pub raw: bool,
}

#[derive(Debug, Args)]
pub struct TrainOpts {
    /// Training source; repeat to concatenate. `synth:<preset>:<seed>` or a CSV path.
    #[arg(long = "train", required = true)]
    pub train: Vec<DataSource>,
    #[command(flatten)]
    pub kernel: KernelOpts,
    #[arg(long = "c", default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_passes: usize,
}

impl KernelOpts {
    fn scaling(&self) -> Scaling {
        if self.raw {
            Scaling::Raw
        } else {
            Scaling::MinMax {
                lo: self.range_lo,
                hi: self.range_hi,
            }
        }
    }
}

impl TrainOpts {
    fn experiment(&self, test: DataSource, grid: Option<usize>) -> ExperimentConfig {
        let k = &self.kernel;
        ExperimentConfig {
            train: self.train.clone(),
            test,
            model: k.model,
            kernel_mode: k.kernel,
            shots: k.shots,
            seed: k.seed,
            repetitions: k.reps,
            scaling: k.scaling(),
            svm: SvmConfig {
                c: self.c,
                kkt_tolerance: self.tol,
                max_passes: self.max_passes,
            },
            grid_resolution: grid,
        }
    }
}

fn load_all(sources: &[DataSource]) -> Result<Dataset> {
    let parts = sources
        .iter()
        .map(DataSource::load)
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset::concat(&parts))
}

fn write_model(doc: &ModelDocument, path: &Path) -> Result<()> {
    save_bytes(path, doc.to_json()?.as_bytes())
}

pub fn execute(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Synth { preset, seed, out } => {
            let d = crate::dataio::generate_synthetic(preset, seed);
            save_csv(&d, &out)?;
            Ok(format!("wrote {} samples to {}", d.len(), out.display()))
        }
        Command::Train { opts, out } => {
            // the test source is unused when only training
            let cfg = opts.experiment(opts.train[0].clone(), None);
            let train = load_all(&cfg.train)?;
            let doc = train_model(
                &train,
                cfg.model,
                &cfg.kernel_config(2),
                &cfg.svm,
                cfg.scaling,
            )?;
            write_model(&doc, &out)?;
            Ok(format!(
                "trained {} binary models on {} samples -> {}",
                doc.model.binary_models.len(),
                train.len(),
                out.display()
            ))
        }
        Command::Predict { model, input, out } => {
            let doc = ModelDocument::load(&model)?;
            let data = input.load()?;
            let labels = doc.predict_dataset(&data)?;
            let predicted = Dataset::new(
                data.name.clone(),
                data.samples
                    .iter()
                    .zip(labels)
                    .map(|(s, label)| SignalSample { label, ..*s })
                    .collect(),
            );
            save_csv(&predicted, &out)?;
            Ok(format!(
                "wrote {} predictions to {}",
                predicted.len(),
                out.display()
            ))
        }
        Command::Eval {
            model,
            test,
            out_dir,
        } => {
            let doc = ModelDocument::load(&model)?;
            let report = doc.evaluate(&test.load()?)?;
            let json = serde_json::to_string_pretty(&report)?;
            let mut confusion = Vec::new();
            report
                .write_confusion_csv(&mut confusion)
                .map_err(|e| Error::io(&out_dir, e))?;
            std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
            save_bytes(&out_dir.join(REPORT_FILE), json.as_bytes())?;
            save_bytes(&out_dir.join(CONFUSION_FILE), &confusion)?;
            Ok(format!(
                "accuracy {:.4} on {} samples",
                report.accuracy, report.n_total
            ))
        }
        Command::Boundary {
            model,
            resolution,
            out,
        } => {
            let doc = ModelDocument::load(&model)?;
            let grid = doc.boundary(resolution)?;
            save_bytes(&out, &grid.to_csv_bytes())?;
            Ok(format!(
                "wrote {resolution}x{resolution} grid to {}",
                out.display()
            ))
        }
        Command::Kernel { input, kernel, out } => {
            let data = input.load()?;
            let features = match kernel.scaling() {
                Scaling::MinMax { lo, hi } => {
                    fit_scaler(&data, lo, hi)?.transform(&data.features())?
                }
                Scaling::Raw => data.features(),
            };
            let cfg = TrainOpts {
                train: vec![input],
                kernel,
                c: 1.0,
                tol: 1e-3,
                max_passes: 1,
            }
            .experiment(DataSource::File(PathBuf::new()), None)
            .kernel_config(2)
            .resolved_for(&features)?;
            let gram = gram_symmetric(&features, &cfg)?;
            gram.save_csv(&out)?;
            Ok(format!(
                "wrote {0}x{0} Gram matrix to {1}",
                gram.rows(),
                out.display()
            ))
        }
        Command::Experiment {
            opts,
            test,
            grid,
            out_dir,
        } => {
            let cfg = opts.experiment(test, grid);
            let outcome = run_experiment(&cfg)?;
            outcome.write_artifacts(&out_dir)?;
            let mut msg = format!(
                "accuracy {:.4} on {} samples -> {}",
                outcome.report.accuracy,
                outcome.report.n_total,
                out_dir.display()
            );
            for w in &outcome.report.warnings {
                msg.push_str("\nwarning: ");
                msg.push_str(w);
            }
            Ok(msg)
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I) -> Result<String>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    execute(cli)
}
