//! Train/test pipeline shared by the CLI subcommands.
//!
//! load or generate → fit scaler on train → scale both → train → predict →
//! report. Every input is loaded and every result computed before anything
//! is written, so a failing run leaves no partial artifacts.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataio::{fit_scaler, generate_synthetic, load_csv, Dataset, Preset, ScalerParams};
use crate::error::{Error, Result};
use crate::eval::{boundary_grid, save_bytes, BoundaryGrid, EvalReport};
use crate::featuremap::FeatureMapConfig;
use crate::qkernel::{KernelConfig, KernelMode, DEFAULT_SHOTS};
use crate::svm::{predict, train_ovo, SvmConfig, SvmModel};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "GNSS_QSVM_OUT_DIR";

pub const REPORT_FILE: &str = "report.json";
pub const CONFUSION_FILE: &str = "confusion.csv";
pub const MODEL_FILE: &str = "model.json";
pub const GRID_FILE: &str = "grid.csv";

/// A CSV file or a seeded synthetic preset, written `synth:<preset>:<seed>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum DataSource {
    File(PathBuf),
    Synthetic { preset: Preset, seed: u64 },
}

impl DataSource {
    pub fn load(&self) -> Result<Dataset> {
        match self {
            DataSource::File(path) => load_csv(path),
            DataSource::Synthetic { preset, seed } => Ok(generate_synthetic(*preset, *seed)),
        }
    }
}

impl FromStr for DataSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.strip_prefix("synth:") {
            Some(rest) => {
                let (preset, seed) = rest.split_once(':').ok_or_else(|| {
                    Error::InvalidArgument(format!("expected synth:<preset>:<seed>, got {s:?}"))
                })?;
                let seed = seed
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad seed in {s:?}")))?;
                Ok(DataSource::Synthetic {
                    preset: preset.parse()?,
                    seed,
                })
            }
            None => Ok(DataSource::File(PathBuf::from(s))),
        }
    }
}

impl fmt::Display for DataSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataSource::File(p) => write!(f, "{}", p.display()),
            DataSource::Synthetic { preset, seed } => write!(f, "synth:{preset}:{seed}"),
        }
    }
}

impl From<DataSource> for String {
    fn from(s: DataSource) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for DataSource {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Fidelity kernel over the ZZ feature map.
    Qsvm,
    /// Classical RBF kernel.
    Svm,
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qsvm" => Ok(ModelKind::Qsvm),
            "svm" | "rbf" => Ok(ModelKind::Svm),
            other => Err(Error::InvalidArgument(format!("unknown model {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scaling {
    MinMax {
        lo: f64,
        hi: f64,
    },
    /// Features are used in their native units.
    Raw,
}

impl Default for Scaling {
    fn default() -> Self {
        Scaling::MinMax { lo: 0.0, hi: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub train: Vec<DataSource>,
    pub test: DataSource,
    pub model: ModelKind,
    /// Quantum kernel evaluation; ignored for the RBF baseline.
    pub kernel_mode: KernelMode,
    pub shots: u64,
    pub seed: u64,
    pub repetitions: usize,
    pub scaling: Scaling,
    pub svm: SvmConfig,
    pub grid_resolution: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(train: Vec<DataSource>, test: DataSource, model: ModelKind) -> Self {
        Self {
            train,
            test,
            model,
            kernel_mode: KernelMode::FidelityExact,
            shots: DEFAULT_SHOTS,
            seed: 0,
            repetitions: 2,
            scaling: Scaling::default(),
            svm: SvmConfig::default(),
            grid_resolution: None,
        }
    }

    pub fn kernel_config(&self, num_features: usize) -> KernelConfig {
        let mode = match self.model {
            ModelKind::Svm => KernelMode::Rbf,
            ModelKind::Qsvm => self.kernel_mode,
        };
        KernelConfig {
            mode,
            shots: self.shots,
            seed: self.seed,
            gamma: None,
            feature_map: FeatureMapConfig::new(num_features).with_repetitions(self.repetitions),
        }
    }
}

/// Single-file model artifact: the trained ensemble plus its scaler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub model_kind: ModelKind,
    pub scaler: Option<ScalerParams>,
    pub model: SvmModel,
}

impl ModelDocument {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn scale(&self, features: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        match &self.scaler {
            Some(s) => s.transform(features),
            None => Ok(features.to_vec()),
        }
    }

    pub fn predict_dataset(&self, data: &Dataset) -> Result<Vec<crate::dataio::Label>> {
        predict(&self.model, &self.scale(&data.features())?)
    }

    pub fn evaluate(&self, data: &Dataset) -> Result<EvalReport> {
        let predictions = self.predict_dataset(data)?;
        EvalReport::new(&predictions, &data.labels(), &self.model.classes)
    }

    pub fn boundary(&self, resolution: usize) -> Result<BoundaryGrid> {
        let scaler = self.scaler.as_ref().ok_or_else(|| {
            Error::Unsupported("decision grids need a model trained on scaled features".into())
        })?;
        boundary_grid(&self.model, scaler, resolution)
    }
}

pub fn train_model(
    train: &Dataset,
    model: ModelKind,
    kernel: &KernelConfig,
    svm: &SvmConfig,
    scaling: Scaling,
) -> Result<ModelDocument> {
    let scaler = match scaling {
        Scaling::MinMax { lo, hi } => Some(fit_scaler(train, lo, hi)?),
        Scaling::Raw => None,
    };
    let features = match &scaler {
        Some(s) => s.transform(&train.features())?,
        None => train.features(),
    };
    if kernel.is_fidelity() != (model == ModelKind::Qsvm) {
        return Err(Error::InvalidArgument(format!(
            "kernel mode {} does not fit model kind {model:?}",
            kernel.mode
        )));
    }
    let svm_model = train_ovo(&features, &train.labels(), svm, kernel)?;
    Ok(ModelDocument {
        model_kind: model,
        scaler,
        model: svm_model,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub accuracy: f64,
    pub classes: Vec<crate::dataio::Label>,
    pub confusion: Vec<Vec<u64>>,
    pub n_total: usize,
    pub n_train: usize,
    pub converged: bool,
    pub warnings: Vec<String>,
    pub config: ExperimentConfig,
    pub kernel: KernelConfig,
}

impl RunReport {
    pub fn eval(&self) -> EvalReport {
        EvalReport {
            accuracy: self.accuracy,
            classes: self.classes.clone(),
            confusion: self.confusion.clone(),
            n_total: self.n_total,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub report: RunReport,
    pub model: ModelDocument,
    pub grid: Option<BoundaryGrid>,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    if config.train.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one training source is required".into(),
        ));
    }
    let parts = config
        .train
        .iter()
        .map(DataSource::load)
        .collect::<Result<Vec<_>>>()?;
    let train = Dataset::concat(&parts);
    let test = config.test.load()?;

    let kernel = config.kernel_config(2);
    let model = train_model(&train, config.model, &kernel, &config.svm, config.scaling)?;
    let eval = model.evaluate(&test)?;
    let grid = config
        .grid_resolution
        .map(|r| model.boundary(r))
        .transpose()?;

    let warnings = model
        .model
        .binary_models
        .iter()
        .filter(|m| !m.converged)
        .map(|m| {
            let (a, b) = m.label_pair;
            format!(
                "SMO for {} vs {} stopped at the iteration cap",
                model.model.classes[a], model.model.classes[b]
            )
        })
        .collect::<Vec<_>>();

    let report = RunReport {
        accuracy: eval.accuracy,
        classes: eval.classes,
        confusion: eval.confusion,
        n_total: eval.n_total,
        n_train: train.len(),
        converged: warnings.is_empty(),
        warnings,
        config: config.clone(),
        kernel: model.model.kernel_config,
    };
    Ok(ExperimentOutcome {
        report,
        model,
        grid,
    })
}

impl ExperimentOutcome {
    pub fn report_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.report)?)
    }

    /// Writes report, confusion matrix, model and (if computed) grid into `dir`.
    pub fn write_artifacts(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let report = self.report_json()?;
        let model = self.model.to_json()?;
        let mut confusion = Vec::new();
        self.report
            .eval()
            .write_confusion_csv(&mut confusion)
            .map_err(|e| Error::io(dir, e))?;

        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        let mut put = |name: &str, bytes: &[u8]| -> Result<()> {
            let path = dir.join(name);
            save_bytes(&path, bytes)?;
            written.push(path);
            Ok(())
        };
        put(REPORT_FILE, report.as_bytes())?;
        put(CONFUSION_FILE, &confusion)?;
        put(MODEL_FILE, model.as_bytes())?;
        if let Some(grid) = &self.grid {
            put(GRID_FILE, &grid.to_csv_bytes())?;
        }
        Ok(written)
    }
}
