//! Signal samples, CSV I/O, min-max scaling and the synthetic dataset generator.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 3] = ["cn0_diff", "elevation_deg", "label"];

/// GPS signal reception condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "LOS")]
    Los,
    #[serde(rename = "NLOS")]
    Nlos,
    #[serde(rename = "LOS_NLOS")]
    LosNlos,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Los, Label::Nlos, Label::LosNlos];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Los => "LOS",
            Label::Nlos => "NLOS",
            Label::LosNlos => "LOS_NLOS",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Label> {
        Label::ALL.get(index).copied()
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "LOS" => Ok(Label::Los),
            "NLOS" => Ok(Label::Nlos),
            "LOS_NLOS" => Ok(Label::LosNlos),
            other => Err(Error::InvalidArgument(format!("unknown label {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalSample {
    /// RHCP minus LHCP C/N₀, dB-Hz.
    pub cn0_diff: f64,
    /// Satellite elevation, degrees in `[0, 90]`.
    pub elevation: f64,
    pub label: Label,
}

impl SignalSample {
    pub fn validate(&self) -> Result<()> {
        if !self.cn0_diff.is_finite() {
            return Err(Error::InvalidArgument("cn0_diff is not finite".into()));
        }
        if !(0.0..=90.0).contains(&self.elevation) {
            return Err(Error::InvalidArgument(format!(
                "elevation {} outside [0, 90]",
                self.elevation
            )));
        }
        Ok(())
    }

    pub fn features(&self) -> Vec<f64> {
        vec![self.cn0_diff, self.elevation]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub samples: Vec<SignalSample>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, samples: Vec<SignalSample>) -> Self {
        Self {
            name: name.into(),
            samples,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn features(&self) -> Vec<Vec<f64>> {
        self.samples.iter().map(SignalSample::features).collect()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.samples.iter().map(|s| s.label).collect()
    }

    /// Counts per label in `Label::ALL` order.
    pub fn class_counts(&self) -> [usize; 3] {
        let mut counts = [0; 3];
        for s in &self.samples {
            counts[s.label.index()] += 1;
        }
        counts
    }

    /// Concatenates datasets in order, joining names with `+`.
    pub fn concat(parts: &[Dataset]) -> Dataset {
        Dataset {
            name: parts
                .iter()
                .map(|d| d.name.as_str())
                .collect::<Vec<_>>()
                .join("+"),
            samples: parts
                .iter()
                .flat_map(|d| d.samples.iter().copied())
                .collect(),
        }
    }
}

pub fn read_csv<R: Read>(reader: R, name: &str) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::Parse {
            line: 1,
            message: "empty file".into(),
        });
    }
    let got: Vec<&str> = header.iter().collect();
    if got != CSV_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!("header {:?} does not match {:?}", got, CSV_HEADER.join(",")),
        });
    }

    let mut samples = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let parse_err = |message: String| Error::Parse { line, message };
        if record.len() != CSV_HEADER.len() {
            return Err(parse_err(format!(
                "expected {} fields, found {}",
                CSV_HEADER.len(),
                record.len()
            )));
        }
        let number = |idx: usize| -> Result<f64> {
            record[idx].parse::<f64>().map_err(|_| {
                parse_err(format!(
                    "{}: cannot parse {:?} as a number",
                    CSV_HEADER[idx], &record[idx]
                ))
            })
        };
        let sample = SignalSample {
            cn0_diff: number(0)?,
            elevation: number(1)?,
            label: record[2]
                .parse()
                .map_err(|_| parse_err(format!("unknown label {:?}", &record[2])))?,
        };
        sample.validate().map_err(|e| parse_err(e.to_string()))?;
        samples.push(sample);
    }
    if samples.is_empty() {
        return Err(Error::Parse {
            line: 2,
            message: "no data rows".into(),
        });
    }
    Ok(Dataset::new(name, samples))
}

pub fn load_csv(path: &Path) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_csv(std::io::BufReader::new(file), &name)
}

pub fn write_csv<W: Write>(dataset: &Dataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for s in &dataset.samples {
        w.write_record([
            s.cn0_diff.to_string(),
            s.elevation.to_string(),
            s.label.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn save_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(dataset, std::io::BufWriter::new(file))
}

/// Per-feature affine map of `[data_min, data_max]` onto `[target_lo, target_hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub data_min: Vec<f64>,
    pub data_max: Vec<f64>,
    pub target_lo: f64,
    pub target_hi: f64,
}

impl ScalerParams {
    pub fn num_features(&self) -> usize {
        self.data_min.len()
    }

    pub fn transform_row(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.num_features() {
            return Err(Error::Dimension(format!(
                "{}-feature row for a {}-feature scaler",
                x.len(),
                self.num_features()
            )));
        }
        let span = self.target_hi - self.target_lo;
        Ok(x.iter()
            .enumerate()
            .map(|(k, v)| {
                let (lo, hi) = (self.data_min[k], self.data_max[k]);
                if *v == lo {
                    self.target_lo
                } else if *v == hi {
                    self.target_hi
                } else {
                    let t = self.target_lo + (v - lo) * span / (hi - lo);
                    if *v > lo && *v < hi {
                        // keep in-range inputs inside the target despite rounding
                        t.clamp(self.target_lo, self.target_hi)
                    } else {
                        t
                    }
                }
            })
            .collect())
    }

    pub fn transform(&self, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        x.iter().map(|r| self.transform_row(r)).collect()
    }
}

pub fn fit_scaler(train: &Dataset, target_lo: f64, target_hi: f64) -> Result<ScalerParams> {
    fit_scaler_features(&train.features(), target_lo, target_hi)
}

pub fn fit_scaler_features(x: &[Vec<f64>], target_lo: f64, target_hi: f64) -> Result<ScalerParams> {
    if !target_lo.is_finite() || !target_hi.is_finite() || target_hi <= target_lo {
        return Err(Error::InvalidArgument(format!(
            "target range [{target_lo}, {target_hi}] is empty"
        )));
    }
    let d = x
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::InvalidDataset("cannot fit a scaler on an empty dataset".into()))?;
    let mut data_min = vec![f64::INFINITY; d];
    let mut data_max = vec![f64::NEG_INFINITY; d];
    for row in x {
        if row.len() != d {
            return Err(Error::Dimension("ragged feature matrix".into()));
        }
        for (k, &v) in row.iter().enumerate() {
            data_min[k] = data_min[k].min(v);
            data_max[k] = data_max[k].max(v);
        }
    }
    if let Some(k) = (0..d).find(|&k| data_max[k] <= data_min[k]) {
        return Err(Error::DegenerateData(format!("feature {k} is constant")));
    }
    Ok(ScalerParams {
        data_min,
        data_max,
        target_lo,
        target_hi,
    })
}

/// Out-of-range values are extrapolated, not clamped.
pub fn apply_scaler(params: &ScalerParams, samples: &Dataset) -> Result<Vec<Vec<f64>>> {
    params.transform(&samples.features())
}

/// Synthetic dataset shapes with the class counts of the field recordings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    #[serde(rename = "T0_SHAPE")]
    T0Shape,
    #[serde(rename = "T1_SHAPE")]
    T1Shape,
    #[serde(rename = "T2_SHAPE")]
    T2Shape,
}

impl Preset {
    /// LOS / NLOS / LOS_NLOS counts.
    pub fn class_counts(self) -> [usize; 3] {
        match self {
            Preset::T0Shape => [80, 40, 32],
            Preset::T1Shape => [23, 10, 8],
            Preset::T2Shape => [80, 10, 30],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::T0Shape => "T0_SHAPE",
            Preset::T1Shape => "T1_SHAPE",
            Preset::T2Shape => "T2_SHAPE",
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "T0" | "T0_SHAPE" => Ok(Preset::T0Shape),
            "T1" | "T1_SHAPE" => Ok(Preset::T1Shape),
            "T2" | "T2_SHAPE" => Ok(Preset::T2Shape),
            other => Err(Error::InvalidArgument(format!("unknown preset {other:?}"))),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

struct ClassModel {
    cn0_mean: f64,
    cn0_std: f64,
    elevation: (f64, f64),
}

fn class_model(label: Label) -> ClassModel {
    match label {
        Label::Los => ClassModel {
            cn0_mean: 8.0,
            cn0_std: 2.0,
            elevation: (30.0, 90.0),
        },
        Label::Nlos => ClassModel {
            cn0_mean: -3.0,
            cn0_std: 2.0,
            elevation: (5.0, 45.0),
        },
        Label::LosNlos => ClassModel {
            cn0_mean: 2.0,
            cn0_std: 2.5,
            elevation: (10.0, 60.0),
        },
    }
}

/// Draws a labelled dataset with the preset's class counts.
///
/// ChaCha8 seeded with `seed`; rows are shuffled after generation.
pub fn generate_synthetic(preset: Preset, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::new();
    for (label, &count) in Label::ALL.iter().zip(preset.class_counts().iter()) {
        let m = class_model(*label);
        let cn0 = Normal::new(m.cn0_mean, m.cn0_std).expect("positive std");
        for _ in 0..count {
            let cn0_diff = cn0.sample(&mut rng);
            let elevation = rng
                .random_range(m.elevation.0..m.elevation.1)
                .clamp(0.0, 90.0);
            samples.push(SignalSample {
                cn0_diff,
                elevation,
                label: *label,
            });
        }
    }
    samples.shuffle(&mut rng);
    Dataset::new(preset.name(), samples)
}
