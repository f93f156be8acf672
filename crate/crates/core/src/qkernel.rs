//! Kernel evaluations and Gram-matrix assembly.
//!
//! Fidelity kernels run the compute-uncompute circuit `U(y)† U(x)` on
//! `|0…0⟩` and read the all-zeros probability, either exactly or from a
//! finite number of shots. The classical baseline is the Gaussian RBF kernel.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featuremap::{build_circuit, map_to_state, FeatureMapConfig};
use crate::qsim::{run_circuit, sample_counts, zero_probability, Circuit, QuantumState};

pub const DEFAULT_SHOTS: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelMode {
    FidelityExact,
    FidelitySampled,
    Rbf,
}

impl fmt::Display for KernelMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelMode::FidelityExact => "exact",
            KernelMode::FidelitySampled => "sampled",
            KernelMode::Rbf => "rbf",
        })
    }
}

impl FromStr for KernelMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" | "fidelity_exact" => Ok(KernelMode::FidelityExact),
            "sampled" | "fidelity_sampled" => Ok(KernelMode::FidelitySampled),
            "rbf" => Ok(KernelMode::Rbf),
            other => Err(Error::InvalidArgument(format!(
                "unknown kernel mode {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub mode: KernelMode,
    pub shots: u64,
    pub seed: u64,
    /// RBF width. `None` until resolved from training data with [`default_gamma`].
    pub gamma: Option<f64>,
    pub feature_map: FeatureMapConfig,
}

impl KernelConfig {
    pub fn new(mode: KernelMode, num_features: usize) -> Self {
        Self {
            mode,
            shots: DEFAULT_SHOTS,
            seed: 0,
            gamma: None,
            feature_map: FeatureMapConfig::new(num_features),
        }
    }

    pub fn exact(num_features: usize) -> Self {
        Self::new(KernelMode::FidelityExact, num_features)
    }

    pub fn sampled(num_features: usize, shots: u64, seed: u64) -> Self {
        Self {
            shots,
            seed,
            ..Self::new(KernelMode::FidelitySampled, num_features)
        }
    }

    pub fn rbf(num_features: usize, gamma: f64) -> Self {
        Self {
            gamma: Some(gamma),
            ..Self::new(KernelMode::Rbf, num_features)
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.mode {
            KernelMode::FidelitySampled if self.shots == 0 => {
                Err(Error::InvalidArgument("shots must be at least 1".into()))
            }
            KernelMode::FidelityExact | KernelMode::FidelitySampled => self.feature_map.validate(),
            KernelMode::Rbf => match self.gamma {
                Some(g) if g > 0.0 && g.is_finite() => Ok(()),
                Some(g) => Err(Error::InvalidArgument(format!("gamma {g} is not positive"))),
                None => Err(Error::InvalidArgument(
                    "RBF gamma has not been resolved".into(),
                )),
            },
        }
    }

    /// Fills in `gamma` from the training features when it is unset.
    pub fn resolved_for(mut self, train: &[Vec<f64>]) -> Result<Self> {
        if self.mode == KernelMode::Rbf && self.gamma.is_none() {
            self.gamma = Some(default_gamma(train)?);
        }
        Ok(self)
    }

    pub fn is_fidelity(&self) -> bool {
        !matches!(self.mode, KernelMode::Rbf)
    }
}

/// Compute-uncompute circuit `U(y)† U(x)`.
pub fn compute_uncompute_circuit(x: &[f64], y: &[f64], fm: &FeatureMapConfig) -> Result<Circuit> {
    check_pair(x, y)?;
    let mut circuit = build_circuit(x, fm)?;
    circuit.compose(&build_circuit(y, fm)?.inverse())?;
    Ok(circuit)
}

pub fn fidelity_exact(x: &[f64], y: &[f64], fm: &FeatureMapConfig) -> Result<f64> {
    let circuit = compute_uncompute_circuit(x, y, fm)?;
    let out = run_circuit(&circuit, &QuantumState::zero(fm.num_features)?)?;
    Ok(zero_probability(&out).clamp(0.0, 1.0))
}

pub fn fidelity_sampled(
    x: &[f64],
    y: &[f64],
    fm: &FeatureMapConfig,
    shots: u64,
    seed: u64,
) -> Result<f64> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let circuit = compute_uncompute_circuit(x, y, fm)?;
    let out = run_circuit(&circuit, &QuantumState::zero(fm.num_features)?)?;
    zeros_fraction(&out, shots, seed)
}

fn zeros_fraction(state: &QuantumState, shots: u64, seed: u64) -> Result<f64> {
    let counts = sample_counts(state, shots, seed)?;
    Ok(counts.get(&0).copied().unwrap_or(0) as f64 / shots as f64)
}

pub fn rbf(x: &[f64], y: &[f64], gamma: f64) -> Result<f64> {
    check_pair(x, y)?;
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "gamma {gamma} is not positive"
        )));
    }
    let dist2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((-gamma * dist2).exp())
}

/// `1 / (d · var)` with `var` the population variance of every entry of `x`.
pub fn default_gamma(x: &[Vec<f64>]) -> Result<f64> {
    let d = x.first().map(Vec::len).unwrap_or(0);
    if d == 0 {
        return Err(Error::InvalidArgument("empty feature matrix".into()));
    }
    if x.iter().any(|row| row.len() != d) {
        return Err(Error::Dimension("ragged feature matrix".into()));
    }
    let n = (x.len() * d) as f64;
    let mean = x.iter().flatten().sum::<f64>() / n;
    let var = x
        .iter()
        .flatten()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / n;
    if !var.is_finite() || var <= 0.0 {
        return Err(Error::DegenerateData(
            "feature matrix has zero variance".into(),
        ));
    }
    Ok(1.0 / (d as f64 * var))
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!(
            "feature vectors of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    Ok(())
}

/// Derives the sampling seed for one kernel entry from the master seed.
///
/// SplitMix64 finalizer over the master seed, a block tag and the entry
/// indices, so every entry's seed is independent of evaluation order.
pub fn entry_seed(master: u64, block: u64, row: u64, col: u64) -> u64 {
    let mut h = master;
    for word in [block, row, col] {
        h = splitmix64(h ^ splitmix64(word.wrapping_add(0x9e37_79b9_7f4a_7c15)));
    }
    h
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const BLOCK_TRAIN: u64 = 0;
const BLOCK_CROSS: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    symmetric: bool,
}

impl KernelMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>, symmetric: bool) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map(Vec::len).unwrap_or(0);
        if n == 0 || m == 0 || rows.iter().any(|r| r.len() != m) {
            return Err(Error::Dimension(
                "kernel matrix rows must be non-empty and equal length".into(),
            ));
        }
        if symmetric {
            if n != m {
                return Err(Error::Dimension(format!(
                    "{n}x{m} matrix cannot be symmetric"
                )));
            }
            for (i, row) in rows.iter().enumerate() {
                for (j, &v) in row.iter().enumerate().take(i) {
                    if v != rows[j][i] {
                        return Err(Error::InvalidArgument(format!(
                            "matrix is not symmetric at ({i}, {j})"
                        )));
                    }
                }
            }
        }
        Ok(Self {
            rows: n,
            cols: m,
            values: rows.into_iter().flatten().collect(),
            symmetric,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Principal sub-matrix on `indices`, still symmetric.
    pub fn submatrix(&self, indices: &[usize]) -> KernelMatrix {
        let values = indices
            .iter()
            .flat_map(|&i| indices.iter().map(move |&j| self.get(i, j)))
            .collect();
        KernelMatrix {
            rows: indices.len(),
            cols: indices.len(),
            values,
            symmetric: self.symmetric,
        }
    }

    /// Row-major CSV, one matrix row per line, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_csv(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }
}

/// Per-point precomputation shared by all entries in a Gram block.
enum Prepared {
    Fidelity {
        // U(x)|0…0⟩ for row points, U(x)† for column points
        states: Vec<QuantumState>,
        inverses: Vec<Circuit>,
    },
    Rbf(f64),
}

fn prepare(rows: &[Vec<f64>], cols: &[Vec<f64>], cfg: &KernelConfig) -> Result<Prepared> {
    cfg.validate()?;
    let d = match cfg.mode {
        KernelMode::Rbf => rows.first().or(cols.first()).map(Vec::len).unwrap_or(0),
        _ => cfg.feature_map.num_features,
    };
    for p in rows.iter().chain(cols) {
        if p.len() != d {
            return Err(Error::Dimension(format!(
                "point of dimension {} where {d} expected",
                p.len()
            )));
        }
    }
    match cfg.mode {
        KernelMode::Rbf => Ok(Prepared::Rbf(cfg.gamma.expect("validated"))),
        _ => {
            let states = rows
                .par_iter()
                .map(|x| map_to_state(x, &cfg.feature_map))
                .collect::<Result<Vec<_>>>()?;
            let inverses = cols
                .par_iter()
                .map(|y| build_circuit(y, &cfg.feature_map).map(|c| c.inverse()))
                .collect::<Result<Vec<_>>>()?;
            Ok(Prepared::Fidelity { states, inverses })
        }
    }
}

fn entry(
    prep: &Prepared,
    cfg: &KernelConfig,
    rows: &[Vec<f64>],
    cols: &[Vec<f64>],
    i: usize,
    j: usize,
    seed: u64,
) -> Result<f64> {
    match prep {
        Prepared::Rbf(gamma) => rbf(&rows[i], &cols[j], *gamma),
        Prepared::Fidelity { states, inverses } => {
            let out = run_circuit(&inverses[j], &states[i])?;
            match cfg.mode {
                KernelMode::FidelitySampled => zeros_fraction(&out, cfg.shots, seed),
                _ => Ok(zero_probability(&out).clamp(0.0, 1.0)),
            }
        }
    }
}

/// Training Gram matrix. Only the strict upper triangle is evaluated; the
/// diagonal is exactly 1 and the lower triangle mirrors the upper.
pub fn gram_symmetric(x: &[Vec<f64>], cfg: &KernelConfig) -> Result<KernelMatrix> {
    if x.is_empty() {
        return Err(Error::InvalidArgument("empty feature matrix".into()));
    }
    let n = x.len();
    let prep = prepare(x, x, cfg)?;
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| {
                    let seed = entry_seed(cfg.seed, BLOCK_TRAIN, i as u64, j as u64);
                    entry(&prep, cfg, x, x, i, j, seed)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        values[i * n + i] = 1.0;
        for (k, &v) in upper[i].iter().enumerate() {
            let j = i + 1 + k;
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    Ok(KernelMatrix {
        rows: n,
        cols: n,
        values,
        symmetric: true,
    })
}

/// Cross-kernel block with `values[i][j] = k(test[i], train[j])`.
pub fn gram_rectangular(
    test: &[Vec<f64>],
    train: &[Vec<f64>],
    cfg: &KernelConfig,
) -> Result<KernelMatrix> {
    if test.is_empty() || train.is_empty() {
        return Err(Error::InvalidArgument("empty feature matrix".into()));
    }
    let prep = prepare(test, train, cfg)?;
    let m = train.len();
    let rows: Vec<Vec<f64>> = (0..test.len())
        .into_par_iter()
        .map(|i| {
            (0..m)
                .map(|j| {
                    let seed = entry_seed(cfg.seed, BLOCK_CROSS, i as u64, j as u64);
                    entry(&prep, cfg, test, train, i, j, seed)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(KernelMatrix {
        rows: test.len(),
        cols: m,
        values: rows.into_iter().flatten().collect(),
        symmetric: false,
    })
}
