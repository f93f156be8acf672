//! Accuracy, confusion matrices and decision-boundary grids.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataio::{Label, ScalerParams};
use crate::error::{Error, Result};
use crate::svm::{predict, SvmModel};

pub const DEFAULT_GRID_RESOLUTION: usize = 100;

pub fn accuracy(predictions: &[Label], truth: &[Label]) -> Result<f64> {
    check_lengths(predictions, truth)?;
    let hits = predictions
        .iter()
        .zip(truth)
        .filter(|(p, t)| p == t)
        .count();
    Ok(hits as f64 / truth.len() as f64)
}

fn check_lengths(predictions: &[Label], truth: &[Label]) -> Result<()> {
    if predictions.len() != truth.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions for {} labels",
            predictions.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::InvalidArgument("no predictions to score".into()));
    }
    Ok(())
}

/// `matrix[i][j]` counts samples of true class `classes[i]` predicted as `classes[j]`.
pub fn confusion(
    predictions: &[Label],
    truth: &[Label],
    classes: &[Label],
) -> Result<Vec<Vec<u64>>> {
    if predictions.len() != truth.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions for {} labels",
            predictions.len(),
            truth.len()
        )));
    }
    let position = |l: &Label| {
        classes
            .iter()
            .position(|c| c == l)
            .ok_or_else(|| Error::InvalidArgument(format!("label {l} not in class list")))
    };
    let mut matrix = vec![vec![0u64; classes.len()]; classes.len()];
    for (p, t) in predictions.iter().zip(truth) {
        matrix[position(t)?][position(p)?] += 1;
    }
    Ok(matrix)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub classes: Vec<Label>,
    pub confusion: Vec<Vec<u64>>,
    pub n_total: usize,
}

impl EvalReport {
    pub fn new(predictions: &[Label], truth: &[Label], classes: &[Label]) -> Result<Self> {
        check_lengths(predictions, truth)?;
        let confusion = confusion(predictions, truth, classes)?;
        let trace: u64 = (0..classes.len()).map(|i| confusion[i][i]).sum();
        Ok(Self {
            accuracy: trace as f64 / truth.len() as f64,
            classes: classes.to_vec(),
            confusion,
            n_total: truth.len(),
        })
    }

    pub fn write_confusion_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header: Vec<&str> = self.classes.iter().map(|c| c.as_str()).collect();
        writeln!(out, "truth\\predicted,{}", header.join(","))?;
        for (c, row) in self.classes.iter().zip(&self.confusion) {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            writeln!(out, "{},{}", c, cells.join(","))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryGrid {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub resolution: usize,
    /// `cells[row][col]`, row indexing the y axis.
    pub cells: Vec<Vec<Label>>,
}

impl BoundaryGrid {
    pub fn x_center(&self, col: usize) -> f64 {
        cell_center(self.x_range, self.resolution, col)
    }

    pub fn y_center(&self, row: usize) -> f64 {
        cell_center(self.y_range, self.resolution, row)
    }

    pub fn labels_present(&self) -> Vec<Label> {
        let mut seen: Vec<Label> = self.cells.iter().flatten().copied().collect();
        seen.sort();
        seen.dedup();
        seen
    }

    /// `x,y,label` rows, y-major, x varying fastest.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,y,label")?;
        for (r, row) in self.cells.iter().enumerate() {
            let y = self.y_center(r);
            for (c, label) in row.iter().enumerate() {
                writeln!(out, "{},{},{}", self.x_center(c), y, label)?;
            }
        }
        Ok(())
    }

    pub fn to_csv_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to a Vec cannot fail");
        buf
    }
}

fn cell_center(range: (f64, f64), resolution: usize, k: usize) -> f64 {
    range.0 + (k as f64 + 0.5) * (range.1 - range.0) / resolution as f64
}

/// Predicts every cell centre of a `resolution × resolution` lattice over the
/// scaled square `[target_lo, target_hi]²`.
pub fn boundary_grid(
    model: &SvmModel,
    scaler: &ScalerParams,
    resolution: usize,
) -> Result<BoundaryGrid> {
    if model.num_features() != 2 || scaler.num_features() != 2 {
        return Err(Error::Unsupported(format!(
            "decision grids need a 2-feature model, got {}",
            model.num_features()
        )));
    }
    if resolution == 0 {
        return Err(Error::InvalidArgument(
            "grid resolution must be positive".into(),
        ));
    }
    let range = (scaler.target_lo, scaler.target_hi);
    let points: Vec<Vec<f64>> = (0..resolution)
        .flat_map(|r| {
            (0..resolution).map(move |c| {
                vec![
                    cell_center(range, resolution, c),
                    cell_center(range, resolution, r),
                ]
            })
        })
        .collect();
    let labels = predict(model, &points)?;
    Ok(BoundaryGrid {
        x_range: range,
        y_range: range,
        resolution,
        cells: labels.chunks(resolution).map(<[Label]>::to_vec).collect(),
    })
}

pub fn save_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
