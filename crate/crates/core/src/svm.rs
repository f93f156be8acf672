//! Soft-margin kernel SVM on precomputed Gram matrices.
//!
//! The binary dual
//!
//! ```text
//! max  Σ αᵢ − ½ Σᵢⱼ αᵢ αⱼ yᵢ yⱼ Kᵢⱼ   s.t.  0 ≤ αᵢ ≤ C,  Σ αᵢ yᵢ = 0
//! ```
//!
//! is solved by SMO with maximal-violating-pair selection using second-order
//! gain for the second index. Multiclass problems are decomposed one-vs-one.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataio::Label;
use crate::error::{Error, Result};
use crate::qkernel::{gram_rectangular, gram_symmetric, KernelConfig, KernelMatrix};

/// Curvature floor for non-positive `K_ii + K_jj − 2K_ij`.
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    pub c: f64,
    pub kkt_tolerance: f64,
    /// Iteration cap in units of `n` pair updates, `n` being the training size.
    pub max_passes: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            kkt_tolerance: 1e-3,
            max_passes: 10_000,
        }
    }
}

impl SvmConfig {
    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.c.is_finite() || self.c <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "C = {} is not positive",
                self.c
            )));
        }
        if self.kkt_tolerance.is_nan() || self.kkt_tolerance <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "KKT tolerance {} is not positive",
                self.kkt_tolerance
            )));
        }
        if self.max_passes == 0 {
            return Err(Error::InvalidArgument(
                "max_passes must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryModel {
    pub alpha: Vec<f64>,
    /// `+1` for the first class of `label_pair`, `−1` for the second.
    pub y: Vec<f64>,
    pub bias: f64,
    /// Positions of the two classes in the owning model's class list.
    pub label_pair: (usize, usize),
    /// Rows of the full training set this problem was trained on.
    pub training_indices: Vec<usize>,
    pub converged: bool,
    pub iterations: usize,
}

impl BinaryModel {
    pub fn decision_value(&self, kernel_row: &[f64]) -> Result<f64> {
        if kernel_row.len() != self.alpha.len() {
            return Err(Error::Dimension(format!(
                "kernel row of length {} for a {}-point model",
                kernel_row.len(),
                self.alpha.len()
            )));
        }
        Ok(self
            .alpha
            .iter()
            .zip(&self.y)
            .zip(kernel_row)
            .filter(|((a, _), _)| **a != 0.0)
            .map(|((a, y), k)| a * y * k)
            .sum::<f64>()
            + self.bias)
    }

    /// `Σ αᵢ yᵢ`, zero at a feasible point.
    pub fn equality_residual(&self) -> f64 {
        self.alpha.iter().zip(&self.y).map(|(a, y)| a * y).sum()
    }
}

/// Dual objective `Σ αᵢ − ½ αᵀ Q α` with `Qᵢⱼ = yᵢ yⱼ Kᵢⱼ`.
pub fn dual_objective(gram: &KernelMatrix, y: &[f64], alpha: &[f64]) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * gram.get(i, j);
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

pub fn solve_binary_smo(gram: &KernelMatrix, y: &[f64], cfg: &SvmConfig) -> Result<BinaryModel> {
    cfg.validate()?;
    let n = y.len();
    if !gram.is_symmetric() || gram.rows() != n || gram.cols() != n {
        return Err(Error::Dimension(format!(
            "need a symmetric {n}x{n} Gram matrix, got {}x{}",
            gram.rows(),
            gram.cols()
        )));
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::InvalidLabels("labels must be +1 or -1".into()));
    }
    if !y.contains(&1.0) || !y.contains(&-1.0) {
        return Err(Error::InvalidLabels("both classes must be present".into()));
    }

    let c = cfg.c;
    let q = |i: usize, j: usize| y[i] * y[j] * gram.get(i, j);
    let mut alpha = vec![0.0; n];
    // gradient of ½αᵀQα − eᵀα
    let mut grad = vec![-1.0; n];

    let in_up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let in_low = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);

    let max_iter = cfg.max_passes.saturating_mul(n.max(1));
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let mut i = usize::MAX;
        let mut gmax = f64::NEG_INFINITY;
        for t in 0..n {
            if in_up(alpha[t], y[t]) && -y[t] * grad[t] > gmax {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        let mut gmin = f64::INFINITY;
        let mut j = usize::MAX;
        let mut best_gain = f64::INFINITY;
        for t in 0..n {
            if !in_low(alpha[t], y[t]) {
                continue;
            }
            let v = -y[t] * grad[t];
            gmin = gmin.min(v);
            if i != usize::MAX && v < gmax {
                let b = gmax - v;
                let mut a = gram.get(i, i) + gram.get(t, t) - 2.0 * gram.get(i, t);
                if a <= 0.0 {
                    a = TAU;
                }
                let gain = -(b * b) / a;
                if gain < best_gain {
                    best_gain = gain;
                    j = t;
                }
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin < cfg.kkt_tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let mut curv = q(i, i) + q(j, j) + 2.0 * q(i, j);
            if curv <= 0.0 {
                curv = TAU;
            }
            let delta = (-grad[i] - grad[j]) / curv;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut curv = q(i, i) + q(j, j) - 2.0 * q(i, j);
            if curv <= 0.0 {
                curv = TAU;
            }
            let delta = (grad[i] - grad[j]) / curv;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(t, i) * di + q(t, j) * dj;
        }
    }

    // bias from free vectors, else the middle of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut free_count) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free_sum += yg;
            free_count += 1;
        }
    }
    let rho = if free_count > 0 {
        free_sum / free_count as f64
    } else {
        (ub + lb) / 2.0
    };

    Ok(BinaryModel {
        alpha,
        y: y.to_vec(),
        bias: -rho,
        label_pair: (0, 1),
        training_indices: (0..n).collect(),
        converged,
        iterations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub classes: Vec<Label>,
    pub binary_models: Vec<BinaryModel>,
    pub kernel_config: KernelConfig,
    pub svm_config: SvmConfig,
    pub training_features: Vec<Vec<f64>>,
}

impl SvmModel {
    pub fn num_features(&self) -> usize {
        self.training_features.first().map(Vec::len).unwrap_or(0)
    }

    pub fn converged(&self) -> bool {
        self.binary_models.iter().all(|m| m.converged)
    }
}

pub fn train_ovo(
    features: &[Vec<f64>],
    labels: &[Label],
    cfg: &SvmConfig,
    kernel: &KernelConfig,
) -> Result<SvmModel> {
    cfg.validate()?;
    if features.len() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} feature rows for {} labels",
            features.len(),
            labels.len()
        )));
    }
    let mut classes: Vec<Label> = labels.to_vec();
    classes.sort();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::InvalidDataset(format!(
            "training needs at least two classes, found {}",
            classes.len()
        )));
    }

    let kernel = kernel.resolved_for(features)?;
    let gram = gram_symmetric(features, &kernel)?;

    let pairs: Vec<(usize, usize)> = (0..classes.len())
        .flat_map(|a| (a + 1..classes.len()).map(move |b| (a, b)))
        .collect();
    let binary_models = pairs
        .par_iter()
        .map(|&(a, b)| {
            let indices: Vec<usize> = labels
                .iter()
                .enumerate()
                .filter(|(_, l)| **l == classes[a] || **l == classes[b])
                .map(|(i, _)| i)
                .collect();
            let y: Vec<f64> = indices
                .iter()
                .map(|&i| if labels[i] == classes[a] { 1.0 } else { -1.0 })
                .collect();
            let mut model = solve_binary_smo(&gram.submatrix(&indices), &y, cfg)?;
            model.label_pair = (a, b);
            model.training_indices = indices;
            Ok(model)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SvmModel {
        classes,
        binary_models,
        kernel_config: kernel,
        svm_config: *cfg,
        training_features: features.to_vec(),
    })
}

/// Per-point vote breakdown behind a prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct Vote {
    pub votes: Vec<usize>,
    pub margins: Vec<f64>,
    pub winner: usize,
}

/// Tallies one-vs-one decision values (ordered like `binary_models`).
///
/// Positive values vote for the first class of the pair. Ties go to the
/// class with the larger summed `|decision|` over its won contests, then to
/// the lower class index.
pub fn tally_votes(num_classes: usize, pairs: &[(usize, usize)], decisions: &[f64]) -> Vote {
    let mut votes = vec![0usize; num_classes];
    let mut margins = vec![0.0; num_classes];
    for (&(a, b), &d) in pairs.iter().zip(decisions) {
        let w = if d > 0.0 { a } else { b };
        votes[w] += 1;
        margins[w] += d.abs();
    }
    let mut winner = 0;
    for k in 1..num_classes {
        if votes[k] > votes[winner] || (votes[k] == votes[winner] && margins[k] > margins[winner]) {
            winner = k;
        }
    }
    Vote {
        votes,
        margins,
        winner,
    }
}

pub fn decision_values(model: &SvmModel, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let d = model.num_features();
    if let Some(bad) = x.iter().find(|r| r.len() != d) {
        return Err(Error::Dimension(format!(
            "{}-feature input for a {d}-feature model",
            bad.len()
        )));
    }
    if x.is_empty() {
        return Ok(Vec::new());
    }
    let cross = gram_rectangular(x, &model.training_features, &model.kernel_config)?;
    (0..x.len())
        .map(|i| {
            let row = cross.row(i);
            model
                .binary_models
                .iter()
                .map(|bm| {
                    let sub: Vec<f64> = bm.training_indices.iter().map(|&t| row[t]).collect();
                    bm.decision_value(&sub)
                })
                .collect()
        })
        .collect()
}

pub fn predict(model: &SvmModel, x: &[Vec<f64>]) -> Result<Vec<Label>> {
    let pairs: Vec<(usize, usize)> = model.binary_models.iter().map(|m| m.label_pair).collect();
    Ok(decision_values(model, x)?
        .iter()
        .map(|d| model.classes[tally_votes(model.classes.len(), &pairs, d).winner])
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qkernel::KernelMode;

    fn identity2() -> KernelMatrix {
        KernelMatrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]], true).unwrap()
    }

    #[test]
    fn analytic_two_point_solutions() {
        for c in [1.0, 0.3] {
            let m = solve_binary_smo(&identity2(), &[1.0, -1.0], &SvmConfig::default().with_c(c))
                .unwrap();
            assert!((m.alpha[0] - c).abs() < 1e-6);
            assert!((m.alpha[1] - c).abs() < 1e-6);
            assert!(m.bias.abs() < 1e-6);
            assert!(m.converged);
        }
    }

    #[test]
    fn decision_value_cases() {
        let m = solve_binary_smo(&identity2(), &[1.0, -1.0], &SvmConfig::default()).unwrap();
        assert!((m.decision_value(&[1.0, 0.0]).unwrap() - 1.0).abs() < 1e-9);
        assert!((m.decision_value(&[0.0, 1.0]).unwrap() + 1.0).abs() < 1e-9);
        assert!(matches!(m.decision_value(&[1.0]), Err(Error::Dimension(_))));

        let flat = BinaryModel {
            alpha: vec![0.0; 3],
            y: vec![1.0, -1.0, 1.0],
            bias: 0.5,
            label_pair: (0, 1),
            training_indices: vec![0, 1, 2],
            converged: true,
            iterations: 0,
        };
        assert_eq!(flat.decision_value(&[0.3, 0.9, 0.1]).unwrap(), 0.5);
    }

    #[test]
    fn single_class_rejected() {
        let err = solve_binary_smo(&identity2(), &[1.0, 1.0], &SvmConfig::default());
        assert!(matches!(err, Err(Error::InvalidLabels(_))));
        let err = solve_binary_smo(&identity2(), &[1.0, 0.0], &SvmConfig::default());
        assert!(matches!(err, Err(Error::InvalidLabels(_))));
    }

    #[test]
    fn bad_config_rejected() {
        let cfg = SvmConfig {
            c: 0.0,
            ..Default::default()
        };
        assert!(solve_binary_smo(&identity2(), &[1.0, -1.0], &cfg).is_err());
        let cfg = SvmConfig {
            kkt_tolerance: -1.0,
            ..Default::default()
        };
        assert!(solve_binary_smo(&identity2(), &[1.0, -1.0], &cfg).is_err());
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let k = KernelMatrix::from_rows(
            vec![
                vec![1.0, 0.9, 0.2, 0.1],
                vec![0.9, 1.0, 0.3, 0.2],
                vec![0.2, 0.3, 1.0, 0.8],
                vec![0.1, 0.2, 0.8, 1.0],
            ],
            true,
        )
        .unwrap();
        let y = [1.0, -1.0, 1.0, -1.0];
        let cfg = SvmConfig {
            max_passes: 1,
            kkt_tolerance: 1e-12,
            c: 100.0,
        };
        let m = solve_binary_smo(&k, &y, &cfg).unwrap();
        assert!(!m.converged);
        assert!(m.alpha.iter().all(|&a| (0.0..=100.0).contains(&a)));
        assert!(m.equality_residual().abs() < 1e-6);
    }

    #[test]
    fn votes_and_tie_breaks() {
        let pairs = [(0, 1), (0, 2), (1, 2)];
        // A beats B, A beats C, B beats C
        assert_eq!(tally_votes(3, &pairs, &[1.0, 1.0, 1.0]).winner, 0);
        // cyclic: A beats B, C beats A, B beats C -> one vote each
        let v = tally_votes(3, &pairs, &[0.5, -2.0, 0.7]);
        assert_eq!(v.votes, vec![1, 1, 1]);
        assert_eq!(v.winner, 2);
        // exact margin tie falls back to the lowest index
        let v = tally_votes(3, &pairs, &[1.0, -1.0, 1.0]);
        assert_eq!(v.winner, 0);
        // single pair: positive -> first class
        assert_eq!(tally_votes(2, &[(0, 1)], &[0.2]).winner, 0);
        assert_eq!(tally_votes(2, &[(0, 1)], &[-0.2]).winner, 1);
    }

    fn toy() -> (Vec<Vec<f64>>, Vec<Label>) {
        (
            vec![
                vec![0.1, 0.1],
                vec![0.2, 0.15],
                vec![0.85, 0.9],
                vec![0.9, 0.8],
            ],
            vec![Label::Los, Label::Los, Label::Nlos, Label::Nlos],
        )
    }

    #[test]
    fn separable_toy_is_fit_exactly() {
        let (x, y) = toy();
        for kernel in [
            KernelConfig::exact(2),
            KernelConfig::new(KernelMode::Rbf, 2),
        ] {
            for c in [10.0, 100.0, 1000.0] {
                let model = train_ovo(&x, &y, &SvmConfig::default().with_c(c), &kernel).unwrap();
                assert_eq!(predict(&model, &x).unwrap(), y);
            }
        }
    }

    #[test]
    fn two_class_ovo_equals_binary_solver() {
        let (x, y) = toy();
        let kernel = KernelConfig::exact(2);
        let model = train_ovo(&x, &y, &SvmConfig::default(), &kernel).unwrap();
        assert_eq!(model.binary_models.len(), 1);
        let gram = gram_symmetric(&x, &kernel).unwrap();
        let direct =
            solve_binary_smo(&gram, &[1.0, 1.0, -1.0, -1.0], &SvmConfig::default()).unwrap();
        assert_eq!(model.binary_models[0], direct);
    }

    #[test]
    fn three_classes_give_three_models() {
        let x = vec![
            vec![0.1, 0.1],
            vec![0.15, 0.2],
            vec![0.9, 0.1],
            vec![0.8, 0.2],
            vec![0.5, 0.9],
            vec![0.45, 0.8],
        ];
        let y = vec![
            Label::Los,
            Label::Los,
            Label::Nlos,
            Label::Nlos,
            Label::LosNlos,
            Label::LosNlos,
        ];
        let model = train_ovo(
            &x,
            &y,
            &SvmConfig::default().with_c(50.0),
            &KernelConfig::exact(2),
        )
        .unwrap();
        assert_eq!(model.binary_models.len(), 3);
        assert_eq!(model.classes, vec![Label::Los, Label::Nlos, Label::LosNlos]);
        for bm in &model.binary_models {
            assert!(bm.alpha.iter().all(|&a| (0.0..=50.0).contains(&a)));
            assert!(bm.equality_residual().abs() < 1e-6);
        }
        assert!(predict(&model, &[vec![0.1, 0.1, 0.3]]).is_err());
    }

    #[test]
    fn missing_class_rejected() {
        let x = vec![vec![0.1, 0.2], vec![0.3, 0.4]];
        let y = vec![Label::Los, Label::Los];
        assert!(matches!(
            train_ovo(&x, &y, &SvmConfig::default(), &KernelConfig::exact(2)),
            Err(Error::InvalidDataset(_))
        ));
    }
}
