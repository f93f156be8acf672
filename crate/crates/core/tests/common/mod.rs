//! Test-only reference implementations.

#![allow(dead_code)]

use gnss_qsvm::qkernel::KernelMatrix;
use nalgebra::{DMatrix, DVector};

/// Dual objective `Σα − ½ Σ αᵢαⱼyᵢyⱼKᵢⱼ`, written out independently of the crate.
pub fn dual_value(k: &[Vec<f64>], y: &[f64], alpha: &[f64]) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * k[i][j];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Exact maximum of the box- and equality-constrained SVM dual by active-set
/// enumeration: each αᵢ is pinned to 0, pinned to C, or free; the free block
/// is solved from its KKT system and kept when feasible. Exponential in n.
pub fn brute_force_dual(k: &[Vec<f64>], y: &[f64], c: f64) -> (f64, Vec<f64>) {
    let n = y.len();
    let mut best = (f64::NEG_INFINITY, vec![0.0; n]);
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut state = vec![0u8; n];
        let mut rest = code;
        for s in state.iter_mut() {
            *s = (rest % 3) as u8;
            rest /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut alpha: Vec<f64> = state
            .iter()
            .map(|&s| if s == 1 { c } else { 0.0 })
            .collect();

        if free.is_empty() {
            let eq: f64 = alpha.iter().zip(y).map(|(a, yi)| a * yi).sum();
            if eq.abs() > 1e-9 {
                continue;
            }
        } else {
            // [Q_FF  y_F] [α_F]   [1 − Q_FB α_B]
            // [y_Fᵀ  0  ] [ ν ] = [ −y_Bᵀ α_B  ]
            let m = free.len();
            let mut a = DMatrix::<f64>::zeros(m + 1, m + 1);
            let mut b = DVector::<f64>::zeros(m + 1);
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    a[(r, s)] = y[i] * y[j] * k[i][j];
                }
                a[(r, m)] = y[i];
                a[(m, r)] = y[i];
                let mut rhs = 1.0;
                for j in 0..n {
                    if state[j] != 2 {
                        rhs -= y[i] * y[j] * k[i][j] * alpha[j];
                    }
                }
                b[r] = rhs;
            }
            b[m] = -(0..n)
                .filter(|&j| state[j] != 2)
                .map(|j| y[j] * alpha[j])
                .sum::<f64>();
            let svd = a.clone().svd(true, true);
            let Ok(sol) = svd.solve(&b, 1e-12) else {
                continue;
            };
            if (&a * &sol - &b).norm() > 1e-8 {
                continue;
            }
            let mut feasible = true;
            for (r, &i) in free.iter().enumerate() {
                let v = sol[r];
                if v < -1e-12 || v > c + 1e-12 {
                    feasible = false;
                    break;
                }
                alpha[i] = v.clamp(0.0, c);
            }
            if !feasible {
                continue;
            }
        }
        let value = dual_value(k, y, &alpha);
        if value > best.0 {
            best = (value, alpha);
        }
    }
    best
}

pub fn to_rows(k: &KernelMatrix) -> Vec<Vec<f64>> {
    (0..k.rows()).map(|i| k.row(i).to_vec()).collect()
}

pub fn min_eigenvalue(k: &KernelMatrix) -> f64 {
    let n = k.rows();
    let m = DMatrix::from_fn(n, n, |i, j| k.get(i, j));
    m.symmetric_eigen().eigenvalues.min()
}
