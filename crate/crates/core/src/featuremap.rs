//! Second-order ZZ feature map.
//!
//! Each repetition applies a Hadamard layer, single-qubit phases `2·x_i`, and
//! for every entangled pair `(i, j)` the block `CX(i→j) · P(2·φ_ij) · CX(i→j)`
//! with `φ_ij = (π − x_i)(π − x_j)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::{run_circuit, Circuit, Gate, QuantumState};

/// Which qubit pairs receive a ZZ interaction block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entanglement {
    /// Every pair `i < j`.
    #[default]
    Full,
    /// Nearest neighbours `(i, i + 1)` only.
    Linear,
}

impl Entanglement {
    pub fn pairs(self, num_qubits: usize) -> Vec<(usize, usize)> {
        match self {
            Entanglement::Full => (0..num_qubits)
                .flat_map(|i| (i + 1..num_qubits).map(move |j| (i, j)))
                .collect(),
            Entanglement::Linear => (1..num_qubits).map(|j| (j - 1, j)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMapConfig {
    pub num_features: usize,
    pub repetitions: usize,
    #[serde(default)]
    pub entanglement: Entanglement,
}

impl FeatureMapConfig {
    pub fn new(num_features: usize) -> Self {
        Self {
            num_features,
            repetitions: 2,
            entanglement: Entanglement::Full,
        }
    }

    pub fn with_repetitions(mut self, repetitions: usize) -> Self {
        self.repetitions = repetitions;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_features == 0 {
            return Err(Error::InvalidArgument(
                "feature map needs at least one feature".into(),
            ));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidArgument(
                "feature map needs at least one repetition".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSet {
    pub single: Vec<f64>,
    /// `((i, j), φ_ij)` for every unordered pair `i < j`, in lexicographic order.
    pub pairwise: Vec<((usize, usize), f64)>,
}

impl PhaseSet {
    pub fn pair(&self, i: usize, j: usize) -> Option<f64> {
        let key = if i < j { (i, j) } else { (j, i) };
        self.pairwise
            .iter()
            .find(|(p, _)| *p == key)
            .map(|&(_, phi)| phi)
    }
}

pub fn compute_phases(x: &[f64]) -> Result<PhaseSet> {
    if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "non-finite feature value {bad}"
        )));
    }
    let pairwise = Entanglement::Full
        .pairs(x.len())
        .into_iter()
        .map(|(i, j)| ((i, j), (PI - x[i]) * (PI - x[j])))
        .collect();
    Ok(PhaseSet {
        single: x.to_vec(),
        pairwise,
    })
}

pub fn build_circuit(x: &[f64], config: &FeatureMapConfig) -> Result<Circuit> {
    config.validate()?;
    if x.len() != config.num_features {
        return Err(Error::Dimension(format!(
            "feature vector of length {} for a {}-feature map",
            x.len(),
            config.num_features
        )));
    }
    let phases = compute_phases(x)?;
    let pairs = config.entanglement.pairs(config.num_features);
    let mut circuit = Circuit::new(config.num_features)?;
    for _ in 0..config.repetitions {
        for q in 0..config.num_features {
            circuit.push(Gate::H { target: q })?;
        }
        for (q, &phi) in phases.single.iter().enumerate() {
            circuit.push(Gate::Phase {
                target: q,
                theta: 2.0 * phi,
            })?;
        }
        for &(i, j) in &pairs {
            let phi = phases.pair(i, j).expect("every pair has a phase");
            circuit.push(Gate::Cx {
                control: i,
                target: j,
            })?;
            circuit.push(Gate::Phase {
                target: j,
                theta: 2.0 * phi,
            })?;
            circuit.push(Gate::Cx {
                control: i,
                target: j,
            })?;
        }
    }
    Ok(circuit)
}

pub fn map_to_state(x: &[f64], config: &FeatureMapConfig) -> Result<QuantumState> {
    let circuit = build_circuit(x, config)?;
    run_circuit(&circuit, &QuantumState::zero(config.num_features)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn phases_by_substitution() {
        let p = compute_phases(&[PI, PI]).unwrap();
        assert_eq!(p.single, vec![PI, PI]);
        assert_eq!(p.pair(0, 1), Some(0.0));

        let p = compute_phases(&[0.0, 0.0]).unwrap();
        assert_eq!(p.pair(0, 1), Some(PI * PI));

        let p = compute_phases(&[0.5, 0.5]).unwrap();
        assert_eq!(p.pair(1, 0), Some((PI - 0.5) * (PI - 0.5)));

        assert!(compute_phases(&[f64::NAN, 0.0]).is_err());
        assert!(compute_phases(&[0.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn gate_count_two_features() {
        let c = build_circuit(&[0.1, 0.2], &FeatureMapConfig::new(2)).unwrap();
        assert_eq!(c.len(), 14);
        let three = build_circuit(&[0.1, 0.2, 0.3], &FeatureMapConfig::new(3)).unwrap();
        // per rep: 3 H + 3 P + 3 pairs × 3 gates
        assert_eq!(three.len(), 2 * (3 + 3 + 9));
    }

    #[test]
    fn pi_input_reduces_to_hadamards() {
        let cfg = FeatureMapConfig::new(2).with_repetitions(1);
        let s = map_to_state(&[PI, PI], &cfg).unwrap();
        for a in s.amplitudes() {
            assert!((a - num_complex::Complex64::new(0.5, 0.0)).norm() < 1e-10);
        }
        let s = map_to_state(&[PI, PI], &FeatureMapConfig::new(2)).unwrap();
        assert!((s.amplitudes()[0].norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn config_and_dimension_errors() {
        let cfg = FeatureMapConfig::new(2);
        assert!(matches!(
            build_circuit(&[0.1], &cfg),
            Err(Error::Dimension(_))
        ));
        assert!(build_circuit(&[0.1, 0.2], &cfg.with_repetitions(0)).is_err());
        assert!(build_circuit(&[], &FeatureMapConfig::new(0)).is_err());
    }

    #[test]
    fn linear_entanglement_pairs() {
        assert_eq!(Entanglement::Linear.pairs(4), vec![(0, 1), (1, 2), (2, 3)]);
        assert_eq!(Entanglement::Full.pairs(3), vec![(0, 1), (0, 2), (1, 2)]);
        assert!(Entanglement::Full.pairs(1).is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn mapped_states_are_normalized(x0 in -10.0f64..10.0, x1 in -10.0f64..10.0) {
            let s = map_to_state(&[x0, x1], &FeatureMapConfig::new(2)).unwrap();
            prop_assert!((s.norm() - 1.0).abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn construction_is_deterministic(x0 in 0.0f64..1.0, x1 in 0.0f64..1.0, reps in 1usize..4) {
            let cfg = FeatureMapConfig::new(2).with_repetitions(reps);
            prop_assert_eq!(build_circuit(&[x0, x1], &cfg).unwrap(), build_circuit(&[x0, x1], &cfg).unwrap());
        }

        #[test]
        fn shifting_a_phase_argument_by_2pi_is_invisible(x0 in 0.0f64..1.0, x1 in 0.0f64..1.0, idx in 0usize..14) {
            let circuit = build_circuit(&[x0, x1], &FeatureMapConfig::new(2)).unwrap();
            let mut shifted = Circuit::new(2).unwrap();
            for (k, g) in circuit.gates().iter().enumerate() {
                let g = match *g {
                    Gate::Phase { target, theta } if k == idx => Gate::Phase { target, theta: theta + 2.0 * PI },
                    other => other,
                };
                shifted.push(g).unwrap();
            }
            let zero = QuantumState::zero(2).unwrap();
            let a = run_circuit(&circuit, &zero).unwrap();
            let b = run_circuit(&shifted, &zero).unwrap();
            for (u, v) in a.amplitudes().iter().zip(b.amplitudes()) {
                prop_assert!((u - v).norm() < 1e-10);
            }
        }
    }
}
