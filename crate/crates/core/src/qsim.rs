//! Dense statevector simulator for the gate set used by the ZZ feature map.
//!
//! Qubit 0 is the least-significant bit of the amplitude index, so the basis
//! state `|q1 q0⟩` lives at index `q0 + 2·q1`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 10;

const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    /// The all-zeros computational basis state.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        check_register(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Wraps an amplitude vector, checking its length and unit norm.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Dimension(format!(
                "amplitude vector length {dim} is not 2^n with n >= 1"
            )));
        }
        let num_qubits = dim.trailing_zeros() as usize;
        check_register(num_qubits)?;
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !norm_sqr.is_finite() || (norm_sqr.sqrt() - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "state norm {} is not 1",
                norm_sqr.sqrt()
            )));
        }
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    fn apply_in_place(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.num_qubits)?;
        match *gate {
            Gate::H { target } => {
                let bit = 1usize << target;
                let s = std::f64::consts::FRAC_1_SQRT_2;
                for i in 0..self.amplitudes.len() {
                    if i & bit == 0 {
                        let a = self.amplitudes[i];
                        let b = self.amplitudes[i | bit];
                        self.amplitudes[i] = (a + b) * s;
                        self.amplitudes[i | bit] = (a - b) * s;
                    }
                }
            }
            Gate::Phase { target, theta } => {
                let bit = 1usize << target;
                let factor = Complex64::from_polar(1.0, theta);
                for (i, amp) in self.amplitudes.iter_mut().enumerate() {
                    if i & bit != 0 {
                        *amp *= factor;
                    }
                }
            }
            Gate::Cx { control, target } => {
                let cbit = 1usize << control;
                let tbit = 1usize << target;
                for i in 0..self.amplitudes.len() {
                    if i & cbit != 0 && i & tbit == 0 {
                        self.amplitudes.swap(i, i | tbit);
                    }
                }
            }
        }
        Ok(())
    }
}

fn check_register(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "register of {num_qubits} qubits outside 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "UPPERCASE")]
pub enum Gate {
    H {
        target: usize,
    },
    /// `diag(1, e^{iθ})` on the target qubit.
    Phase {
        target: usize,
        theta: f64,
    },
    Cx {
        control: usize,
        target: usize,
    },
}

impl Gate {
    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        let (target, control) = match *self {
            Gate::H { target } | Gate::Phase { target, .. } => (target, None),
            Gate::Cx { control, target } => (target, Some(control)),
        };
        if target >= num_qubits {
            return Err(Error::InvalidGate(format!(
                "target {target} out of range for {num_qubits} qubits"
            )));
        }
        if let Some(control) = control {
            if control >= num_qubits {
                return Err(Error::InvalidGate(format!(
                    "control {control} out of range for {num_qubits} qubits"
                )));
            }
            if control == target {
                return Err(Error::InvalidGate(format!(
                    "control and target are both qubit {target}"
                )));
            }
        }
        if let Gate::Phase { theta, .. } = *self {
            if !theta.is_finite() {
                return Err(Error::InvalidGate("non-finite phase angle".into()));
            }
        }
        Ok(())
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::Phase { target, theta } => Gate::Phase {
                target,
                theta: -theta,
            },
            other => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Result<Self> {
        check_register(num_qubits)?;
        Ok(Self {
            num_qubits,
            gates: Vec::new(),
        })
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.num_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// The adjoint circuit: gates reversed, phases negated.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// Appends all gates of `other` after the gates of `self`.
    pub fn compose(&mut self, other: &Circuit) -> Result<()> {
        if other.num_qubits != self.num_qubits {
            return Err(Error::Dimension(format!(
                "cannot compose {}-qubit circuit onto {}-qubit circuit",
                other.num_qubits, self.num_qubits
            )));
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(())
    }
}

pub fn apply_gate(state: &QuantumState, gate: &Gate) -> Result<QuantumState> {
    let mut out = state.clone();
    out.apply_in_place(gate)?;
    Ok(out)
}

pub fn run_circuit(circuit: &Circuit, initial: &QuantumState) -> Result<QuantumState> {
    if circuit.num_qubits != initial.num_qubits {
        return Err(Error::Dimension(format!(
            "{}-qubit circuit applied to {}-qubit state",
            circuit.num_qubits, initial.num_qubits
        )));
    }
    let mut state = initial.clone();
    for gate in &circuit.gates {
        state.apply_in_place(gate)?;
    }
    Ok(state)
}

/// `⟨a|b⟩`, conjugate-linear in `a`.
pub fn inner_product(a: &QuantumState, b: &QuantumState) -> Result<Complex64> {
    if a.num_qubits != b.num_qubits {
        return Err(Error::Dimension(format!(
            "inner product of {}-qubit and {}-qubit states",
            a.num_qubits, b.num_qubits
        )));
    }
    Ok(a.amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

pub fn zero_probability(state: &QuantumState) -> f64 {
    state.amplitudes[0].norm_sqr()
}

/// Outcome histogram keyed by basis index.
pub type Counts = BTreeMap<usize, u64>;

/// Draws `shots` basis outcomes from the Born distribution of `state`.
///
/// The generator is ChaCha8 seeded with `seed`; outcomes are drawn by
/// inverse-CDF lookup over the probability vector.
pub fn sample_counts(state: &QuantumState, shots: u64, seed: u64) -> Result<Counts> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let dist = WeightedIndex::new(state.probabilities())
        .map_err(|e| Error::InvalidArgument(format!("cannot sample state: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = vec![0u64; state.amplitudes.len()];
    for _ in 0..shots {
        tally[dist.sample(&mut rng)] += 1;
    }
    Ok(tally
        .into_iter()
        .enumerate()
        .filter(|&(_, n)| n > 0)
        .collect())
}
