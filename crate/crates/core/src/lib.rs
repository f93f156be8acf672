//! Quantum-kernel support vector machines for classifying GPS signal
//! reception conditions (LOS, NLOS, LOS+NLOS) from the RHCP−LHCP C/N₀
//! difference and satellite elevation.
//!
//! * [`qsim`]: dense statevector simulator (H, phase, CX)
//! * [`featuremap`]: second-order ZZ feature map
//! * [`qkernel`]: exact and shot-sampled fidelity kernels, RBF, Gram matrices
//! * [`svm`]: SMO dual solver and one-vs-one ensembles
//! * [`dataio`]: sample schema, CSV, min-max scaling, synthetic presets
//! * [`eval`]: accuracy, confusion matrices, decision grids
//! * [`experiment`] / [`cli`]: the train/test pipeline and its command line

pub mod cli;
pub mod dataio;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod featuremap;
pub mod qkernel;
pub mod qsim;
pub mod svm;

pub use error::{Error, Result};
