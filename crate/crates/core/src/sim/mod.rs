//! Ideal and noisy simulation backends.

pub mod density;
pub mod noise;
pub mod pauli_vector;
pub mod program;
pub mod readout;
pub mod shots;
pub mod statevector;

use thiserror::Error;

use crate::circuit::CircuitError;
use crate::pauli::MAX_QUBITS;
use crate::ptm::PtmError;

pub use noise::{ConfusionMatrix, NoiseModel};
pub use pauli_vector::{populations_from_pauli_vector, PauliVector};
pub use program::{run_noisy_ptm, run_noisy_ptm_steps, NoisyProgram};
pub use readout::{apply_readout_error, ReadoutDirection};
pub use shots::{sample_shots, ShotCounts};
pub use statevector::{evolve_exact, run_ideal, run_ideal_steps, StateVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("no noise entry for gate {0:?}")]
    MissingNoiseEntry(String),
    #[error("register of {0} qubits exceeds the supported maximum of {MAX_QUBITS}")]
    SizeGuard(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("confusion matrix of qubit {qubit} is singular")]
    SingularConfusion { qubit: usize },
    #[error("invalid confusion matrix for qubit {qubit}: {reason}")]
    InvalidConfusion { qubit: usize, reason: String },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid noise model: {0}")]
    InvalidNoise(String),
    #[error(transparent)]
    Ptm(#[from] PtmError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

pub(crate) fn check_qubits(n: usize) -> Result<(), SimError> {
    if n == 0 || n > MAX_QUBITS {
        return Err(SimError::SizeGuard(n));
    }
    Ok(())
}
