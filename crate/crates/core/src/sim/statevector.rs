//! Pure-state simulation: the noiseless reference for every other backend.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{check_qubits, SimError};
use crate::circuit::{Circuit, Gate};
use crate::hubbard::PauliHamiltonian;
use crate::linalg::expm_hermitian;
use crate::pauli::parse_basis_label;

const NORM_TOL: f64 = 1e-10;

/// Normalized amplitudes over the computational basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateRecord", into = "StateRecord")]
pub struct StateVector {
    qubit_count: usize,
    amplitudes: Vec<Complex64>,
}

/// Wire form: `[(basis label, re, im)]` over the nonzero amplitudes.
#[derive(Serialize, Deserialize)]
struct StateRecord {
    qubit_count: usize,
    amplitudes: Vec<(String, f64, f64)>,
}

impl From<StateVector> for StateRecord {
    fn from(s: StateVector) -> Self {
        let amplitudes = s
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > 0.0)
            .map(|(k, a)| (crate::pauli::basis_label(s.qubit_count, k), a.re, a.im))
            .collect();
        StateRecord { qubit_count: s.qubit_count, amplitudes }
    }
}

impl TryFrom<StateRecord> for StateVector {
    type Error = SimError;

    fn try_from(r: StateRecord) -> Result<Self, Self::Error> {
        let terms = r
            .amplitudes
            .iter()
            .map(|(label, re, im)| {
                let (n, k) = parse_basis_label(label)
                    .ok_or_else(|| SimError::InvalidState(format!("bad basis label {label:?}")))?;
                if n != r.qubit_count {
                    return Err(SimError::DimensionMismatch { expected: r.qubit_count, found: n });
                }
                Ok((k, Complex64::new(*re, *im)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        StateVector::superposition(r.qubit_count, &terms)
    }
}

impl StateVector {
    pub fn basis(qubit_count: usize, index: usize) -> Result<Self, SimError> {
        check_qubits(qubit_count)?;
        let dim = 1 << qubit_count;
        if index >= dim {
            return Err(SimError::InvalidState(format!("basis index {index} out of range")));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { qubit_count, amplitudes })
    }

    /// Normalized sum of `(basis index, amplitude)` terms.
    pub fn superposition(qubit_count: usize, terms: &[(usize, Complex64)]) -> Result<Self, SimError> {
        check_qubits(qubit_count)?;
        let dim = 1 << qubit_count;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        for &(k, a) in terms {
            if k >= dim {
                return Err(SimError::InvalidState(format!("basis index {k} out of range")));
            }
            amplitudes[k] += a;
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(SimError::InvalidState("state has zero norm".into()));
        }
        for a in amplitudes.iter_mut() {
            *a /= norm;
        }
        Ok(Self { qubit_count, amplitudes })
    }

    /// Equal-weight superposition of basis labels, e.g. `["11", "10"]`.
    pub fn from_labels(labels: &[&str]) -> Result<Self, SimError> {
        let mut n = None;
        let mut terms = Vec::new();
        for label in labels {
            let (m, k) =
                parse_basis_label(label).ok_or_else(|| SimError::InvalidState(format!("bad basis label {label:?}")))?;
            if n.is_some_and(|n| n != m) {
                return Err(SimError::InvalidState("basis labels of different lengths".into()));
            }
            n = Some(m);
            terms.push((k, Complex64::new(1.0, 0.0)));
        }
        let n = n.ok_or_else(|| SimError::InvalidState("no basis labels".into()))?;
        Self::superposition(n, &terms)
    }

    /// Takes amplitudes as given; fails unless the norm is one within `1e-10`.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self, SimError> {
        let dim = amplitudes.len();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(SimError::InvalidState(format!("{dim} amplitudes is not a register size")));
        }
        let n = dim.trailing_zeros() as usize;
        check_qubits(n)?;
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(SimError::InvalidState(format!("squared norm {norm} is not 1")));
        }
        Ok(Self { qubit_count: n, amplitudes })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Basis indices carrying nonzero amplitude.
    pub fn support(&self) -> Vec<usize> {
        (0..self.amplitudes.len()).filter(|&k| self.amplitudes[k].norm() > 0.0).collect()
    }

    /// Apply `u` (local order: first qubit most significant) to `qubits`.
    pub fn apply_local(&mut self, u: &DMatrix<Complex64>, qubits: &[usize]) {
        let n = self.qubit_count;
        let m = qubits.len();
        let local_dim = 1 << m;
        let offsets: Vec<usize> = (0..local_dim)
            .map(|l| (0..m).fold(0, |acc, j| acc | (((l >> (m - 1 - j)) & 1) << (n - 1 - qubits[j]))))
            .collect();
        let mask = offsets[local_dim - 1];
        let mut gathered = vec![Complex64::new(0.0, 0.0); local_dim];
        for base in 0..(1usize << n) {
            if base & mask != 0 {
                continue;
            }
            for (l, off) in offsets.iter().enumerate() {
                gathered[l] = self.amplitudes[base | off];
            }
            for (r, off) in offsets.iter().enumerate() {
                self.amplitudes[base | off] = (0..local_dim).map(|c| u[(r, c)] * gathered[c]).sum();
            }
        }
    }

    pub fn apply_gate(&mut self, gate: &Gate) {
        self.apply_local(&gate.local_unitary(), &gate.qubits());
    }

    fn check_circuit(&self, c: &Circuit) -> Result<(), SimError> {
        if c.qubit_count() != self.qubit_count {
            return Err(SimError::DimensionMismatch { expected: c.qubit_count(), found: self.qubit_count });
        }
        Ok(())
    }
}

/// `exp(-iHt)|ψ⟩` by dense exponentiation.
pub fn evolve_exact(h: &PauliHamiltonian, t: f64, initial: &StateVector) -> Result<StateVector, SimError> {
    check_qubits(h.qubit_count)?;
    if h.qubit_count != initial.qubit_count {
        return Err(SimError::DimensionMismatch { expected: h.qubit_count, found: initial.qubit_count });
    }
    let u = expm_hermitian(&h.matrix(), t);
    let out = u * DVector::from_column_slice(&initial.amplitudes);
    Ok(StateVector { qubit_count: initial.qubit_count, amplitudes: out.as_slice().to_vec() })
}

/// Final populations of the noiseless circuit.
pub fn run_ideal(c: &Circuit, initial: &StateVector) -> Result<Vec<f64>, SimError> {
    initial.check_circuit(c)?;
    let mut s = initial.clone();
    for g in c.gates() {
        s.apply_gate(g);
    }
    Ok(s.populations())
}

/// Populations before the first step and after each Trotter step
/// (`step_count + 1` rows).
pub fn run_ideal_steps(c: &Circuit, initial: &StateVector) -> Result<Vec<Vec<f64>>, SimError> {
    initial.check_circuit(c)?;
    let mut s = initial.clone();
    let mut out = vec![s.populations()];
    let mut next = 0;
    for &end in c.step_ends() {
        for g in &c.gates()[next..end] {
            s.apply_gate(g);
        }
        next = end;
        out.push(s.populations());
    }
    Ok(out)
}

/// Full unitary of a circuit, built column by column.
pub fn circuit_unitary(c: &Circuit) -> DMatrix<Complex64> {
    let n = c.qubit_count();
    let dim = 1 << n;
    let mut u = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        let mut s = StateVector::basis(n, k).expect("circuit size already checked");
        for g in c.gates() {
            s.apply_gate(g);
        }
        for (r, a) in s.amplitudes.iter().enumerate() {
            u[(r, k)] = *a;
        }
    }
    u
}
