//! States in the Pauli basis, the representation PTMs act on.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::statevector::StateVector;
use super::{check_qubits, SimError};
use crate::pauli::{pauli_dim, PauliString};
use crate::ptm::{LocalLayout, Ptm};

/// `⟨P_i⟩` for every Pauli string, so `ρ = 2^{-n} Σ_i c_i P_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliVector {
    qubit_count: usize,
    coefficients: Vec<f64>,
}

impl PauliVector {
    pub fn new(qubit_count: usize, coefficients: Vec<f64>) -> Result<Self, SimError> {
        check_qubits(qubit_count)?;
        let dim = pauli_dim(qubit_count);
        if coefficients.len() != dim {
            return Err(SimError::DimensionMismatch { expected: dim, found: coefficients.len() });
        }
        Ok(Self { qubit_count, coefficients })
    }

    /// Maximally mixed state: only the identity coefficient is set.
    pub fn maximally_mixed(qubit_count: usize) -> Result<Self, SimError> {
        check_qubits(qubit_count)?;
        let mut c = vec![0.0; pauli_dim(qubit_count)];
        c[0] = 1.0;
        Ok(Self { qubit_count, coefficients: c })
    }

    /// Pauli expectations of a normalized pure state (identity pinned to one).
    pub fn from_state(state: &StateVector) -> Self {
        let n = state.qubit_count();
        let amps = state.amplitudes();
        let mut coefficients: Vec<f64> = (0..pauli_dim(n))
            .map(|i| {
                let p = PauliString::from_index(n, i).expect("index in range");
                amps.iter()
                    .enumerate()
                    .map(|(k, a)| {
                        let (k2, phase) = p.apply_to_basis(k);
                        (amps[k2].conj() * phase * a).re
                    })
                    .sum()
            })
            .collect();
        coefficients[0] = 1.0;
        Self { qubit_count: n, coefficients }
    }

    /// `c_i = Re tr(P_i ρ)`.
    pub fn from_density(rho: &DMatrix<Complex64>) -> Result<Self, SimError> {
        let d = rho.nrows();
        if rho.ncols() != d || !d.is_power_of_two() || d < 2 {
            return Err(SimError::InvalidState("density matrix must be square of size 2^n".into()));
        }
        let n = d.trailing_zeros() as usize;
        check_qubits(n)?;
        let coefficients = (0..pauli_dim(n))
            .map(|i| {
                let p = PauliString::from_index(n, i).expect("index in range");
                // tr(P ρ) = Σ_k <k|P ρ|k> = Σ_k Σ_l P[k,l] ρ[l,k]
                (0..d)
                    .map(|l| {
                        let (k, phase) = p.apply_to_basis(l);
                        phase * rho[(l, k)]
                    })
                    .sum::<Complex64>()
                    .re
            })
            .collect();
        Ok(Self { qubit_count: n, coefficients })
    }

    pub fn to_density(&self) -> DMatrix<Complex64> {
        let n = self.qubit_count;
        let d = 1 << n;
        let mut rho = DMatrix::zeros(d, d);
        for (i, c) in self.coefficients.iter().enumerate() {
            if *c == 0.0 {
                continue;
            }
            let p = PauliString::from_index(n, i).expect("index in range");
            for k in 0..d {
                let (row, phase) = p.apply_to_basis(k);
                rho[(row, k)] += phase * (*c / d as f64);
            }
        }
        rho
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn expectation(&self, pauli: &PauliString) -> f64 {
        self.coefficients[pauli.index()]
    }

    /// Diagonal of `ρ`. Pseudo-states may give negative entries; they are
    /// returned as is.
    pub fn populations(&self) -> Vec<f64> {
        let n = self.qubit_count;
        let d = 1usize << n;
        let mut out = vec![0.0; d];
        // Z-type strings: subset S of qubits, index Σ_{q∈S} 3·4^{n-1-q}
        for subset in 0..d {
            let mut index = 0;
            for q in 0..n {
                if (subset >> (n - 1 - q)) & 1 == 1 {
                    index += 3 << (2 * (n - 1 - q));
                }
            }
            let c = self.coefficients[index];
            if c == 0.0 {
                continue;
            }
            for (k, p) in out.iter_mut().enumerate() {
                let sign = if (k & subset).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                *p += sign * c;
            }
        }
        for p in out.iter_mut() {
            *p /= d as f64;
        }
        out
    }

    pub fn apply_ptm(&mut self, r: &Ptm) -> Result<(), SimError> {
        if r.qubit_count() != self.qubit_count {
            return Err(SimError::DimensionMismatch { expected: self.qubit_count, found: r.qubit_count() });
        }
        let v = nalgebra::DVector::from_column_slice(&self.coefficients);
        self.coefficients = (r.matrix() * v).as_slice().to_vec();
        Ok(())
    }

    /// Apply a local PTM whose digits are placed by `layout`.
    pub(crate) fn apply_local(&mut self, m: &DMatrix<f64>, layout: &LocalLayout, scratch: &mut Vec<f64>) {
        let local_dim = m.nrows();
        let offsets: Vec<usize> = (0..local_dim).map(|l| layout.place(l)).collect();
        scratch.resize(local_dim, 0.0);
        for rest in 0..self.coefficients.len() {
            if rest & layout.mask() != 0 {
                continue;
            }
            for (l, off) in offsets.iter().enumerate() {
                scratch[l] = self.coefficients[rest | off];
            }
            for (r, off) in offsets.iter().enumerate() {
                let mut acc = 0.0;
                for (c, x) in scratch.iter().enumerate() {
                    acc += m[(r, c)] * x;
                }
                self.coefficients[rest | off] = acc;
            }
        }
    }

    /// Multiply each coefficient by the local diagonal factor of its digits.
    pub(crate) fn apply_local_diagonal(&mut self, diag: &[f64], layout: &LocalLayout) {
        for (i, c) in self.coefficients.iter_mut().enumerate() {
            let (_, local) = layout.split(i);
            *c *= diag[local];
        }
    }
}

/// Free-function form of [`PauliVector::populations`].
pub fn populations_from_pauli_vector(v: &PauliVector) -> Vec<f64> {
    v.populations()
}
