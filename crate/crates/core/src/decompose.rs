//! Inverse-error quasi-probability decompositions over Pauli insertions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, EntanglingGate};
use crate::pauli::{commutation_sign, pauli_dim, PauliString};
use crate::ptm::{Ptm, PtmError};

/// Largest off-diagonal mass accepted as a Pauli error.
pub const DIAGONAL_TOL: f64 = 1e-6;
/// Smallest eigenvalue magnitude that can be inverted.
pub const MIN_EIGENVALUE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecompositionError {
    #[error("error PTM is not diagonal (off-diagonal mass {mass:.3e})")]
    NonDiagonal { mass: f64 },
    #[error("Pauli eigenvalue {index} = {value:.3e} is too small to invert")]
    SingularEigenvalue { index: usize, value: f64 },
    #[error("no decomposition for gate {0:?}")]
    MissingDecomposition(String),
    #[error(transparent)]
    Ptm(#[from] PtmError),
}

/// `R_E⁻¹ = Σ_a q_a R_{P_a}` with sampling weights `p_a = |q_a|/C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiProbDecomposition {
    pub gate_id: String,
    pub qubit_count: usize,
    /// Pauli eigenvalues of the error being inverted.
    pub eigenvalues: Vec<f64>,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub signs: Vec<i8>,
    pub cost: f64,
}

impl QuasiProbDecomposition {
    /// Identity error: `q = (1, 0, ..., 0)`.
    pub fn identity(gate_id: impl Into<String>, qubit_count: usize) -> Self {
        let dim = pauli_dim(qubit_count);
        from_eigenvalues(gate_id.into(), qubit_count, &vec![1.0; dim]).expect("unit eigenvalues")
    }

    pub fn insertion_label(&self, a: usize) -> String {
        PauliString::from_index(self.qubit_count, a).expect("index in range").to_string()
    }

    /// Diagonal PTM of inserting `P_a`.
    pub fn insertion_diagonal(&self, a: usize) -> Vec<f64> {
        (0..self.q.len()).map(|b| commutation_sign(self.qubit_count, a, b)).collect()
    }

    /// Diagonal of `R_E⁻¹`.
    pub fn inverse_diagonal(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|l| 1.0 / l).collect()
    }

    /// Probability that a draw inserts a non-identity Pauli.
    pub fn insertion_rate(&self) -> f64 {
        1.0 - self.p[0]
    }
}

/// Invert a diagonal error PTM into a quasi-probability decomposition.
pub fn decompose_inverse(err: &Ptm) -> Result<QuasiProbDecomposition, DecompositionError> {
    decompose_labelled(String::new(), err)
}

pub fn decompose_labelled(gate_id: String, err: &Ptm) -> Result<QuasiProbDecomposition, DecompositionError> {
    let mass = err.off_diagonal_mass();
    if mass > DIAGONAL_TOL {
        return Err(DecompositionError::NonDiagonal { mass });
    }
    from_eigenvalues(gate_id, err.qubit_count(), &err.diagonal())
}

/// `q_a = 4^{-n} Σ_b w(a,b) / λ_b`.
pub fn from_eigenvalues(
    gate_id: String,
    qubit_count: usize,
    eigenvalues: &[f64],
) -> Result<QuasiProbDecomposition, DecompositionError> {
    let dim = pauli_dim(qubit_count);
    if eigenvalues.len() != dim {
        return Err(PtmError::DimensionMismatch { expected: dim, found: eigenvalues.len() }.into());
    }
    if let Some((index, &value)) = eigenvalues.iter().enumerate().find(|(_, l)| l.is_nan() || l.abs() < MIN_EIGENVALUE)
    {
        return Err(DecompositionError::SingularEigenvalue { index, value });
    }
    let inv: Vec<f64> = eigenvalues.iter().map(|l| 1.0 / l).collect();
    let q: Vec<f64> = (0..dim)
        .map(|a| (0..dim).map(|b| commutation_sign(qubit_count, a, b) * inv[b]).sum::<f64>() / dim as f64)
        .collect();
    let cost: f64 = q.iter().map(|x| x.abs()).sum();
    let p = q.iter().map(|x| x.abs() / cost).collect();
    let signs = q.iter().map(|&x| if x < 0.0 { -1 } else { 1 }).collect();
    Ok(QuasiProbDecomposition { gate_id, qubit_count, eigenvalues: eigenvalues.to_vec(), q, p, signs, cost })
}

/// `noisy · ideal⁻¹`.
pub fn error_operator(noisy: &Ptm, ideal: &Ptm) -> Result<Ptm, PtmError> {
    let inv = ideal.inverse()?;
    inv.then(noisy)
}

/// Decompositions keyed by gate id.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DecompositionSet(pub BTreeMap<String, QuasiProbDecomposition>);

impl DecompositionSet {
    pub fn insert(&mut self, d: QuasiProbDecomposition) {
        self.0.insert(d.gate_id.clone(), d);
    }

    /// Lookup by gate id, then by pair key.
    pub fn get(&self, gate: &EntanglingGate) -> Result<&QuasiProbDecomposition, DecompositionError> {
        self.0
            .get(&gate.gate_id)
            .or_else(|| self.0.get(&gate.pair_key()))
            .ok_or_else(|| DecompositionError::MissingDecomposition(gate.gate_id.clone()))
    }

    /// Decomposition for every entangling gate of `c`, in circuit order.
    pub fn for_circuit(&self, c: &Circuit) -> Result<Vec<&QuasiProbDecomposition>, DecompositionError> {
        c.entangling_gates().map(|g| self.get(g)).collect()
    }
}

impl FromIterator<QuasiProbDecomposition> for DecompositionSet {
    fn from_iter<T: IntoIterator<Item = QuasiProbDecomposition>>(iter: T) -> Self {
        let mut s = Self::default();
        for d in iter {
            s.insert(d);
        }
        s
    }
}

/// Product of per-gate costs over the circuit's entangling gates.
pub fn circuit_cost(decomps: &DecompositionSet, c: &Circuit) -> Result<f64, DecompositionError> {
    Ok(decomps.for_circuit(c)?.iter().map(|d| d.cost).product())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{EntanglerKind, Gate};
    use crate::ptm::PauliChannel;

    #[test]
    fn identity_error() {
        let d = decompose_inverse(&Ptm::identity(2).unwrap()).unwrap();
        assert_eq!(d.q[0], 1.0);
        assert!(d.q[1..].iter().all(|&x| x == 0.0));
        assert_eq!(d.cost, 1.0);
        assert!(d.signs.iter().all(|&s| s == 1));
    }

    #[test]
    fn depolarizing_closed_form() {
        let p = 0.0252;
        let eta = 1.0 / (1.0 - p);
        let d = decompose_inverse(&PauliChannel::depolarizing(2, p).unwrap().ptm()).unwrap();
        assert!((d.q[0] - (1.0 + 15.0 * eta) / 16.0).abs() < 1e-12);
        for &x in &d.q[1..] {
            assert!((x - (1.0 - eta) / 16.0).abs() < 1e-12);
        }
        assert!((d.cost - (30.0 * eta - 14.0) / 16.0).abs() < 1e-12);
        assert!((d.q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((d.insertion_rate() - 15.0 * (eta - 1.0) / 16.0 / d.cost).abs() < 1e-12);
    }

    #[test]
    fn guards() {
        let mut ev = vec![1.0; 16];
        ev[5] = 1e-9;
        assert!(matches!(
            from_eigenvalues(String::new(), 2, &ev),
            Err(DecompositionError::SingularEigenvalue { index: 5, .. })
        ));
        let mut m = Ptm::identity(2).unwrap().matrix().clone();
        m[(1, 2)] = 0.01;
        let err = Ptm::from_matrix(2, m).unwrap();
        assert!(matches!(decompose_inverse(&err), Err(DecompositionError::NonDiagonal { .. })));
    }

    #[test]
    fn error_operator_recovers_diagonal() {
        let ideal = Ptm::from_unitary(&crate::circuit::entangler_unitary(EntanglerKind::YY, 0.3)).unwrap();
        let ch = PauliChannel::from_labels(2, &[("II", 0.97), ("XY", 0.03)]).unwrap().ptm();
        let noisy = ideal.then(&ch).unwrap();
        let e = error_operator(&noisy, &ideal).unwrap();
        assert!(e.off_diagonal_mass() < 1e-12);
        for (a, b) in e.diagonal().iter().zip(ch.diagonal()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn circuit_cost_multiplies() {
        let mut c = Circuit::new(2).unwrap();
        for _ in 0..24 {
            c.push(Gate::Entangling(EntanglingGate::new(EntanglerKind::YY, 0.5, (0, 1)))).unwrap();
        }
        let g = c.entangling_gates().next().unwrap().clone();
        let mut d = QuasiProbDecomposition::identity(g.gate_id.clone(), 2);
        d.cost = 1.083;
        let set: DecompositionSet = [d].into_iter().collect();
        assert!((circuit_cost(&set, &c).unwrap() - 1.083f64.powi(24)).abs() < 1e-12);
        assert!((1.083f64.powi(24) - 6.78).abs() < 0.01);
        assert!(matches!(
            circuit_cost(&DecompositionSet::default(), &c),
            Err(DecompositionError::MissingDecomposition(_))
        ));
    }
}
