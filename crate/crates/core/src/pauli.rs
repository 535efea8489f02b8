//! Single-qubit Paulis and n-qubit Pauli strings.
//!
//! Pauli strings are indexed in base 4 with `I=0, X=1, Y=2, Z=3` and the
//! leftmost qubit as the most significant digit, so the two-qubit order is
//! `II, IX, IY, IZ, XI, ..., ZZ`. The same leftmost-is-most-significant rule
//! is used for computational basis states: qubit `q` of an `n`-qubit register
//! lives in bit `n - 1 - q` of the basis index.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest register handled anywhere in the crate.
pub const MAX_QUBITS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PauliError {
    #[error("qubit count {0} outside 1..={MAX_QUBITS}")]
    InvalidQubitCount(usize),
    #[error("invalid Pauli label {0:?}")]
    InvalidLabel(String),
    #[error("Pauli index {index} out of range for {qubit_count} qubits")]
    IndexOutOfRange { index: usize, qubit_count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' | 'i' => Some(Pauli::I),
            'X' | 'x' => Some(Pauli::X),
            'Y' | 'y' => Some(Pauli::Y),
            'Z' | 'z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        ['I', 'X', 'Y', 'Z'][self.index()]
    }

    /// Whether the single-qubit operators commute (they anticommute iff both
    /// are non-identity and different).
    pub fn commutes_with(self, other: Pauli) -> bool {
        self == Pauli::I || other == Pauli::I || self == other
    }

    /// Dense 2x2 matrix, row-major.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }

    /// Action on a single-qubit basis state: `P|bit> = phase |bit'>`.
    fn act(self, bit: usize) -> (usize, Complex64) {
        match self {
            Pauli::I => (bit, Complex64::new(1.0, 0.0)),
            Pauli::X => (bit ^ 1, Complex64::new(1.0, 0.0)),
            Pauli::Y => {
                if bit == 0 {
                    (1, Complex64::new(0.0, 1.0))
                } else {
                    (0, Complex64::new(0.0, -1.0))
                }
            }
            Pauli::Z => (bit, Complex64::new(if bit == 0 { 1.0 } else { -1.0 }, 0.0)),
        }
    }
}

/// `+1` when the Pauli strings with canonical indices `a` and `b` commute,
/// `-1` when they anticommute.
pub fn commutation_sign(qubit_count: usize, a: usize, b: usize) -> f64 {
    let mut anticommuting = 0;
    for q in 0..qubit_count {
        let shift = 2 * q;
        let pa = (a >> shift) & 3;
        let pb = (b >> shift) & 3;
        if pa != 0 && pb != 0 && pa != pb {
            anticommuting += 1;
        }
    }
    if anticommuting % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Full table `w(a, b)` for all pairs of `qubit_count`-qubit Pauli strings.
pub fn commutation_table(qubit_count: usize) -> Vec<Vec<f64>> {
    let dim = 1 << (2 * qubit_count);
    (0..dim).map(|a| (0..dim).map(|b| commutation_sign(qubit_count, a, b)).collect()).collect()
}

/// Number of Pauli strings on `qubit_count` qubits (`4^n`).
pub fn pauli_dim(qubit_count: usize) -> usize {
    1 << (2 * qubit_count)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    labels: Vec<Pauli>,
}

impl PauliString {
    pub fn new(labels: Vec<Pauli>) -> Result<Self, PauliError> {
        if labels.is_empty() || labels.len() > MAX_QUBITS {
            return Err(PauliError::InvalidQubitCount(labels.len()));
        }
        Ok(Self { labels })
    }

    pub fn identity(qubit_count: usize) -> Result<Self, PauliError> {
        Self::new(vec![Pauli::I; qubit_count])
    }

    /// Decode a canonical base-4 index.
    pub fn from_index(qubit_count: usize, index: usize) -> Result<Self, PauliError> {
        if qubit_count == 0 || qubit_count > MAX_QUBITS {
            return Err(PauliError::InvalidQubitCount(qubit_count));
        }
        if index >= pauli_dim(qubit_count) {
            return Err(PauliError::IndexOutOfRange { index, qubit_count });
        }
        let labels = (0..qubit_count)
            .map(|q| {
                let shift = 2 * (qubit_count - 1 - q);
                Pauli::ALL[(index >> shift) & 3]
            })
            .collect();
        Ok(Self { labels })
    }

    /// Single non-identity factors placed on the given qubits.
    pub fn from_sparse(qubit_count: usize, factors: &[(usize, Pauli)]) -> Result<Self, PauliError> {
        let mut s = Self::identity(qubit_count)?;
        for &(q, p) in factors {
            if q >= qubit_count {
                return Err(PauliError::IndexOutOfRange { index: q, qubit_count });
            }
            s.labels[q] = p;
        }
        Ok(s)
    }

    pub fn qubit_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[Pauli] {
        &self.labels
    }

    pub fn index(&self) -> usize {
        self.labels.iter().fold(0, |acc, p| 4 * acc + p.index())
    }

    pub fn weight(&self) -> usize {
        self.labels.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// Qubits carrying a non-identity factor, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.labels.iter().enumerate().filter(|(_, &p)| p != Pauli::I).map(|(q, _)| q).collect()
    }

    /// Only `I` and `Z` factors, i.e. diagonal in the computational basis.
    pub fn is_diagonal(&self) -> bool {
        self.labels.iter().all(|&p| p == Pauli::I || p == Pauli::Z)
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self.labels.iter().zip(&other.labels).filter(|(a, b)| !a.commutes_with(**b)).count();
        anti % 2 == 0
    }

    /// `P|k> = phase |k'>` for computational basis index `k`.
    pub fn apply_to_basis(&self, k: usize) -> (usize, Complex64) {
        let n = self.labels.len();
        let mut out = 0;
        let mut phase = Complex64::new(1.0, 0.0);
        for (q, p) in self.labels.iter().enumerate() {
            let shift = n - 1 - q;
            let (bit, ph) = p.act((k >> shift) & 1);
            out |= bit << shift;
            phase *= ph;
        }
        (out, phase)
    }

    /// Dense `2^n x 2^n` matrix.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        let dim = 1 << self.labels.len();
        let mut m = DMatrix::zeros(dim, dim);
        for k in 0..dim {
            let (row, phase) = self.apply_to_basis(k);
            m[(row, k)] = phase;
        }
        m
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.labels {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = PauliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let labels = s
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| PauliError::InvalidLabel(s.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(labels)
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Computational basis label such as `"0110"` for index 6 on four qubits.
pub fn basis_label(qubit_count: usize, index: usize) -> String {
    (0..qubit_count).map(|q| if (index >> (qubit_count - 1 - q)) & 1 == 1 { '1' } else { '0' }).collect()
}

/// Inverse of [`basis_label`]; `None` on malformed input.
pub fn parse_basis_label(label: &str) -> Option<(usize, usize)> {
    if label.is_empty() || label.len() > MAX_QUBITS {
        return None;
    }
    let mut index = 0;
    for c in label.chars() {
        index = 2 * index
            + match c {
                '0' => 0,
                '1' => 1,
                _ => return None,
            };
    }
    Some((label.len(), index))
}
