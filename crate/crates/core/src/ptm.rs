//! Pauli transfer matrices and Pauli channels.
//!
//! Entry `(i, j)` of a PTM is `tr(P_i Λ(P_j)) / 2^n`, so every entry lies in
//! `[-1, 1]` and a trace-preserving channel has `(1, 0, ..., 0)` as its first
//! row. Composition of channels is matrix multiplication.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pauli::{commutation_sign, pauli_dim, PauliError, PauliString, MAX_QUBITS};

/// Tolerance for algebraic identities (unitarity, orthogonality).
pub const ALGEBRA_TOL: f64 = 1e-10;
/// Tolerance for results that pass through a matrix inverse.
pub const INVERSE_TOL: f64 = 1e-8;
/// Largest condition number accepted by [`Ptm::inverse`].
pub const MAX_CONDITION: f64 = 1e8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PtmError {
    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NonUnitary { deviation: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is singular or ill-conditioned (condition number {condition:.3e})")]
    Singular { condition: f64 },
    #[error("qubit index {index} out of range for {total} qubits")]
    IndexOutOfRange { index: usize, total: usize },
    #[error("invalid channel weights: {0}")]
    InvalidWeights(String),
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PtmRecord", into = "PtmRecord")]
pub struct Ptm {
    qubit_count: usize,
    entries: DMatrix<f64>,
}

/// Wire form: `{qubit_count, entries}` with entries in row-major order.
#[derive(Serialize, Deserialize)]
struct PtmRecord {
    qubit_count: usize,
    entries: Vec<f64>,
}

impl From<Ptm> for PtmRecord {
    fn from(p: Ptm) -> Self {
        let dim = p.dim();
        let entries = (0..dim).flat_map(|i| (0..dim).map(move |j| (i, j))).map(|(i, j)| p.entries[(i, j)]).collect();
        PtmRecord { qubit_count: p.qubit_count, entries }
    }
}

impl TryFrom<PtmRecord> for Ptm {
    type Error = PtmError;

    fn try_from(r: PtmRecord) -> Result<Self, Self::Error> {
        let dim = checked_dim(r.qubit_count)?;
        if r.entries.len() != dim * dim {
            return Err(PtmError::DimensionMismatch { expected: dim * dim, found: r.entries.len() });
        }
        Ok(Ptm { qubit_count: r.qubit_count, entries: DMatrix::from_row_slice(dim, dim, &r.entries) })
    }
}

fn checked_dim(qubit_count: usize) -> Result<usize, PtmError> {
    if qubit_count == 0 || qubit_count > MAX_QUBITS {
        return Err(PauliError::InvalidQubitCount(qubit_count).into());
    }
    Ok(pauli_dim(qubit_count))
}

impl Ptm {
    pub fn identity(qubit_count: usize) -> Result<Self, PtmError> {
        let dim = checked_dim(qubit_count)?;
        Ok(Self { qubit_count, entries: DMatrix::identity(dim, dim) })
    }

    pub fn from_matrix(qubit_count: usize, entries: DMatrix<f64>) -> Result<Self, PtmError> {
        let dim = checked_dim(qubit_count)?;
        if entries.nrows() != dim || entries.ncols() != dim {
            return Err(PtmError::DimensionMismatch { expected: dim, found: entries.nrows() });
        }
        Ok(Self { qubit_count, entries })
    }

    pub fn from_diagonal(qubit_count: usize, diagonal: &[f64]) -> Result<Self, PtmError> {
        let dim = checked_dim(qubit_count)?;
        if diagonal.len() != dim {
            return Err(PtmError::DimensionMismatch { expected: dim, found: diagonal.len() });
        }
        Ok(Self { qubit_count, entries: DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(diagonal)) })
    }

    /// PTM of conjugation by a Pauli string: diagonal with the commutation signs.
    pub fn pauli(p: &PauliString) -> Self {
        let n = p.qubit_count();
        let a = p.index();
        let diag: Vec<f64> = (0..pauli_dim(n)).map(|b| commutation_sign(n, a, b)).collect();
        Self::from_diagonal(n, &diag).expect("valid Pauli string")
    }

    /// PTM of `ρ -> U ρ U†`.
    pub fn from_unitary(u: &DMatrix<Complex64>) -> Result<Self, PtmError> {
        let d = u.nrows();
        if u.ncols() != d || !d.is_power_of_two() || d < 2 {
            return Err(PtmError::DimensionMismatch { expected: d.next_power_of_two().max(2), found: u.ncols() });
        }
        let n = d.trailing_zeros() as usize;
        let dim = checked_dim(n)?;
        let deviation =
            (u.adjoint() * u - DMatrix::<Complex64>::identity(d, d)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if deviation > ALGEBRA_TOL {
            return Err(PtmError::NonUnitary { deviation });
        }

        let paulis: Vec<PauliString> =
            (0..dim).map(|i| PauliString::from_index(n, i).expect("index in range")).collect();
        // column action of each Pauli: P|l> = phase |target>
        let actions: Vec<Vec<(usize, Complex64)>> =
            paulis.iter().map(|p| (0..d).map(|l| p.apply_to_basis(l)).collect()).collect();
        let u_dag = u.adjoint();
        let mut entries = DMatrix::zeros(dim, dim);
        for (j, action_j) in actions.iter().enumerate() {
            // U P_j: column l of U P_j is phase * column target(l) of U
            let mut up = DMatrix::<Complex64>::zeros(d, d);
            for (l, &(k, phase)) in action_j.iter().enumerate() {
                for r in 0..d {
                    up[(r, l)] = u[(r, k)] * phase;
                }
            }
            let m = up * &u_dag;
            for (i, action_i) in actions.iter().enumerate() {
                // tr(P_i M) = sum_l phase_i(l) * M[l, target_i(l)]
                let tr: Complex64 = action_i.iter().enumerate().map(|(l, &(k, ph))| ph * m[(l, k)]).sum();
                entries[(i, j)] = tr.re / d as f64;
            }
        }
        // unitary channels are trace preserving and unital: pin both exactly
        for k in 1..dim {
            entries[(0, k)] = 0.0;
            entries[(k, 0)] = 0.0;
        }
        entries[(0, 0)] = 1.0;
        Ok(Self { qubit_count: n, entries })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.entries.diagonal().iter().copied().collect()
    }

    /// Sum of absolute values of the off-diagonal entries.
    pub fn off_diagonal_mass(&self) -> f64 {
        let dim = self.dim();
        let mut mass = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                if i != j {
                    mass += self.entries[(i, j)].abs();
                }
            }
        }
        mass
    }

    pub fn is_orthogonal(&self, tol: f64) -> bool {
        let dim = self.dim();
        (self.entries.transpose() * &self.entries - DMatrix::<f64>::identity(dim, dim)).amax() <= tol
    }

    fn check_same_size(&self, other: &Ptm) -> Result<(), PtmError> {
        if self.qubit_count != other.qubit_count {
            return Err(PtmError::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }

    /// Channel that applies `self` first and `then` second: `then · self`.
    pub fn then(&self, then: &Ptm) -> Result<Ptm, PtmError> {
        ptm_compose(self, then)
    }

    /// Matrix inverse, refusing ill-conditioned input. Orthogonal matrices
    /// (unitary channels) are inverted exactly by transposition.
    pub fn inverse(&self) -> Result<Ptm, PtmError> {
        if self.is_orthogonal(1e-12) {
            return Ok(Self { qubit_count: self.qubit_count, entries: self.entries.transpose() });
        }
        let sv = self.entries.clone().svd(false, false).singular_values;
        let max = sv.max();
        let min = sv.min();
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };
        if condition.is_nan() || condition > MAX_CONDITION {
            return Err(PtmError::Singular { condition });
        }
        let inv = self.entries.clone().try_inverse().ok_or(PtmError::Singular { condition })?;
        Ok(Self { qubit_count: self.qubit_count, entries: inv })
    }

    /// Embed a local PTM acting on `qubits` (in order, first = most
    /// significant local digit) into a `total`-qubit register.
    pub fn embed(&self, qubits: &[usize], total: usize) -> Result<Ptm, PtmError> {
        let full_dim = checked_dim(total)?;
        if qubits.len() != self.qubit_count {
            return Err(PtmError::DimensionMismatch { expected: self.qubit_count, found: qubits.len() });
        }
        for (i, &q) in qubits.iter().enumerate() {
            if q >= total || qubits[..i].contains(&q) {
                return Err(PtmError::IndexOutOfRange { index: q, total });
            }
        }
        let layout = LocalLayout::new(qubits, total);
        let mut entries = DMatrix::zeros(full_dim, full_dim);
        for row in 0..full_dim {
            let (rest_r, loc_r) = layout.split(row);
            for col in 0..full_dim {
                let (rest_c, loc_c) = layout.split(col);
                if rest_r == rest_c {
                    entries[(row, col)] = self.entries[(loc_r, loc_c)];
                }
            }
        }
        Ok(Ptm { qubit_count: total, entries })
    }

    /// Two-qubit special case of [`Ptm::embed`].
    pub fn embed_two_qubit(&self, pair: (usize, usize), total: usize) -> Result<Ptm, PtmError> {
        if self.qubit_count != 2 {
            return Err(PtmError::DimensionMismatch { expected: 2, found: self.qubit_count });
        }
        if pair.0 == pair.1 {
            return Err(PtmError::IndexOutOfRange { index: pair.1, total });
        }
        self.embed(&[pair.0, pair.1], total)
    }
}

/// Returns `second · first`: apply `first` to the state, then `second`.
pub fn ptm_compose(first: &Ptm, second: &Ptm) -> Result<Ptm, PtmError> {
    first.check_same_size(second)?;
    Ok(Ptm { qubit_count: first.qubit_count, entries: &second.entries * &first.entries })
}

/// `tr(idealᵀ · noisy) / d²` with `d = 2^n`.
pub fn process_fidelity(noisy: &Ptm, ideal: &Ptm) -> Result<f64, PtmError> {
    noisy.check_same_size(ideal)?;
    let d = (1usize << noisy.qubit_count) as f64;
    let tr = ideal.entries.component_mul(&noisy.entries).sum();
    Ok(tr / (d * d))
}

/// `(d·F_pro + 1) / (d + 1)`.
pub fn average_gate_fidelity(noisy: &Ptm, ideal: &Ptm) -> Result<f64, PtmError> {
    let f_pro = process_fidelity(noisy, ideal)?;
    let d = (1usize << noisy.qubit_count) as f64;
    Ok((d * f_pro + 1.0) / (d + 1.0))
}

/// Digit bookkeeping for embedding local operators into a larger register.
#[derive(Debug, Clone)]
pub(crate) struct LocalLayout {
    /// Shift (in bits) of each local qubit's base-4 digit in the full index.
    shifts: Vec<usize>,
    mask: usize,
}

impl LocalLayout {
    pub(crate) fn new(qubits: &[usize], total: usize) -> Self {
        let shifts: Vec<usize> = qubits.iter().map(|&q| 2 * (total - 1 - q)).collect();
        let mask = shifts.iter().fold(0, |m, s| m | (3 << s));
        Self { shifts, mask }
    }

    /// `(rest, local)`: full index with the local digits cleared, and the
    /// local index formed from those digits.
    pub(crate) fn split(&self, full: usize) -> (usize, usize) {
        let local = self.shifts.iter().fold(0, |acc, &s| 4 * acc + ((full >> s) & 3));
        (full & !self.mask, local)
    }

    /// Offset in the full index contributed by a local index.
    pub(crate) fn place(&self, local: usize) -> usize {
        let k = self.shifts.len();
        self.shifts.iter().enumerate().fold(0, |acc, (j, &s)| acc | (((local >> (2 * (k - 1 - j))) & 3) << s))
    }

    pub(crate) fn mask(&self) -> usize {
        self.mask
    }
}

/// A channel applying Pauli string `P_a` with probability `weights[a]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PauliChannelRecord", into = "PauliChannelRecord")]
pub struct PauliChannel {
    qubit_count: usize,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PauliChannelRecord {
    qubit_count: usize,
    weights: Vec<f64>,
}

impl From<PauliChannel> for PauliChannelRecord {
    fn from(c: PauliChannel) -> Self {
        Self { qubit_count: c.qubit_count, weights: c.weights }
    }
}

impl TryFrom<PauliChannelRecord> for PauliChannel {
    type Error = PtmError;

    fn try_from(r: PauliChannelRecord) -> Result<Self, Self::Error> {
        PauliChannel::new(r.qubit_count, r.weights)
    }
}

/// Allowed deviation of the weight sum from one.
const WEIGHT_SUM_TOL: f64 = 1e-12;

impl PauliChannel {
    pub fn new(qubit_count: usize, weights: Vec<f64>) -> Result<Self, PtmError> {
        let dim = checked_dim(qubit_count)?;
        if weights.len() != dim {
            return Err(PtmError::DimensionMismatch { expected: dim, found: weights.len() });
        }
        if let Some(w) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(PtmError::InvalidWeights(format!("weight {w} outside [0, 1]")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(PtmError::InvalidWeights(format!("weights sum to {sum}")));
        }
        Ok(Self { qubit_count, weights })
    }

    pub fn identity(qubit_count: usize) -> Result<Self, PtmError> {
        let dim = checked_dim(qubit_count)?;
        let mut w = vec![0.0; dim];
        w[0] = 1.0;
        Self::new(qubit_count, w)
    }

    /// Uniform depolarizing: `P_0 = 1 - p(4^n - 1)/4^n`, every other Pauli `p/4^n`.
    /// All non-identity eigenvalues equal `1 - p`.
    pub fn depolarizing(qubit_count: usize, p: f64) -> Result<Self, PtmError> {
        let dim = checked_dim(qubit_count)?;
        let each = p / dim as f64;
        let mut w = vec![each; dim];
        w[0] = 1.0 - each * (dim - 1) as f64;
        Self::new(qubit_count, w)
    }

    /// Uniform dephasing: probability `p` spread evenly over the non-identity
    /// diagonal (Z-type) Paulis.
    pub fn dephasing(qubit_count: usize, p: f64) -> Result<Self, PtmError> {
        let dim = checked_dim(qubit_count)?;
        let z_type: Vec<usize> = (1..dim)
            .filter(|&a| PauliString::from_index(qubit_count, a).map(|s| s.is_diagonal()).unwrap_or(false))
            .collect();
        let mut w = vec![0.0; dim];
        w[0] = 1.0 - p;
        for &a in &z_type {
            w[a] = p / z_type.len() as f64;
        }
        Self::new(qubit_count, w)
    }

    /// Build from labelled weights, e.g. `[("II", 0.9), ("XX", 0.1)]`.
    pub fn from_labels(qubit_count: usize, entries: &[(&str, f64)]) -> Result<Self, PtmError> {
        let dim = checked_dim(qubit_count)?;
        let mut w = vec![0.0; dim];
        for (label, value) in entries {
            let p: PauliString = label.parse()?;
            if p.qubit_count() != qubit_count {
                return Err(PtmError::DimensionMismatch { expected: qubit_count, found: p.qubit_count() });
            }
            w[p.index()] += value;
        }
        Self::new(qubit_count, w)
    }

    /// Invert `λ_b = Σ_a w_a s(a,b)`. Negative weights within `1e-12` of zero
    /// (rounding) are clamped; larger ones are rejected as unphysical.
    pub fn from_eigenvalues(qubit_count: usize, eigenvalues: &[f64]) -> Result<Self, PtmError> {
        let dim = checked_dim(qubit_count)?;
        if eigenvalues.len() != dim {
            return Err(PtmError::DimensionMismatch { expected: dim, found: eigenvalues.len() });
        }
        let mut w: Vec<f64> = (0..dim)
            .map(|a| (0..dim).map(|b| commutation_sign(qubit_count, a, b) * eigenvalues[b]).sum::<f64>() / dim as f64)
            .collect();
        for x in w.iter_mut() {
            if *x < 0.0 && *x > -WEIGHT_SUM_TOL {
                *x = 0.0;
            }
        }
        Self::new(qubit_count, w)
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `λ_b = Σ_a weights_a · w(a, b)`, with `λ_0` exactly one.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let dim = self.weights.len();
        let mut out: Vec<f64> = (0..dim)
            .map(|b| self.weights.iter().enumerate().map(|(a, w)| w * commutation_sign(self.qubit_count, a, b)).sum())
            .collect();
        out[0] = 1.0;
        out
    }

    pub fn is_identity(&self) -> bool {
        self.weights[0] == 1.0
    }

    pub fn ptm(&self) -> Ptm {
        Ptm::from_diagonal(self.qubit_count, &self.eigenvalues()).expect("validated channel")
    }
}

/// Free-function form of [`PauliChannel::ptm`].
pub fn pauli_channel_ptm(ch: &PauliChannel) -> Ptm {
    ch.ptm()
}

/// Free-function form of [`Ptm::from_unitary`].
pub fn ptm_from_unitary(u: &DMatrix<Complex64>) -> Result<Ptm, PtmError> {
    Ptm::from_unitary(u)
}

/// Free-function form of [`Ptm::inverse`].
pub fn ptm_inverse(r: &Ptm) -> Result<Ptm, PtmError> {
    r.inverse()
}

/// Free-function form of [`Ptm::embed_two_qubit`].
pub fn embed_two_qubit(r: &Ptm, pair: (usize, usize), total: usize) -> Result<Ptm, PtmError> {
    r.embed_two_qubit(pair, total)
}
