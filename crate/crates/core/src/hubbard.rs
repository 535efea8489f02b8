//! Extended Fermi-Hubbard chains mapped to qubit Hamiltonians.
//!
//! One-component chains use one qubit per site. Two-component chains put the
//! spin-up sites on qubits `0..L` and spin-down sites on `L..2L`, with the
//! Jordan-Wigner strings running over that ordering. A qubit in `|1>` is an
//! occupied mode (`n = (1 - σ^z)/2`).

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pauli::{Pauli, PauliString, MAX_QUBITS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HubbardError {
    #[error("model needs {0} qubits, at most {MAX_QUBITS} supported")]
    UnsupportedSize(usize),
    #[error("invalid model: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Components {
    /// Spinless fermions.
    One,
    /// Spin-1/2 fermions.
    Two,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HubbardSpec {
    pub sites: usize,
    pub components: Components,
    /// Nearest-neighbour tunneling `J`.
    pub tunneling: f64,
    /// On-site interaction `U` (ignored for one component).
    #[serde(default)]
    pub onsite: f64,
    /// Nearest-neighbour interaction `V`.
    #[serde(default)]
    pub neighbor: f64,
}

impl HubbardSpec {
    pub fn spinless(sites: usize, tunneling: f64, neighbor: f64) -> Self {
        Self { sites, components: Components::One, tunneling, onsite: 0.0, neighbor }
    }

    pub fn spinful(sites: usize, tunneling: f64, onsite: f64) -> Self {
        Self { sites, components: Components::Two, tunneling, onsite, neighbor: 0.0 }
    }

    pub fn qubit_count(&self) -> usize {
        match self.components {
            Components::One => self.sites,
            Components::Two => 2 * self.sites,
        }
    }

    /// Effective on-site strength: always zero for spinless fermions.
    pub fn effective_onsite(&self) -> f64 {
        match self.components {
            Components::One => 0.0,
            Components::Two => self.onsite,
        }
    }

    pub fn validate(&self) -> Result<(), HubbardError> {
        if self.sites == 0 {
            return Err(HubbardError::InvalidSpec("sites must be at least 1".into()));
        }
        let n = self.qubit_count();
        if n > MAX_QUBITS {
            return Err(HubbardError::UnsupportedSize(n));
        }
        if ![self.tunneling, self.onsite, self.neighbor].iter().all(|x| x.is_finite()) {
            return Err(HubbardError::InvalidSpec("couplings must be finite".into()));
        }
        if self.components == Components::Two && self.neighbor != 0.0 {
            return Err(HubbardError::InvalidSpec(
                "nearest-neighbour interaction is only supported for spinless chains".into(),
            ));
        }
        Ok(())
    }
}

/// Which commuting group of the Trotter split a term belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TermPart {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub pauli: PauliString,
    pub part: TermPart,
}

/// `H = offset·I + Σ c_k P_k`, each term tagged with its Trotter group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliHamiltonian {
    pub qubit_count: usize,
    pub terms: Vec<PauliTerm>,
    /// Identity component, kept so energies are exact.
    pub offset: f64,
}

impl PauliHamiltonian {
    pub fn empty(qubit_count: usize) -> Self {
        Self { qubit_count, terms: Vec::new(), offset: 0.0 }
    }

    pub fn part(&self, part: TermPart) -> impl Iterator<Item = &PauliTerm> {
        self.terms.iter().filter(move |t| t.part == part)
    }

    pub fn coefficient(&self, label: &str) -> f64 {
        let p: PauliString = label.parse().expect("valid label");
        self.terms.iter().filter(|t| t.pauli == p).map(|t| t.coefficient).sum()
    }

    /// Dense matrix including the identity offset.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        let dim = 1 << self.qubit_count;
        let mut m = DMatrix::<Complex64>::identity(dim, dim) * Complex64::new(self.offset, 0.0);
        for t in &self.terms {
            for k in 0..dim {
                let (row, phase) = t.pauli.apply_to_basis(k);
                m[(row, k)] += phase * t.coefficient;
            }
        }
        m
    }

    /// Dense matrix of one Trotter group (no offset).
    pub fn part_matrix(&self, part: TermPart) -> DMatrix<Complex64> {
        let restricted =
            PauliHamiltonian { qubit_count: self.qubit_count, terms: self.part(part).cloned().collect(), offset: 0.0 };
        restricted.matrix()
    }
}

/// Accumulates Pauli products arising from expanding `(1 - σ^z)` factors.
struct TermCollector {
    n: usize,
    terms: BTreeMap<Vec<Pauli>, f64>,
}

impl TermCollector {
    fn new(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    fn add(&mut self, coefficient: f64, factors: &[(usize, Pauli)]) {
        let mut labels = vec![Pauli::I; self.n];
        for &(q, p) in factors {
            labels[q] = p;
        }
        *self.terms.entry(labels).or_insert(0.0) += coefficient;
    }

    /// `s · (1 - Z_a)(1 - Z_b) / 4`.
    fn add_density_product(&mut self, strength: f64, a: usize, b: usize) {
        let c = strength / 4.0;
        self.add(c, &[]);
        self.add(-c, &[(a, Pauli::Z)]);
        self.add(-c, &[(b, Pauli::Z)]);
        self.add(c, &[(a, Pauli::Z), (b, Pauli::Z)]);
    }

    fn add_hopping(&mut self, tunneling: f64, a: usize, b: usize) {
        self.add(tunneling / 2.0, &[(a, Pauli::X), (b, Pauli::X)]);
        self.add(tunneling / 2.0, &[(a, Pauli::Y), (b, Pauli::Y)]);
    }

    fn finish(self) -> PauliHamiltonian {
        let mut offset = 0.0;
        let mut terms = Vec::new();
        for (labels, c) in self.terms {
            if c == 0.0 {
                continue;
            }
            let pauli = PauliString::new(labels).expect("qubit count checked");
            if pauli.weight() == 0 {
                offset += c;
                continue;
            }
            let part = if pauli.labels().iter().all(|&p| p == Pauli::I || p == Pauli::X) {
                TermPart::X
            } else if pauli.labels().iter().all(|&p| p == Pauli::I || p == Pauli::Y) {
                TermPart::Y
            } else {
                TermPart::Z
            };
            terms.push(PauliTerm { coefficient: c, pauli, part });
        }
        // ascending by site within each group
        terms.sort_by(|a, b| a.part.cmp(&b.part).then_with(|| a.pauli.support().cmp(&b.pauli.support())));
        PauliHamiltonian { qubit_count: self.n, terms, offset }
    }
}

/// Qubit Hamiltonian `H_X + H_Y + H_Z` of the chain.
///
/// Hopping gives `(J/2)(σ^xσ^x + σ^yσ^y)` per bond and per spin chain;
/// interactions give `(V/4)(1-σ^z)(1-σ^z)` per bond and `(U/4)(1-σ^z_l)(1-σ^z_{L+l})`
/// per site, expanded into Pauli strings with the identity part kept in `offset`.
pub fn build_hamiltonian(spec: &HubbardSpec) -> Result<PauliHamiltonian, HubbardError> {
    spec.validate()?;
    let l = spec.sites;
    let mut c = TermCollector::new(spec.qubit_count());
    let chains: &[usize] = match spec.components {
        Components::One => &[0],
        Components::Two => &[0, 1],
    };
    for &chain in chains {
        let base = chain * l;
        for site in 0..l.saturating_sub(1) {
            if spec.tunneling != 0.0 {
                c.add_hopping(spec.tunneling, base + site, base + site + 1);
            }
            if spec.neighbor != 0.0 {
                c.add_density_product(spec.neighbor, base + site, base + site + 1);
            }
        }
    }
    let onsite = spec.effective_onsite();
    if onsite != 0.0 {
        for site in 0..l {
            c.add_density_product(onsite, site, l + site);
        }
    }
    Ok(c.finish())
}

/// Dense `2^n x 2^n` Hermitian matrix of `h`.
pub fn exact_matrix(h: &PauliHamiltonian) -> Result<DMatrix<Complex64>, HubbardError> {
    if h.qubit_count == 0 || h.qubit_count > MAX_QUBITS {
        return Err(HubbardError::UnsupportedSize(h.qubit_count));
    }
    Ok(h.matrix())
}

/// `Σ_n σ^z_n` as a dense matrix (twice the magnetisation; commutes with any
/// number-conserving Hamiltonian).
pub fn total_z(qubit_count: usize) -> DMatrix<Complex64> {
    let dim = 1 << qubit_count;
    DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        dim,
        (0..dim).map(|k| Complex64::new(qubit_count as f64 - 2.0 * (k.count_ones() as f64), 0.0)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_site_hopping_only() {
        let h = build_hamiltonian(&HubbardSpec::spinless(2, 1.0, 0.0)).unwrap();
        assert_eq!(h.terms.len(), 2);
        assert_eq!(h.coefficient("XX"), 0.5);
        assert_eq!(h.coefficient("YY"), 0.5);
        assert_eq!(h.part(TermPart::Z).count(), 0);
        assert_eq!(h.offset, 0.0);
    }

    #[test]
    fn two_site_interaction_terms() {
        let h = build_hamiltonian(&HubbardSpec::spinless(2, 1.0, 2.0)).unwrap();
        // (V/4)(1 - Z1)(1 - Z2) expanded
        assert_eq!(h.coefficient("ZZ"), 0.5);
        assert_eq!(h.coefficient("ZI"), -0.5);
        assert_eq!(h.coefficient("IZ"), -0.5);
        assert_eq!(h.offset, 0.5);
    }

    #[test]
    fn spinful_two_site_layout() {
        let h = build_hamiltonian(&HubbardSpec::spinful(2, 1.0, 2.0)).unwrap();
        assert_eq!(h.qubit_count, 4);
        let xs: Vec<Vec<usize>> = h.part(TermPart::X).map(|t| t.pauli.support()).collect();
        assert_eq!(xs, vec![vec![0, 1], vec![2, 3]]);
        let ys: Vec<Vec<usize>> = h.part(TermPart::Y).map(|t| t.pauli.support()).collect();
        assert_eq!(ys, vec![vec![0, 1], vec![2, 3]]);
        let zz: Vec<Vec<usize>> =
            h.part(TermPart::Z).filter(|t| t.pauli.weight() == 2).map(|t| t.pauli.support()).collect();
        assert_eq!(zz, vec![vec![0, 2], vec![1, 3]]);
        assert_eq!(h.coefficient("ZIZI"), 0.5);
    }

    #[test]
    fn spinless_ignores_onsite() {
        let mut spec = HubbardSpec::spinless(2, 1.0, 0.0);
        spec.onsite = 5.0;
        let h = build_hamiltonian(&spec).unwrap();
        assert_eq!(h.part(TermPart::Z).count(), 0);
    }

    #[test]
    fn size_and_spec_guards() {
        assert_eq!(build_hamiltonian(&HubbardSpec::spinless(5, 1.0, 0.0)), Err(HubbardError::UnsupportedSize(5)));
        assert_eq!(build_hamiltonian(&HubbardSpec::spinful(3, 1.0, 0.0)), Err(HubbardError::UnsupportedSize(6)));
        let mut spec = HubbardSpec::spinful(2, 1.0, 0.0);
        spec.neighbor = 1.0;
        assert!(matches!(build_hamiltonian(&spec), Err(HubbardError::InvalidSpec(_))));
    }

    #[test]
    fn zero_hamiltonian_matrix() {
        let m = exact_matrix(&PauliHamiltonian::empty(2)).unwrap();
        assert_eq!(m.norm(), 0.0);
    }

    #[test]
    fn single_excitation_block_is_hopping() {
        let h = build_hamiltonian(&HubbardSpec::spinless(2, 1.0, 0.0)).unwrap();
        let m = exact_matrix(&h).unwrap();
        // |01> = 1, |10> = 2
        assert!((m[(1, 2)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((m[(2, 1)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(m[(1, 1)].norm() < 1e-15 && m[(2, 2)].norm() < 1e-15);
        assert!(m[(0, 3)].norm() < 1e-15);
    }

    #[test]
    fn doubly_occupied_energy_is_v() {
        let h = build_hamiltonian(&HubbardSpec::spinless(2, 1.0, 2.0)).unwrap();
        let m = exact_matrix(&h).unwrap();
        assert!((m[(3, 3)].re - 2.0).abs() < 1e-15);
        assert!(m[(0, 0)].re.abs() < 1e-15);
        assert!(m[(1, 1)].re.abs() < 1e-15);
    }
}
