//! Conserved-quantity sectors and post-selection onto them.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::PostError;
use crate::hubbard::Components;
use crate::pauli::basis_label;

/// Minimum in-sector mass for post-selection to be defined.
pub const MIN_SECTOR_MASS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetrySector {
    pub qubit_count: usize,
    /// Conserved quantities, e.g. `N=2` or `N_up=1,N_down=1`.
    pub description: String,
    pub allowed: BTreeSet<usize>,
}

fn occupations(components: Components, sites: usize, k: usize) -> (u32, u32) {
    match components {
        Components::One => (k.count_ones(), 0),
        // up modes are the leading qubits, i.e. the high bits
        Components::Two => ((k >> sites).count_ones(), (k & ((1 << sites) - 1)).count_ones()),
    }
}

impl SymmetrySector {
    pub fn new(
        qubit_count: usize,
        description: impl Into<String>,
        allowed: BTreeSet<usize>,
    ) -> Result<Self, PostError> {
        if allowed.is_empty() {
            return Err(PostError::NoAllowedStates);
        }
        if let Some(&k) = allowed.iter().find(|&&k| k >= 1 << qubit_count) {
            return Err(PostError::DimensionMismatch { expected: 1 << qubit_count, found: k });
        }
        Ok(Self { qubit_count, description: description.into(), allowed })
    }

    /// Fixed total particle number on a one-component register.
    pub fn particle_number(qubit_count: usize, count: u32) -> Result<Self, PostError> {
        let allowed = (0..1usize << qubit_count).filter(|k| k.count_ones() == count).collect();
        Self::new(qubit_count, format!("N={count}"), allowed)
    }

    /// Every basis state sharing conserved numbers with some state in
    /// `support` (total number for one component, per-spin numbers for two).
    pub fn from_support(components: Components, sites: usize, support: &[usize]) -> Result<Self, PostError> {
        let n = match components {
            Components::One => sites,
            Components::Two => 2 * sites,
        };
        let numbers: BTreeSet<(u32, u32)> = support.iter().map(|&k| occupations(components, sites, k)).collect();
        let allowed = (0..1usize << n).filter(|&k| numbers.contains(&occupations(components, sites, k))).collect();
        let description = numbers
            .iter()
            .map(|(a, b)| match components {
                Components::One => format!("N={a}"),
                Components::Two => format!("N_up={a},N_down={b}"),
            })
            .collect::<Vec<_>>()
            .join(" | ");
        Self::new(n, description, allowed)
    }

    pub fn labels(&self) -> Vec<String> {
        self.allowed.iter().map(|&k| basis_label(self.qubit_count, k)).collect()
    }

    pub fn contains(&self, k: usize) -> bool {
        self.allowed.contains(&k)
    }
}

/// Zero out-of-sector entries and renormalize; also returns the discarded mass.
pub fn post_select(p: &[f64], sector: &SymmetrySector) -> Result<(Vec<f64>, f64), PostError> {
    if p.len() != 1 << sector.qubit_count {
        return Err(PostError::DimensionMismatch { expected: 1 << sector.qubit_count, found: p.len() });
    }
    let total: f64 = p.iter().sum();
    let inside: f64 = sector.allowed.iter().map(|&k| p[k]).sum();
    if inside.is_nan() || inside < MIN_SECTOR_MASS {
        return Err(PostError::EmptySector { in_sector: inside });
    }
    let out = (0..p.len()).map(|k| if sector.contains(k) { p[k] / inside } else { 0.0 }).collect();
    Ok((out, total - inside))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_fermion_example() {
        let s = SymmetrySector::particle_number(2, 1).unwrap();
        let (q, leak) = post_select(&[0.1, 0.4, 0.4, 0.1], &s).unwrap();
        assert_eq!(q, vec![0.0, 0.5, 0.5, 0.0]);
        assert!((leak - 0.2).abs() < 1e-15);
    }

    #[test]
    fn in_sector_input_unchanged() {
        let s = SymmetrySector::particle_number(2, 1).unwrap();
        let (q, leak) = post_select(&[0.0, 0.3, 0.7, 0.0], &s).unwrap();
        assert_eq!(q, vec![0.0, 0.3, 0.7, 0.0]);
        assert_eq!(leak, 0.0);
    }

    #[test]
    fn spinful_sector_has_four_states() {
        let support = [0b1001, 0b1010];
        let s = SymmetrySector::from_support(Components::Two, 2, &support).unwrap();
        assert_eq!(s.labels(), vec!["0101", "0110", "1001", "1010"]);
    }

    #[test]
    fn three_site_sector() {
        let s = SymmetrySector::from_support(Components::One, 3, &[0b101, 0b110]).unwrap();
        assert_eq!(s.labels(), vec!["011", "101", "110"]);
        assert_eq!(s.description, "N=2");
    }

    #[test]
    fn two_site_mixed_sector_is_a_union() {
        let s = SymmetrySector::from_support(Components::One, 2, &[0b11, 0b10]).unwrap();
        assert_eq!(s.labels(), vec!["01", "10", "11"]);
    }

    #[test]
    fn empty_sector_errors() {
        let s = SymmetrySector::particle_number(2, 2).unwrap();
        assert!(matches!(post_select(&[1.0, 0.0, 0.0, 0.0], &s), Err(PostError::EmptySector { .. })));
        assert_eq!(SymmetrySector::particle_number(2, 3), Err(PostError::NoAllowedStates));
    }
}
