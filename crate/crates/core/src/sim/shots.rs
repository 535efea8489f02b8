//! Finite-shot measurement in the computational basis.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::{check_qubits, SimError};
use crate::pauli::{basis_label, parse_basis_label};
use crate::seeds;

/// Outcome histogram; labels with zero counts are omitted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotCounts {
    pub qubit_count: usize,
    pub shots: u64,
    pub counts: BTreeMap<String, u64>,
    /// Negative input populations were clipped before sampling.
    #[serde(default)]
    pub clipped: bool,
}

impl ShotCounts {
    /// Counts per basis index.
    pub fn dense(&self) -> Vec<u64> {
        let mut out = vec![0; 1 << self.qubit_count];
        for (label, &c) in &self.counts {
            if let Some((_, k)) = parse_basis_label(label) {
                out[k] += c;
            }
        }
        out
    }

    pub fn from_dense(qubit_count: usize, dense: &[u64]) -> Self {
        let counts =
            dense.iter().enumerate().filter(|(_, &c)| c > 0).map(|(k, &c)| (basis_label(qubit_count, k), c)).collect();
        Self { qubit_count, shots: dense.iter().sum(), counts, clipped: false }
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let shots = self.shots.max(1) as f64;
        self.dense().iter().map(|&c| c as f64 / shots).collect()
    }
}

/// Clip negatives to zero and renormalize; the flag reports whether any
/// entry was below `-1e-12`.
pub fn clip_to_simplex(populations: &[f64]) -> Result<(Vec<f64>, bool), SimError> {
    if populations.iter().any(|p| !p.is_finite()) {
        return Err(SimError::InvalidState("non-finite population".into()));
    }
    let clipped = populations.iter().any(|&p| p < -1e-12);
    let mut out: Vec<f64> = populations.iter().map(|&p| p.max(0.0)).collect();
    let total: f64 = out.iter().sum();
    if total <= 0.0 {
        return Err(SimError::InvalidState("populations have no positive mass".into()));
    }
    for p in out.iter_mut() {
        *p /= total;
    }
    Ok((out, clipped))
}

/// Multinomial draw of `shots` outcomes.
pub fn sample_shots(populations: &[f64], shots: u64, seed: u64) -> Result<ShotCounts, SimError> {
    sample_shots_with(populations, shots, &mut seeds::rng(seed))
}

/// [`sample_shots`] driven by a caller-owned generator.
pub fn sample_shots_with<R: Rng + ?Sized>(
    populations: &[f64],
    shots: u64,
    rng: &mut R,
) -> Result<ShotCounts, SimError> {
    let dim = populations.len();
    if !dim.is_power_of_two() || dim < 2 {
        return Err(SimError::InvalidState(format!("{dim} populations is not a register size")));
    }
    let n = dim.trailing_zeros() as usize;
    check_qubits(n)?;
    let (p, clipped) = clip_to_simplex(populations)?;
    let mut dense = vec![0u64; dim];
    let mut remaining = shots;
    let mut mass = 1.0;
    for k in 0..dim {
        if remaining == 0 {
            break;
        }
        if k == dim - 1 || mass <= 0.0 {
            dense[k] = remaining;
            break;
        }
        let q = (p[k] / mass).clamp(0.0, 1.0);
        let draw = Binomial::new(remaining, q).expect("probability clamped").sample(rng);
        dense[k] = draw;
        remaining -= draw;
        mass -= p[k];
    }
    let mut counts = ShotCounts::from_dense(n, &dense);
    counts.clipped = clipped;
    Ok(counts)
}
