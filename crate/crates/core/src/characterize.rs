//! Simulated process tomography of entangling gates under the Pauli-error
//! assumption.
//!
//! For each non-identity Pauli `P_b` one product eigenstate input is chosen
//! so that the ideal output `⟨P_b⟩` is as large as possible; the noisy
//! measurement divided by that ideal value estimates `λ_b`. A second input
//! is measured as a held-out check: for a Pauli error both ratios agree.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, EntanglingGate};
use crate::decompose::{decompose_labelled, DecompositionError, DecompositionSet, QuasiProbDecomposition};
use crate::pauli::{pauli_dim, PauliString};
use crate::ptm::{Ptm, PtmError};
use crate::seeds;
use crate::sim::{NoiseModel, SimError};

/// Smallest ideal signal accepted for a setting.
pub const MIN_SIGNAL: f64 = 0.5;
/// Clip range for eigenvalue estimates before decomposition.
pub const CLIP_RANGE: (f64, f64) = (1e-3, 1.0);
/// Shots per setting when the configuration does not say.
pub const DEFAULT_SHOTS_PER_SETTING: u64 = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CharacterizationError {
    #[error("gate {gate_id}: error is not a Pauli channel (held-out mismatch {discrepancy:.3e} on {component})")]
    NonPauliError { gate_id: String, component: String, discrepancy: f64 },
    #[error("gate {gate_id}: no input gives an ideal signal of at least {MIN_SIGNAL} on {component}")]
    DegenerateSetting { gate_id: String, component: String },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Ptm(#[from] PtmError),
    #[error(transparent)]
    Decomposition(#[from] DecompositionError),
}

/// One prepared input and measured Pauli.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Setting {
    /// Measured Pauli, e.g. `XZ`.
    pub component: String,
    /// Product eigenstate, one of `0 1 + - r l` per qubit.
    pub input: String,
    pub ideal_expectation: f64,
    pub measured_expectation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateCharacterization {
    pub gate_id: String,
    pub ideal: Ptm,
    /// `diag(λ̂) · ideal`.
    pub estimated_noisy: Ptm,
    /// Clipped estimates, `λ̂_0 = 1`.
    pub pauli_eigenvalue_estimates: Vec<f64>,
    /// Estimates before clipping.
    pub raw_estimates: Vec<f64>,
    /// Indices whose estimate was moved by clipping.
    pub clipped: Vec<usize>,
    /// `0` for exact expectations.
    pub shots_per_setting: u64,
    pub settings: Vec<Setting>,
}

impl GateCharacterization {
    /// Error PTM `estimated_noisy · ideal⁻¹`, diagonal by construction.
    pub fn error_ptm(&self) -> Result<Ptm, PtmError> {
        Ptm::from_diagonal(2, &self.pauli_eigenvalue_estimates)
    }

    pub fn decompose(&self) -> Result<QuasiProbDecomposition, DecompositionError> {
        decompose_labelled(self.gate_id.clone(), &self.error_ptm()?)
    }
}

/// Single-qubit eigenstates as Bloch vectors `(label, ⟨X⟩, ⟨Y⟩, ⟨Z⟩)`.
const EIGENSTATES: [(char, [f64; 3]); 6] = [
    ('0', [0.0, 0.0, 1.0]),
    ('1', [0.0, 0.0, -1.0]),
    ('+', [1.0, 0.0, 0.0]),
    ('-', [-1.0, 0.0, 0.0]),
    ('r', [0.0, 1.0, 0.0]),
    ('l', [0.0, -1.0, 0.0]),
];

/// Pauli-basis vector of a two-qubit product eigenstate.
fn product_input(a: usize, b: usize) -> Vec<f64> {
    let bloch = |s: usize, p: usize| if p == 0 { 1.0 } else { EIGENSTATES[s].1[p - 1] };
    (0..16).map(|j| bloch(a, j / 4) * bloch(b, j % 4)).collect()
}

fn apply(m: &Ptm, v: &[f64]) -> Vec<f64> {
    let r = m.matrix();
    (0..v.len()).map(|i| (0..v.len()).map(|j| r[(i, j)] * v[j]).sum()).collect()
}

fn measure<R: Rng>(exact: f64, shots: u64, rng: &mut R) -> f64 {
    if shots == 0 {
        return exact;
    }
    let p_plus = ((1.0 + exact) / 2.0).clamp(0.0, 1.0);
    let plus = (0..shots).filter(|_| rng.random::<f64>() < p_plus).count() as f64;
    2.0 * plus / shots as f64 - 1.0
}

/// Characterize one two-qubit gate as it acts on its own pair. Noise on
/// other qubits (cross-talk) is invisible here.
pub fn characterize_gate(
    gate: &EntanglingGate,
    nm: &NoiseModel,
    shots_per_setting: u64,
    seed: u64,
) -> Result<GateCharacterization, CharacterizationError> {
    let ideal = Ptm::from_unitary(&gate.local_unitary())?;
    let noisy = ideal.then(&nm.error_ptm(gate)?)?;
    let dim = pauli_dim(2);
    let inputs: Vec<Vec<f64>> = (0..36).map(|s| product_input(s / 6, s % 6)).collect();
    let ideal_out: Vec<Vec<f64>> = inputs.iter().map(|v| apply(&ideal, v)).collect();
    let noisy_out: Vec<Vec<f64>> = inputs.iter().map(|v| apply(&noisy, v)).collect();

    let mut raw = vec![1.0; dim];
    let mut settings = Vec::new();
    for b in 1..dim {
        let component = PauliString::from_index(2, b).expect("index in range").to_string();
        // input Pauli contributing most to the ideal signal
        let dominant = |s: usize| {
            (0..dim)
                .max_by(|&x, &y| {
                    let w = |j: usize| (ideal.get(b, j) * inputs[s][j]).abs();
                    w(x).total_cmp(&w(y)).then(y.cmp(&x))
                })
                .expect("nonempty")
        };
        let mut ranked: Vec<usize> = (0..36).filter(|&s| ideal_out[s][b].abs() >= MIN_SIGNAL).collect();
        // stable: ties keep input order
        ranked.sort_by(|&x, &y| ideal_out[y][b].abs().total_cmp(&ideal_out[x][b].abs()));
        let Some(&best) = ranked.first() else {
            return Err(CharacterizationError::DegenerateSetting { gate_id: gate.gate_id.clone(), component });
        };
        // held-out input: prefer one that probes a different input Pauli
        let held_out =
            ranked.iter().skip(1).find(|&&s| dominant(s) != dominant(best)).or_else(|| ranked.get(1)).copied();
        let mut ratios = Vec::new();
        for (k, s) in std::iter::once(best).chain(held_out).enumerate() {
            let mut rng = seeds::stream_rng(seed, (2 * b + k) as u64);
            let measured = measure(noisy_out[s][b], shots_per_setting, &mut rng);
            ratios.push((measured / ideal_out[s][b], ideal_out[s][b]));
            settings.push(Setting {
                component: component.clone(),
                input: [EIGENSTATES[s / 6].0, EIGENSTATES[s % 6].0].iter().collect(),
                ideal_expectation: ideal_out[s][b],
                measured_expectation: measured,
            });
        }
        raw[b] = ratios[0].0;
        if let [(r1, i1), (r2, i2)] = ratios[..] {
            let tol = if shots_per_setting == 0 {
                1e-9
            } else {
                6.0 * (1.0 / (i1 * i1) + 1.0 / (i2 * i2)).sqrt() / (shots_per_setting as f64).sqrt()
            };
            let discrepancy = (r1 - r2).abs();
            if discrepancy > tol {
                return Err(CharacterizationError::NonPauliError {
                    gate_id: gate.gate_id.clone(),
                    component,
                    discrepancy,
                });
            }
        }
    }

    let mut clipped = Vec::new();
    let estimates: Vec<f64> = raw
        .iter()
        .enumerate()
        .map(|(b, &l)| {
            let c = l.clamp(CLIP_RANGE.0, CLIP_RANGE.1);
            if (c - l).abs() > 1e-12 {
                clipped.push(b);
            }
            c
        })
        .collect();
    let estimated_noisy = ideal.then(&Ptm::from_diagonal(2, &estimates)?)?;
    Ok(GateCharacterization {
        gate_id: gate.gate_id.clone(),
        ideal,
        estimated_noisy,
        pauli_eigenvalue_estimates: estimates,
        raw_estimates: raw,
        clipped,
        shots_per_setting,
        settings,
    })
}

/// Distinct entangling gates of a circuit, by gate id, in first-use order.
pub fn distinct_gates(c: &Circuit) -> Vec<EntanglingGate> {
    let mut seen = std::collections::BTreeSet::new();
    c.entangling_gates().filter(|g| seen.insert(g.gate_id.clone())).cloned().collect()
}

/// Characterize every distinct gate of `c`; gate `k` uses seed `derive_seed(seed, [k])`.
pub fn characterize_circuit(
    c: &Circuit,
    nm: &NoiseModel,
    shots_per_setting: u64,
    seed: u64,
) -> Result<Vec<GateCharacterization>, CharacterizationError> {
    distinct_gates(c)
        .par_iter()
        .enumerate()
        .map(|(k, g)| characterize_gate(g, nm, shots_per_setting, seeds::derive_seed(seed, &[k as u64])))
        .collect()
}

pub fn decompose_all(chars: &[GateCharacterization]) -> Result<DecompositionSet, DecompositionError> {
    chars.iter().map(|c| c.decompose()).collect()
}
