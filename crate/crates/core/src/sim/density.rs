//! Density-matrix simulation, kept separate from the PTM path so the two can
//! check each other.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::noise::NoiseModel;
use super::{check_qubits, SimError};
use crate::circuit::{entangler_unitary, Circuit, Gate};
use crate::pauli::{Pauli, PauliString};
use crate::ptm::PauliChannel;

/// Full-register operator for a local one acting on `qubits`.
pub fn embed_operator(u: &DMatrix<Complex64>, qubits: &[usize], n: usize) -> DMatrix<Complex64> {
    let dim = 1usize << n;
    let mut full = DMatrix::zeros(dim, dim);
    let bit = |k: usize, q: usize| (k >> (n - 1 - q)) & 1;
    for row in 0..dim {
        for col in 0..dim {
            let others_match = (0..n).filter(|q| !qubits.contains(q)).all(|q| bit(row, q) == bit(col, q));
            if !others_match {
                continue;
            }
            let local = |k: usize| qubits.iter().fold(0, |acc, &q| 2 * acc + bit(k, q));
            full[(row, col)] = u[(local(row), local(col))];
        }
    }
    full
}

fn conjugate(rho: &DMatrix<Complex64>, u: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    u * rho * u.adjoint()
}

fn apply_channel(rho: &DMatrix<Complex64>, ch: &PauliChannel, qubits: &[usize], n: usize) -> DMatrix<Complex64> {
    let m = ch.qubit_count();
    let mut out = DMatrix::zeros(rho.nrows(), rho.ncols());
    for (a, &w) in ch.weights().iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let local = PauliString::from_index(m, a).expect("index in range");
        let factors: Vec<(usize, Pauli)> = qubits.iter().copied().zip(local.labels().iter().copied()).collect();
        let p = PauliString::from_sparse(n, &factors).expect("valid qubits").matrix();
        out += conjugate(rho, &p) * Complex64::new(w, 0.0);
    }
    out
}

fn apply_gate(rho: DMatrix<Complex64>, gate: &Gate, nm: &NoiseModel, n: usize) -> Result<DMatrix<Complex64>, SimError> {
    let qubits = gate.qubits();
    let mut rho = conjugate(&rho, &embed_operator(&gate.local_unitary(), &qubits, n));
    match gate {
        Gate::Rotation { .. } => {
            if let Some(ch) = &nm.single_qubit {
                rho = apply_channel(&rho, ch, &qubits, n);
            }
        }
        Gate::Pauli { .. } => {}
        Gate::Entangling(g) => {
            let eps = nm.overrotation_for(g);
            if eps != 0.0 {
                rho = conjugate(&rho, &embed_operator(&entangler_unitary(g.kind, eps), &qubits, n));
            }
            rho = apply_channel(&rho, nm.channel_for(g)?, &qubits, n);
            if let Some(ch) = &nm.crosstalk {
                for q in (0..n).filter(|q| !qubits.contains(q)) {
                    rho = apply_channel(&rho, ch, &[q], n);
                }
            }
        }
    }
    Ok(rho)
}

fn evolve(
    c: &Circuit,
    nm: &NoiseModel,
    initial: &DMatrix<Complex64>,
    mut on_step: impl FnMut(&DMatrix<Complex64>),
) -> Result<DMatrix<Complex64>, SimError> {
    let n = c.qubit_count();
    check_qubits(n)?;
    nm.validate(n)?;
    if initial.nrows() != 1 << n || initial.ncols() != 1 << n {
        return Err(SimError::DimensionMismatch { expected: 1 << n, found: initial.nrows() });
    }
    let mut rho = initial.clone();
    let mut ends = c.step_ends().iter().peekable();
    for (i, g) in c.gates().iter().enumerate() {
        while ends.peek().is_some_and(|&&e| e == i) {
            on_step(&rho);
            ends.next();
        }
        rho = apply_gate(rho, g, nm, n)?;
    }
    for _ in ends {
        on_step(&rho);
    }
    Ok(rho)
}

/// Noisy evolution of a density matrix; returns the state before the first
/// step and after each step (`step_count + 1` entries).
pub fn run_noisy_density_steps(
    c: &Circuit,
    nm: &NoiseModel,
    initial: &DMatrix<Complex64>,
) -> Result<Vec<DMatrix<Complex64>>, SimError> {
    let mut out = vec![initial.clone()];
    evolve(c, nm, initial, |rho| out.push(rho.clone()))?;
    Ok(out)
}

/// Final state of the noisy evolution, including gates after the last step.
pub fn run_noisy_density(
    c: &Circuit,
    nm: &NoiseModel,
    initial: &DMatrix<Complex64>,
) -> Result<DMatrix<Complex64>, SimError> {
    evolve(c, nm, initial, |_| {})
}

pub fn density_populations(rho: &DMatrix<Complex64>) -> Vec<f64> {
    (0..rho.nrows()).map(|k| rho[(k, k)].re).collect()
}
