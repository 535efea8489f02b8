//! Probabilistic error cancellation.
//!
//! Each sample draws one Pauli per entangling gate from the gate's
//! quasi-probability decomposition and inserts it, noiselessly, right after
//! the noisy gate. The signed, cost-weighted mean over samples is an unbiased
//! estimate of the noiseless expectation.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, Gate};
use crate::decompose::{DecompositionError, DecompositionSet, QuasiProbDecomposition};
use crate::pauli::{parse_basis_label, PauliString};
use crate::ptm::PtmError;
use crate::seeds;
use crate::sim::readout::{apply_readout_error, ReadoutDirection};
use crate::sim::shots::sample_shots_with;
use crate::sim::{NoiseModel, NoisyProgram, PauliVector, SimError};

/// Largest number of entangling gates [`enumerate_exact`] accepts.
pub const MAX_ENUMERATED_GATES: usize = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PecError {
    #[error("exact enumeration supports at most {MAX_ENUMERATED_GATES} entangling gates, circuit has {0}")]
    TooManyGates(usize),
    #[error("invalid observable: {0}")]
    InvalidObservable(String),
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error(transparent)]
    Decomposition(#[from] DecompositionError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Ptm(#[from] PtmError),
}

/// Quantity estimated from each circuit run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// `|k⟩⟨k|` for basis index `k`.
    Projector(usize),
    Pauli(PauliString),
}

impl Observable {
    /// `"01"` is a projector, `"ZI"` a Pauli string.
    pub fn parse(label: &str, qubit_count: usize) -> Result<Self, PecError> {
        if let Some((n, k)) = parse_basis_label(label) {
            if n == qubit_count {
                return Ok(Observable::Projector(k));
            }
        }
        match label.parse::<PauliString>() {
            Ok(p) if p.qubit_count() == qubit_count => Ok(Observable::Pauli(p)),
            _ => Err(PecError::InvalidObservable(format!("{label:?} on {qubit_count} qubits"))),
        }
    }

    pub fn all_projectors(qubit_count: usize) -> Vec<Self> {
        (0..1 << qubit_count).map(Observable::Projector).collect()
    }

    pub fn label(&self, qubit_count: usize) -> String {
        match self {
            Observable::Projector(k) => crate::pauli::basis_label(qubit_count, *k),
            Observable::Pauli(p) => p.to_string(),
        }
    }

    fn check(&self, qubit_count: usize, shots: u64) -> Result<(), PecError> {
        let ok = match self {
            Observable::Projector(k) => *k < 1 << qubit_count,
            // only Z-type strings can be read from computational-basis shots
            Observable::Pauli(p) => p.qubit_count() == qubit_count && (shots == 0 || p.is_diagonal()),
        };
        if ok {
            Ok(())
        } else {
            Err(PecError::InvalidObservable(self.label(qubit_count)))
        }
    }

    /// Exact expectation on a (pseudo-)state.
    pub fn exact(&self, v: &PauliVector, populations: &[f64]) -> f64 {
        match self {
            Observable::Projector(k) => populations[*k],
            Observable::Pauli(p) => v.expectation(p),
        }
    }

    /// Expectation from a distribution over basis states (Z-type only).
    pub fn from_distribution(&self, freqs: &[f64]) -> f64 {
        match self {
            Observable::Projector(k) => freqs[*k],
            Observable::Pauli(p) => freqs
                .iter()
                .enumerate()
                .map(|(k, f)| {
                    let (_, phase) = p.apply_to_basis(k);
                    phase.re * f
                })
                .sum(),
        }
    }
}

/// One random circuit `𝒮_i`: a Pauli index per entangling gate.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCircuit<'a> {
    pub base: &'a Circuit,
    pub insertions: Vec<usize>,
    pub sign: i8,
    pub sample_index: u64,
    pub sample_seed: u64,
}

impl SampledCircuit<'_> {
    /// The explicit circuit with non-identity insertions as Pauli gates.
    pub fn to_circuit(&self) -> Circuit {
        let mut out = Circuit::new(self.base.qubit_count()).expect("base circuit is valid");
        let mut g = 0;
        let mut ends = self.base.step_ends().iter().peekable();
        for (i, gate) in self.base.gates().iter().enumerate() {
            while ends.peek().is_some_and(|&&e| e == i) {
                out.end_step();
                ends.next();
            }
            out.push(gate.clone()).expect("valid gate");
            if let Gate::Entangling(e) = gate {
                let a = self.insertions[g];
                g += 1;
                if a != 0 {
                    let pauli = PauliString::from_index(2, a).expect("index in range");
                    out.push(Gate::Pauli { pauli, qubits: vec![e.pair.0, e.pair.1] }).expect("valid gate");
                }
            }
        }
        for _ in ends {
            out.end_step();
        }
        out
    }
}

fn draw<R: Rng>(p: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (a, &w) in p.iter().enumerate() {
        acc += w;
        if u < acc {
            return a;
        }
    }
    // rounding left u above the total: take the last nonzero weight
    p.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

fn draw_insertions<R: Rng>(decomps: &[&QuasiProbDecomposition], rng: &mut R) -> (Vec<usize>, i8) {
    let insertions: Vec<usize> = decomps.iter().map(|d| draw(&d.p, rng)).collect();
    let sign = insertions.iter().zip(decomps).map(|(&a, d)| d.signs[a]).product();
    (insertions, sign)
}

/// Draw the insertions of sample `sample_index`; depends only on
/// `(master_seed, sample_index)`.
pub fn sample_circuit<'a>(
    base: &'a Circuit,
    decomps: &DecompositionSet,
    master_seed: u64,
    sample_index: u64,
) -> Result<SampledCircuit<'a>, PecError> {
    let ds = decomps.for_circuit(base)?;
    let sample_seed = seeds::derive_seed(master_seed, &[sample_index]);
    let (insertions, sign) = draw_insertions(&ds, &mut seeds::rng(sample_seed));
    Ok(SampledCircuit { base, insertions, sign, sample_index, sample_seed })
}

/// Per-sample output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample_index: u64,
    pub sign: i8,
    pub insertions: Vec<usize>,
    /// Unsigned `⟨μ⟩_i` for each observable.
    pub expectations: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PecEstimate {
    pub observable: String,
    pub value: f64,
    pub sample_count: usize,
    /// Shots per sample, `0` for exact expectations.
    pub shots: u64,
    pub standard_error: f64,
    pub cost: f64,
}

/// A circuit, its noise and its decompositions, compiled once for many samples.
pub struct PecRunner {
    program: NoisyProgram,
    decomps: Vec<QuasiProbDecomposition>,
    insertion_diagonals: Vec<Vec<Vec<f64>>>,
    inverse_diagonals: Vec<Vec<f64>>,
    readout: Vec<crate::sim::ConfusionMatrix>,
    cost: f64,
}

impl PecRunner {
    pub fn new(base: &Circuit, nm: &NoiseModel, decomps: &DecompositionSet) -> Result<Self, PecError> {
        let program = NoisyProgram::compile(base, nm)?;
        let ds: Vec<QuasiProbDecomposition> = decomps.for_circuit(base)?.into_iter().cloned().collect();
        let insertion_diagonals =
            ds.iter().map(|d| (0..d.q.len()).map(|a| d.insertion_diagonal(a)).collect()).collect();
        let inverse_diagonals = ds.iter().map(|d| d.inverse_diagonal()).collect();
        let cost = ds.iter().map(|d| d.cost).product();
        Ok(Self { program, decomps: ds, insertion_diagonals, inverse_diagonals, readout: nm.readout.clone(), cost })
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn gate_count(&self) -> usize {
        self.decomps.len()
    }

    /// Evolve with the given insertion per gate.
    pub fn run_insertions(&self, initial: &PauliVector, insertions: &[usize]) -> Result<PauliVector, PecError> {
        Ok(self.program.run_with(initial, |g| {
            let a = insertions[g];
            (a != 0).then(|| &self.insertion_diagonals[g][a][..])
        })?)
    }

    /// Run sample `sample_index`; `shots = 0` gives exact expectations.
    pub fn run_sample(
        &self,
        initial: &PauliVector,
        observables: &[Observable],
        shots: u64,
        master_seed: u64,
        sample_index: u64,
    ) -> Result<SampleRecord, PecError> {
        let mut rng = seeds::rng(seeds::derive_seed(master_seed, &[sample_index]));
        let refs: Vec<&QuasiProbDecomposition> = self.decomps.iter().collect();
        let (insertions, sign) = draw_insertions(&refs, &mut rng);
        let v = self.run_insertions(initial, &insertions)?;
        let pops = v.populations();
        let expectations = if shots == 0 {
            observables.iter().map(|o| o.exact(&v, &pops)).collect()
        } else {
            let read = apply_readout_error(&pops, &self.readout, ReadoutDirection::Corrupt)?;
            let counts = sample_shots_with(&read, shots, &mut rng)?;
            let freqs = apply_readout_error(&counts.frequencies(), &self.readout, ReadoutDirection::Correct)?;
            observables.iter().map(|o| o.from_distribution(&freqs)).collect()
        };
        Ok(SampleRecord { sample_index, sign, insertions, expectations })
    }

    /// Samples `0..n_s`, evaluated in parallel and returned in index order.
    pub fn run_samples(
        &self,
        initial: &PauliVector,
        observables: &[Observable],
        n_s: usize,
        shots: u64,
        master_seed: u64,
    ) -> Result<Vec<SampleRecord>, PecError> {
        let n = self.program.qubit_count();
        for o in observables {
            o.check(n, shots)?;
        }
        if n_s == 0 {
            return Err(PecError::NoSamples);
        }
        (0..n_s as u64).into_par_iter().map(|i| self.run_sample(initial, observables, shots, master_seed, i)).collect()
    }

    /// Evolution with the exact inverse error applied after each noisy gate.
    pub fn exact_oracle_steps(&self, initial: &PauliVector) -> Result<Vec<PauliVector>, PecError> {
        Ok(self.program.run_steps_with(initial, |g| Some(&self.inverse_diagonals[g][..]))?)
    }

    pub fn exact_oracle(&self, initial: &PauliVector) -> Result<PauliVector, PecError> {
        Ok(self.program.run_with(initial, |g| Some(&self.inverse_diagonals[g][..]))?)
    }
}

/// Signed, cost-weighted mean and its standard error `C·sd/√N_s`, reduced
/// in sample order.
pub fn summarize(
    records: &[SampleRecord],
    observables: &[Observable],
    qubit_count: usize,
    cost: f64,
    shots: u64,
) -> Result<Vec<PecEstimate>, PecError> {
    let n = records.len();
    if n == 0 {
        return Err(PecError::NoSamples);
    }
    Ok(observables
        .iter()
        .enumerate()
        .map(|(j, o)| {
            let terms: Vec<f64> = records.iter().map(|r| r.sign as f64 * r.expectations[j]).collect();
            let mean = terms.iter().sum::<f64>() / n as f64;
            let sd = if n > 1 {
                (terms.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            PecEstimate {
                observable: o.label(qubit_count),
                value: cost * mean,
                sample_count: n,
                shots,
                standard_error: cost * sd / (n as f64).sqrt(),
                cost,
            }
        })
        .collect())
}

/// Monte-Carlo PEC estimate of each observable.
#[allow(clippy::too_many_arguments)]
pub fn estimate(
    base: &Circuit,
    nm: &NoiseModel,
    decomps: &DecompositionSet,
    initial: &PauliVector,
    observables: &[Observable],
    n_s: usize,
    shots: u64,
    master_seed: u64,
) -> Result<Vec<PecEstimate>, PecError> {
    let runner = PecRunner::new(base, nm, decomps)?;
    let records = runner.run_samples(initial, observables, n_s, shots, master_seed)?;
    summarize(&records, observables, base.qubit_count(), runner.cost(), shots)
}

/// Populations with every gate's error undone exactly by its inverse.
pub fn pec_exact_oracle(
    base: &Circuit,
    nm: &NoiseModel,
    decomps: &DecompositionSet,
    initial: &PauliVector,
) -> Result<Vec<f64>, PecError> {
    Ok(PecRunner::new(base, nm, decomps)?.exact_oracle(initial)?.populations())
}

/// [`pec_exact_oracle`] before the first step and after each step.
pub fn pec_exact_oracle_steps(
    base: &Circuit,
    nm: &NoiseModel,
    decomps: &DecompositionSet,
    initial: &PauliVector,
) -> Result<Vec<Vec<f64>>, PecError> {
    Ok(PecRunner::new(base, nm, decomps)?.exact_oracle_steps(initial)?.iter().map(|v| v.populations()).collect())
}

/// Full weighted sum over all `16^{N_g}` insertion patterns.
pub fn enumerate_exact(
    base: &Circuit,
    nm: &NoiseModel,
    decomps: &DecompositionSet,
    initial: &PauliVector,
    observable: &Observable,
) -> Result<f64, PecError> {
    let ng = base.entangling_count();
    if ng > MAX_ENUMERATED_GATES {
        return Err(PecError::TooManyGates(ng));
    }
    observable.check(base.qubit_count(), 0)?;
    let runner = PecRunner::new(base, nm, decomps)?;
    let mut total = 0.0;
    for pattern in 0..16usize.pow(ng as u32) {
        let insertions: Vec<usize> = (0..ng).map(|g| (pattern >> (4 * (ng - 1 - g))) & 15).collect();
        let weight: f64 = insertions.iter().zip(&runner.decomps).map(|(&a, d)| d.q[a]).product();
        if weight == 0.0 {
            continue;
        }
        let v = runner.run_insertions(initial, &insertions)?;
        total += weight * observable.exact(&v, &v.populations());
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{EntanglerKind, EntanglingGate};
    use crate::decompose::from_eigenvalues;
    use crate::ptm::PauliChannel;
    use crate::sim::{run_ideal, StateVector};

    fn two_gate_circuit() -> Circuit {
        let mut c = Circuit::new(2).unwrap();
        c.push(Gate::Entangling(EntanglingGate::new(EntanglerKind::YY, 0.7, (0, 1)))).unwrap();
        c.push(Gate::Rotation { axis: crate::circuit::Axis::X, angle: 0.4, qubit: 1 }).unwrap();
        c.push(Gate::Entangling(EntanglingGate::new(EntanglerKind::YY, 0.3, (0, 1)))).unwrap();
        c.end_step();
        c
    }

    fn decomps_for(c: &Circuit, nm: &NoiseModel) -> DecompositionSet {
        c.entangling_gates()
            .map(|g| from_eigenvalues(g.gate_id.clone(), 2, &nm.channel_for(g).unwrap().eigenvalues()).unwrap())
            .collect()
    }

    #[test]
    fn identity_decompositions_sample_identity() {
        let c = two_gate_circuit();
        let set: DecompositionSet =
            c.entangling_gates().map(|g| QuasiProbDecomposition::identity(g.gate_id.clone(), 2)).collect();
        for i in 0..20 {
            let s = sample_circuit(&c, &set, 3, i).unwrap();
            assert_eq!(s.insertions, vec![0, 0]);
            assert_eq!(s.sign, 1);
            assert_eq!(s.to_circuit(), c);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let c = two_gate_circuit();
        let nm = NoiseModel::uniform(PauliChannel::depolarizing(2, 0.3).unwrap());
        let set = decomps_for(&c, &nm);
        assert_eq!(sample_circuit(&c, &set, 5, 17).unwrap(), sample_circuit(&c, &set, 5, 17).unwrap());
    }

    #[test]
    fn exact_oracle_cancels_noise() {
        let c = two_gate_circuit();
        let nm = NoiseModel::uniform(PauliChannel::from_labels(2, &[("II", 0.9), ("XY", 0.06), ("ZI", 0.04)]).unwrap());
        let s = StateVector::from_labels(&["00", "01"]).unwrap();
        let out = pec_exact_oracle(&c, &nm, &decomps_for(&c, &nm), &PauliVector::from_state(&s)).unwrap();
        for (a, b) in out.iter().zip(run_ideal(&c, &s).unwrap()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn enumeration_matches_oracle() {
        let c = two_gate_circuit();
        let nm = NoiseModel::uniform(PauliChannel::depolarizing(2, 0.05).unwrap());
        let set = decomps_for(&c, &nm);
        let init = PauliVector::from_state(&StateVector::basis(2, 0).unwrap());
        let oracle = pec_exact_oracle(&c, &nm, &set, &init).unwrap();
        for (k, expected) in oracle.iter().enumerate() {
            let e = enumerate_exact(&c, &nm, &set, &init, &Observable::Projector(k)).unwrap();
            assert!((e - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn enumeration_without_gates_is_noisy_value() {
        let mut c = Circuit::new(2).unwrap();
        c.push(Gate::Rotation { axis: crate::circuit::Axis::Y, angle: 0.5, qubit: 0 }).unwrap();
        let init = PauliVector::from_state(&StateVector::basis(2, 0).unwrap());
        let e =
            enumerate_exact(&c, &NoiseModel::ideal(), &DecompositionSet::default(), &init, &Observable::Projector(0))
                .unwrap();
        assert!((e - (0.25f64).cos().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn too_many_gates() {
        let mut c = two_gate_circuit();
        c.push(Gate::Entangling(EntanglingGate::new(EntanglerKind::YY, 0.1, (0, 1)))).unwrap();
        let nm = NoiseModel::ideal();
        let set = decomps_for(&c, &nm);
        let init = PauliVector::maximally_mixed(2).unwrap();
        assert_eq!(enumerate_exact(&c, &nm, &set, &init, &Observable::Projector(0)), Err(PecError::TooManyGates(3)));
    }

    #[test]
    fn noiseless_estimate_has_only_shot_noise() {
        let c = two_gate_circuit();
        let nm = NoiseModel::ideal();
        let set = decomps_for(&c, &nm);
        let s = StateVector::basis(2, 0).unwrap();
        let init = PauliVector::from_state(&s);
        let obs = Observable::all_projectors(2);
        let exact = estimate(&c, &nm, &set, &init, &obs, 50, 0, 1).unwrap();
        let ideal = run_ideal(&c, &s).unwrap();
        for (e, p) in exact.iter().zip(&ideal) {
            assert!((e.value - p).abs() < 1e-12);
            assert!(e.standard_error < 1e-12);
            assert_eq!(e.cost, 1.0);
        }
        let sampled = estimate(&c, &nm, &set, &init, &obs, 50, 100, 1).unwrap();
        assert!(sampled.iter().any(|e| e.standard_error > 0.0));
    }

    #[test]
    fn observable_parsing() {
        assert_eq!(Observable::parse("10", 2).unwrap(), Observable::Projector(2));
        assert_eq!(Observable::parse("ZI", 2).unwrap(), Observable::Pauli("ZI".parse().unwrap()));
        assert!(Observable::parse("ZIZ", 2).is_err());
        assert!(Observable::Pauli("XI".parse().unwrap()).check(2, 100).is_err());
        assert!(Observable::Pauli("XI".parse().unwrap()).check(2, 0).is_ok());
    }

    #[test]
    fn z_string_from_distribution() {
        let o = Observable::Pauli("ZZ".parse().unwrap());
        assert_eq!(o.from_distribution(&[0.5, 0.0, 0.0, 0.5]), 1.0);
        assert_eq!(o.from_distribution(&[0.0, 1.0, 0.0, 0.0]), -1.0);
    }
}
