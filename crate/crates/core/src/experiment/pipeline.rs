//! Simulation and mitigation of a configured experiment.
//!
//! [`simulate`] produces everything a device run would: per-step raw shot
//! counts and PEC sample records, plus the gate characterizations. [`mitigate`]
//! turns that into populations per stage, fidelities, fits and error bars.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::characterize::{characterize_circuit, decompose_all, GateCharacterization};
use crate::circuit::{compile_to_native, trotter_circuit, Circuit};
use crate::decompose::DecompositionSet;
use crate::hubbard::{build_hamiltonian, Components};
use crate::pauli::basis_label;
use crate::pec::{summarize, Observable, PecRunner, SampleRecord};
use crate::postproc::{
    bootstrap_many, fit_fidelity_per_gate, mle_project, population_fidelity_with, post_select, spin_charge,
    FidelityFit, FidelityMode, SymmetrySector,
};
use crate::seeds;
use crate::sim::readout::{apply_readout_error, ReadoutDirection};
use crate::sim::{run_ideal_steps, run_noisy_ptm_steps, sample_shots, ConfusionMatrix, PauliVector, ShotCounts};

use super::config::ExperimentConfig;
use super::ExperimentError;

/// Seed-path tag separating raw-shot streams from PEC sample streams.
const RAW_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    /// Noiseless Trotter circuit.
    Ideal,
    /// Exact populations of the noisy circuit, no shot noise.
    Noisy,
    /// Readout-corrected shot frequencies of the noisy circuit.
    Raw,
    Pec,
    Mle,
    /// Post-selected onto the symmetry sector.
    Ps,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Ideal => "ideal",
            Stage::Noisy => "noisy",
            Stage::Raw => "raw",
            Stage::Pec => "pec",
            Stage::Mle => "mle",
            Stage::Ps => "ps",
        }
    }

    pub fn is_mitigated(self) -> bool {
        matches!(self, Stage::Pec | Stage::Mle | Stage::Ps)
    }
}

/// Device-side data for one step count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepData {
    pub step: usize,
    pub ideal: Vec<f64>,
    pub noisy: Vec<f64>,
    /// `None` in exact mode.
    pub raw_counts: Option<ShotCounts>,
    pub cost: f64,
    pub pec_shots: u64,
    /// Expectations are the basis-state projectors in index order.
    pub pec_records: Vec<SampleRecord>,
    /// Populations under the exact characterized inverse, replacing sampling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pec_exact: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawData {
    pub config: ExperimentConfig,
    pub circuit: Circuit,
    pub readout: Vec<ConfusionMatrix>,
    pub characterizations: Vec<GateCharacterization>,
    pub decompositions: DecompositionSet,
    pub steps: Vec<StepData>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationRecord {
    pub step: usize,
    pub stage: Stage,
    pub values: Vec<f64>,
    pub err_lo: Vec<f64>,
    pub err_hi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityRecord {
    pub step: usize,
    pub stage: Stage,
    pub fidelity: f64,
    pub unnormalized: f64,
    pub err_lo: f64,
    pub err_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinChargeRecord {
    pub step: usize,
    pub stage: Stage,
    pub site: usize,
    pub spin: f64,
    pub charge: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSummary {
    pub step: usize,
    pub entangling_gates: usize,
    pub cost: f64,
    /// Mass removed by post-selection.
    pub leakage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultBundle {
    pub name: String,
    pub qubit_count: usize,
    pub labels: Vec<String>,
    pub gates_per_step: usize,
    pub sector: SymmetrySector,
    pub populations: Vec<PopulationRecord>,
    pub fidelities: Vec<FidelityRecord>,
    pub fits: BTreeMap<Stage, FidelityFit>,
    pub spin_charge: Vec<SpinChargeRecord>,
    pub steps: Vec<StepSummary>,
    pub gate_costs: BTreeMap<String, f64>,
    pub characterizations: Vec<GateCharacterization>,
    pub decompositions: DecompositionSet,
}

impl ResultBundle {
    pub fn population(&self, stage: Stage, step: usize) -> Option<&PopulationRecord> {
        self.populations.iter().find(|r| r.stage == stage && r.step == step)
    }

    /// Population series of one stage, indexed by step.
    pub fn series(&self, stage: Stage) -> Vec<&PopulationRecord> {
        let mut out: Vec<&PopulationRecord> = self.populations.iter().filter(|r| r.stage == stage).collect();
        out.sort_by_key(|r| r.step);
        out
    }

    pub fn fidelity_series(&self, stage: Stage) -> Vec<f64> {
        let mut out: Vec<&FidelityRecord> = self.fidelities.iter().filter(|r| r.stage == stage).collect();
        out.sort_by_key(|r| r.step);
        out.iter().map(|r| r.fidelity).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.populations.is_empty()
    }
}

/// The native-gate Trotter circuit of a configuration.
pub fn build_circuit(cfg: &ExperimentConfig) -> Result<Circuit, ExperimentError> {
    let h = build_hamiltonian(&cfg.model)?;
    Ok(compile_to_native(&trotter_circuit(&h, cfg.total_time(), cfg.trotter.steps)?)?)
}

/// Characterize the circuit's gates under the configured noise.
pub fn characterize(cfg: &ExperimentConfig) -> Result<Vec<GateCharacterization>, ExperimentError> {
    let circuit = build_circuit(cfg)?;
    let nm = cfg.noise.build(cfg.model.qubit_count())?;
    Ok(characterize_circuit(&circuit, &nm, cfg.characterization_shots(), cfg.characterization.seed)?)
}

/// Step `k` runs the prefix of the first `k` Trotter steps; PEC samples of
/// step `k` come from master seed `derive_seed(master, [k])`.
pub fn simulate(cfg: &ExperimentConfig) -> Result<RawData, ExperimentError> {
    cfg.validate()?;
    let n = cfg.model.qubit_count();
    let circuit = build_circuit(cfg)?;
    let nm = cfg.noise.build(n)?;
    let initial = cfg.initial_state.build(n)?;
    let pv = PauliVector::from_state(&initial);

    let ideal = run_ideal_steps(&circuit, &initial)?;
    let noisy: Vec<Vec<f64>> = run_noisy_ptm_steps(&circuit, &nm, &pv)?.iter().map(|v| v.populations()).collect();
    let characterizations =
        characterize_circuit(&circuit, &nm, cfg.characterization_shots(), cfg.characterization.seed)?;
    let decompositions = decompose_all(&characterizations)?;

    let projectors = Observable::all_projectors(n);
    let master = cfg.pec.master_seed;
    let mut steps = Vec::with_capacity(cfg.trotter.steps + 1);
    for k in 0..=cfg.trotter.steps {
        let prefix = circuit.prefix(k);
        let runner = PecRunner::new(&prefix, &nm, &decompositions)?;
        let (records, exact) = if cfg.pec.exact_inverse {
            (Vec::new(), Some(runner.exact_oracle(&pv)?.populations()))
        } else {
            let seed = seeds::derive_seed(master, &[k as u64]);
            (runner.run_samples(&pv, &projectors, cfg.pec.samples, cfg.pec_shots(), seed)?, None)
        };
        let raw_counts = match cfg.raw_shots() {
            0 => None,
            shots => {
                let read = apply_readout_error(&noisy[k], &nm.readout, ReadoutDirection::Corrupt)?;
                Some(sample_shots(&read, shots, seeds::derive_seed(master, &[RAW_STREAM, k as u64]))?)
            }
        };
        steps.push(StepData {
            step: k,
            ideal: ideal[k].clone(),
            noisy: noisy[k].clone(),
            raw_counts,
            cost: runner.cost(),
            pec_shots: cfg.pec_shots(),
            pec_records: records,
            pec_exact: exact,
        });
    }
    Ok(RawData { config: cfg.clone(), circuit, readout: nm.readout.clone(), characterizations, decompositions, steps })
}

/// Symmetry sector used for post-selection.
pub fn sector_for(cfg: &ExperimentConfig) -> Result<SymmetrySector, ExperimentError> {
    let n = cfg.model.qubit_count();
    match &cfg.post.sector {
        Some(labels) => {
            let mut allowed = std::collections::BTreeSet::new();
            for l in labels {
                match crate::pauli::parse_basis_label(l) {
                    Some((m, k)) if m == n => {
                        allowed.insert(k);
                    }
                    _ => return Err(ExperimentError::Config(format!("post.sector: bad label {l:?}"))),
                }
            }
            Ok(SymmetrySector::new(n, "configured", allowed)?)
        }
        None => {
            let support = cfg.initial_state.build(n)?.support();
            Ok(SymmetrySector::from_support(cfg.model.components, cfg.model.sites, &support)?)
        }
    }
}

/// Populations of the mitigated stages from a set of PEC records.
struct Mitigated {
    pec: Vec<f64>,
    mle: Option<Vec<f64>>,
    ps: Option<Vec<f64>>,
    leakage: f64,
}

fn mitigate_records(
    records: &[&SampleRecord],
    cost: f64,
    dim: usize,
    mle: bool,
    sector: Option<&SymmetrySector>,
) -> Result<Mitigated, ExperimentError> {
    let n = records.len() as f64;
    let pec: Vec<f64> =
        (0..dim).map(|j| cost * records.iter().map(|r| r.sign as f64 * r.expectations[j]).sum::<f64>() / n).collect();
    post_process(pec, mle, sector)
}

fn post_process(pec: Vec<f64>, mle: bool, sector: Option<&SymmetrySector>) -> Result<Mitigated, ExperimentError> {
    let mle = mle.then(|| mle_project(&pec));
    let (ps, leakage) = match sector {
        Some(s) => {
            let input = mle.clone().unwrap_or_else(|| pec.iter().map(|x| x.max(0.0)).collect());
            let (ps, leak) = post_select(&input, s)?;
            (Some(ps), leak)
        }
        None => (None, 0.0),
    };
    Ok(Mitigated { pec, mle, ps, leakage })
}

fn corrected_frequencies(counts: &[u64], shots: u64, readout: &[ConfusionMatrix]) -> Result<Vec<f64>, ExperimentError> {
    let freqs: Vec<f64> = counts.iter().map(|&c| c as f64 / shots.max(1) as f64).collect();
    Ok(apply_readout_error(&freqs, readout, ReadoutDirection::Correct)?)
}

fn fidelities(values: &[f64], ideal: &[f64]) -> [f64; 2] {
    [
        population_fidelity_with(values, ideal, FidelityMode::Normalized),
        population_fidelity_with(values, ideal, FidelityMode::Unnormalized),
    ]
}

/// Per-step populations and fidelities of one step, with error bars.
struct StepResult {
    populations: Vec<PopulationRecord>,
    fidelities: Vec<FidelityRecord>,
    leakage: f64,
}

fn stage_vectors(m: &Mitigated) -> Vec<(Stage, &Vec<f64>)> {
    let mut out = vec![(Stage::Pec, &m.pec)];
    if let Some(v) = &m.mle {
        out.push((Stage::Mle, v));
    }
    if let Some(v) = &m.ps {
        out.push((Stage::Ps, v));
    }
    out
}

fn mitigate_step(raw: &RawData, s: &StepData, sector: Option<&SymmetrySector>) -> Result<StepResult, ExperimentError> {
    let cfg = &raw.config;
    let dim = s.ideal.len();
    let replicates = cfg.post.bootstrap;
    let step_seed = seeds::derive_seed(cfg.post.bootstrap_seed, &[s.step as u64]);
    let mut populations = Vec::new();
    let mut fids = Vec::new();
    let mut push = |stage: Stage, values: Vec<f64>, err: (Vec<f64>, Vec<f64>), ferr: (f64, f64)| {
        let [f, u] = fidelities(&values, &s.ideal);
        fids.push(FidelityRecord { step: s.step, stage, fidelity: f, unnormalized: u, err_lo: ferr.0, err_hi: ferr.1 });
        populations.push(PopulationRecord { step: s.step, stage, values, err_lo: err.0, err_hi: err.1 });
    };
    let zeros = || (vec![0.0; dim], vec![0.0; dim]);

    push(Stage::Ideal, s.ideal.clone(), zeros(), (0.0, 0.0));
    push(Stage::Noisy, s.noisy.clone(), zeros(), (0.0, 0.0));

    // raw: shot frequencies, resampled shot by shot
    match &s.raw_counts {
        None => push(Stage::Raw, s.noisy.clone(), zeros(), (0.0, 0.0)),
        Some(counts) => {
            let dense = counts.dense();
            let values = corrected_frequencies(&dense, counts.shots, &raw.readout)?;
            if replicates == 0 {
                let shots = counts.shots.max(1) as f64;
                let err: Vec<f64> =
                    values.iter().map(|p| (p.clamp(0.0, 1.0) * (1.0 - p.clamp(0.0, 1.0)) / shots).sqrt()).collect();
                push(Stage::Raw, values, (err.clone(), err), (0.0, 0.0));
            } else {
                let outcomes: Vec<usize> =
                    dense.iter().enumerate().flat_map(|(k, &c)| std::iter::repeat_n(k, c as usize)).collect();
                let readout = &raw.readout;
                let ideal = &s.ideal;
                let bs = bootstrap_many(outcomes.len(), replicates, seeds::derive_seed(step_seed, &[1]), |idx| {
                    let mut c = vec![0u64; dim];
                    for &i in idx {
                        c[outcomes[i]] += 1;
                    }
                    let mut v = corrected_frequencies(&c, idx.len() as u64, readout).expect("validated readout");
                    v.push(fidelities(&v, ideal)[0]);
                    v
                })?;
                let err = (bs[..dim].iter().map(|b| b.err_lo).collect(), bs[..dim].iter().map(|b| b.err_hi).collect());
                push(Stage::Raw, values, err, (bs[dim].err_lo, bs[dim].err_hi));
            }
        }
    }

    if let Some(exact) = &s.pec_exact {
        let m = post_process(exact.clone(), cfg.post.mle, sector)?;
        for (stage, values) in stage_vectors(&m) {
            push(stage, values.clone(), zeros(), (0.0, 0.0));
        }
        return Ok(StepResult { populations, fidelities: fids, leakage: m.leakage });
    }

    // mitigated stages: resample whole PEC samples
    let all: Vec<&SampleRecord> = s.pec_records.iter().collect();
    let point = mitigate_records(&all, s.cost, dim, cfg.post.mle, sector)?;
    let leakage = point.leakage;
    let stages: Vec<(Stage, Vec<f64>)> = stage_vectors(&point).into_iter().map(|(st, v)| (st, v.clone())).collect();
    if replicates == 0 {
        let summary = summarize(
            &s.pec_records,
            &Observable::all_projectors(raw.circuit.qubit_count()),
            raw.circuit.qubit_count(),
            s.cost,
            s.pec_shots,
        )?;
        let se: Vec<f64> = summary.iter().map(|e| e.standard_error).collect();
        for (stage, values) in stages {
            let err = if stage == Stage::Pec { (se.clone(), se.clone()) } else { zeros() };
            push(stage, values, err, (0.0, 0.0));
        }
    } else {
        let records = &s.pec_records;
        let ideal = &s.ideal;
        let bs = bootstrap_many(records.len(), replicates, seeds::derive_seed(step_seed, &[0]), |idx| {
            let picked: Vec<&SampleRecord> = idx.iter().map(|&i| &records[i]).collect();
            let m = mitigate_records(&picked, s.cost, dim, cfg.post.mle, sector);
            let mut out = Vec::new();
            match m {
                Ok(m) => {
                    for (_, v) in stage_vectors(&m) {
                        out.extend_from_slice(v);
                        out.push(fidelities(v, ideal)[0]);
                    }
                }
                // a replicate with nothing left in the sector: carry NaN so it stands out
                Err(_) => out.resize(stages.len() * (dim + 1), f64::NAN),
            }
            out
        })?;
        for (i, (stage, values)) in stages.into_iter().enumerate() {
            let block = &bs[i * (dim + 1)..(i + 1) * (dim + 1)];
            let err =
                (block[..dim].iter().map(|b| b.err_lo).collect(), block[..dim].iter().map(|b| b.err_hi).collect());
            push(stage, values, err, (block[dim].err_lo, block[dim].err_hi));
        }
    }
    Ok(StepResult { populations, fidelities: fids, leakage })
}

/// Mitigate simulated (or recorded) device data.
pub fn mitigate(raw: &RawData) -> Result<ResultBundle, ExperimentError> {
    let cfg = &raw.config;
    let n = raw.circuit.qubit_count();
    if raw.steps.is_empty() {
        return Err(ExperimentError::EmptyBundle);
    }
    let sector = sector_for(cfg)?;
    let ps_sector = cfg.post.post_select.then_some(&sector);
    let results: Vec<StepResult> =
        raw.steps.iter().map(|s| mitigate_step(raw, s, ps_sector)).collect::<Result<_, _>>()?;

    let gates_per_step = raw.circuit.entangling_per_step();
    let mut populations = Vec::new();
    let mut fids = Vec::new();
    let mut steps = Vec::new();
    for (s, r) in raw.steps.iter().zip(results) {
        steps.push(StepSummary {
            step: s.step,
            entangling_gates: raw.circuit.prefix(s.step).entangling_count(),
            cost: s.cost,
            leakage: r.leakage,
        });
        populations.extend(r.populations);
        fids.extend(r.fidelities);
    }

    let mut bundle = ResultBundle {
        name: cfg.name.clone(),
        qubit_count: n,
        labels: (0..1 << n).map(|k| basis_label(n, k)).collect(),
        gates_per_step,
        sector,
        populations,
        fidelities: fids,
        fits: BTreeMap::new(),
        spin_charge: Vec::new(),
        steps,
        gate_costs: raw.decompositions.0.iter().map(|(k, d)| (k.clone(), d.cost)).collect(),
        characterizations: raw.characterizations.clone(),
        decompositions: raw.decompositions.clone(),
    };

    if raw.steps.len() >= 3 {
        let stages: Vec<Stage> = [Stage::Noisy, Stage::Raw, Stage::Pec, Stage::Mle, Stage::Ps]
            .into_iter()
            .filter(|&st| bundle.populations.iter().any(|r| r.stage == st))
            .collect();
        for st in stages {
            let fit = fit_fidelity_per_gate(&bundle.fidelity_series(st), gates_per_step)?;
            bundle.fits.insert(st, fit);
        }
    }

    if cfg.model.components == Components::Two {
        let sites = cfg.model.sites;
        let mut sc = Vec::new();
        for r in &bundle.populations {
            for site in 0..sites {
                let (spin, charge) = spin_charge(&r.values, sites, site)?;
                sc.push(SpinChargeRecord { step: r.step, stage: r.stage, site, spin, charge });
            }
        }
        bundle.spin_charge = sc;
    }
    Ok(bundle)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultBundle, ExperimentError> {
    mitigate(&simulate(cfg)?)
}
