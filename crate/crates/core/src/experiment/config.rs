//! JSON experiment configuration and the built-in presets.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::characterize::DEFAULT_SHOTS_PER_SETTING;
use crate::hubbard::HubbardSpec;
use crate::ptm::{average_gate_fidelity, PauliChannel, Ptm};
use crate::sim::{ConfusionMatrix, NoiseModel, StateVector};

use super::ExperimentError;

/// Names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 5] =
    ["two_spinless", "three_spinless", "three_spinless_v0", "two_site_spinful", "two_site_spinful_u0"];

pub const DEFAULT_RAW_SHOTS: u64 = 300;
pub const DEFAULT_BOOTSTRAP: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrotterConfig {
    pub steps: usize,
    /// `φ = J·δt/2`.
    pub angle: f64,
}

impl TrotterConfig {
    pub fn step_time(&self, tunneling: f64) -> f64 {
        2.0 * self.angle / tunneling
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Equal superposition of the listed basis states.
    Labels(Vec<String>),
    /// `(label, re, im)` triples; normalized on use.
    Amplitudes(Vec<(String, f64, f64)>),
}

impl InitialState {
    pub fn build(&self, qubit_count: usize) -> Result<StateVector, ExperimentError> {
        let state = match self {
            InitialState::Labels(labels) => {
                let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
                StateVector::from_labels(&refs)?
            }
            InitialState::Amplitudes(terms) => {
                let mut parsed = Vec::with_capacity(terms.len());
                for (label, re, im) in terms {
                    let (n, k) = crate::pauli::parse_basis_label(label)
                        .ok_or_else(|| ExperimentError::Config(format!("initial_state: bad basis label {label:?}")))?;
                    if n != qubit_count {
                        return Err(ExperimentError::Config(format!(
                            "initial_state: label {label:?} has {n} qubits, model has {qubit_count}"
                        )));
                    }
                    parsed.push((k, num_complex::Complex64::new(*re, *im)));
                }
                StateVector::superposition(qubit_count, &parsed)?
            }
        };
        if state.qubit_count() != qubit_count {
            return Err(ExperimentError::Config(format!(
                "initial_state has {} qubits, model has {qubit_count}",
                state.qubit_count()
            )));
        }
        Ok(state)
    }
}

/// A named Pauli channel, given either by its parameter or by a target
/// average gate fidelity that is solved for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    Identity,
    Depolarizing {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        average_gate_fidelity: Option<f64>,
    },
    Dephasing {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        average_gate_fidelity: Option<f64>,
    },
    /// Explicit weights keyed by Pauli label; missing labels are zero.
    Pauli {
        weights: BTreeMap<String, f64>,
    },
}

impl ChannelSpec {
    pub fn depolarizing_at(average_gate_fidelity: f64) -> Self {
        ChannelSpec::Depolarizing { p: None, average_gate_fidelity: Some(average_gate_fidelity) }
    }

    pub fn build(&self, qubit_count: usize) -> Result<PauliChannel, ExperimentError> {
        let family = |p: f64, dephasing: bool| {
            if dephasing {
                PauliChannel::dephasing(qubit_count, p)
            } else {
                PauliChannel::depolarizing(qubit_count, p)
            }
        };
        let param = |p: &Option<f64>, f: &Option<f64>, dephasing: bool| -> Result<PauliChannel, ExperimentError> {
            match (p, f) {
                (Some(p), None) => Ok(family(*p, dephasing)?),
                (None, Some(f)) => {
                    let p = calibrate(*f, |p| family(p, dephasing))?;
                    Ok(family(p, dephasing)?)
                }
                _ => {
                    Err(ExperimentError::Config("channel needs exactly one of `p` and `average_gate_fidelity`".into()))
                }
            }
        };
        match self {
            ChannelSpec::Identity => Ok(PauliChannel::identity(qubit_count)?),
            ChannelSpec::Depolarizing { p, average_gate_fidelity } => param(p, average_gate_fidelity, false),
            ChannelSpec::Dephasing { p, average_gate_fidelity } => param(p, average_gate_fidelity, true),
            ChannelSpec::Pauli { weights } => {
                let entries: Vec<(&str, f64)> = weights.iter().map(|(k, &v)| (k.as_str(), v)).collect();
                Ok(PauliChannel::from_labels(qubit_count, &entries)?)
            }
        }
    }
}

/// Solve `F_avg(channel(p)) = target` for `p ∈ [0, 1]` by bisection.
/// The family must lose fidelity monotonically in `p`.
pub fn calibrate<F>(target: f64, channel: F) -> Result<f64, ExperimentError>
where
    F: Fn(f64) -> Result<PauliChannel, crate::ptm::PtmError>,
{
    let fidelity = |p: f64| -> Result<f64, ExperimentError> {
        let ch = channel(p)?;
        Ok(average_gate_fidelity(&ch.ptm(), &Ptm::identity(ch.qubit_count())?)?)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    let (f_lo, f_hi) = (fidelity(lo)?, fidelity(hi)?);
    if !(target <= f_lo && target >= f_hi) {
        return Err(ExperimentError::Config(format!(
            "average gate fidelity {target} outside reachable range [{f_hi}, {f_lo}]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if fidelity(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Gate and detector noise in configuration form.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    /// Channel for entangling gates without their own entry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<ChannelSpec>,
    /// Per gate id or pair key (`yy(0,1)`).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub gates: BTreeMap<String, ChannelSpec>,
    /// Coherent overrotation per gate id or pair key.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrotation: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub single_qubit: Option<ChannelSpec>,
    /// Spectator channel applied during every entangling gate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crosstalk: Option<ChannelSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub readout: Vec<ConfusionMatrix>,
}

impl NoiseSpec {
    pub fn ideal() -> Self {
        Self { default: Some(ChannelSpec::Identity), ..Self::default() }
    }

    pub fn build(&self, qubit_count: usize) -> Result<NoiseModel, ExperimentError> {
        let per_gate = self
            .gates
            .iter()
            .map(|(k, c)| Ok((k.clone(), c.build(2).map_err(|e| e.in_field(&format!("noise.gates.{k}")))?)))
            .collect::<Result<_, ExperimentError>>()?;
        let one = |c: &Option<ChannelSpec>, field: &str| {
            c.as_ref().map(|c| c.build(1).map_err(|e| e.in_field(field))).transpose()
        };
        let nm = NoiseModel {
            per_gate,
            default_channel: self.default.as_ref().map(|c| c.build(2)).transpose()?,
            overrotation: self.overrotation.clone(),
            single_qubit: one(&self.single_qubit, "noise.single_qubit")?,
            crosstalk: one(&self.crosstalk, "noise.crosstalk")?,
            readout: self.readout.clone(),
        };
        nm.validate(qubit_count)?;
        Ok(nm)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PecConfig {
    pub samples: usize,
    /// Shots per sampled circuit; `0` uses exact expectations.
    pub shots: u64,
    pub master_seed: u64,
    /// Apply each gate's characterized inverse exactly instead of sampling.
    #[serde(default)]
    pub exact_inverse: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacterizationConfig {
    #[serde(default = "default_shots_per_setting")]
    pub shots_per_setting: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub exact: bool,
}

fn default_shots_per_setting() -> u64 {
    DEFAULT_SHOTS_PER_SETTING
}

impl Default for CharacterizationConfig {
    fn default() -> Self {
        Self { shots_per_setting: DEFAULT_SHOTS_PER_SETTING, seed: 0, exact: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PostConfig {
    #[serde(default = "yes")]
    pub mle: bool,
    #[serde(default = "yes")]
    pub post_select: bool,
    /// Allowed basis labels; by default the sector of the initial state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sector: Option<Vec<String>>,
    /// Bootstrap replicates; `0` disables resampling.
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
    #[serde(default)]
    pub bootstrap_seed: u64,
}

fn yes() -> bool {
    true
}

fn default_bootstrap() -> usize {
    DEFAULT_BOOTSTRAP
}

impl Default for PostConfig {
    fn default() -> Self {
        Self { mle: true, post_select: true, sector: None, bootstrap: DEFAULT_BOOTSTRAP, bootstrap_seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub model: HubbardSpec,
    pub trotter: TrotterConfig,
    pub initial_state: InitialState,
    pub noise: NoiseSpec,
    pub pec: PecConfig,
    #[serde(default)]
    pub characterization: CharacterizationConfig,
    #[serde(default)]
    pub post: PostConfig,
    /// Shots for the unmitigated populations.
    #[serde(default = "default_raw_shots")]
    pub raw_shots: u64,
    /// Exact expectations everywhere: characterization, raw and PEC.
    #[serde(default)]
    pub exact: bool,
    #[serde(default)]
    pub outputs: OutputConfig,
}

fn default_raw_shots() -> u64 {
    DEFAULT_RAW_SHOTS
}

impl ExperimentConfig {
    /// Parse JSON, reporting the line and column of any error.
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let cfg: Self = serde_json::from_str(text)
            .map_err(|e| ExperimentError::Config(format!("line {} column {}: {e}", e.line(), e.column())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        self.model.validate()?;
        if self.trotter.steps == 0 {
            return Err(ExperimentError::Config("trotter.steps must be at least 1".into()));
        }
        if !(self.trotter.angle.is_finite() && self.model.tunneling != 0.0) {
            return Err(ExperimentError::Config("trotter.angle must be finite and model.tunneling nonzero".into()));
        }
        if self.pec.samples == 0 {
            return Err(ExperimentError::Config("pec.samples must be at least 1".into()));
        }
        let min = crate::postproc::bootstrap::MIN_REPLICATES;
        if self.post.bootstrap != 0 && self.post.bootstrap < min {
            return Err(ExperimentError::Config(format!("post.bootstrap must be 0 or at least {min}")));
        }
        Ok(())
    }

    pub fn total_time(&self) -> f64 {
        self.trotter.steps as f64 * self.trotter.step_time(self.model.tunneling)
    }

    /// Exact-expectation mode: no shot noise anywhere.
    pub fn with_exact(mut self) -> Self {
        self.exact = true;
        self.characterization.exact = true;
        self.pec.shots = 0;
        self
    }

    /// Reseed characterization, PEC, raw shots and bootstrap from one seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.characterization.seed = crate::seeds::derive_seed(seed, &[0]);
        self.pec.master_seed = crate::seeds::derive_seed(seed, &[1]);
        self.post.bootstrap_seed = crate::seeds::derive_seed(seed, &[2]);
        self
    }

    pub fn characterization_shots(&self) -> u64 {
        if self.exact || self.characterization.exact {
            0
        } else {
            self.characterization.shots_per_setting
        }
    }

    pub fn pec_shots(&self) -> u64 {
        if self.exact {
            0
        } else {
            self.pec.shots
        }
    }

    pub fn raw_shots(&self) -> u64 {
        if self.exact {
            0
        } else {
            self.raw_shots
        }
    }
}

fn labels(ls: &[&str]) -> InitialState {
    InitialState::Labels(ls.iter().map(|s| s.to_string()).collect())
}

fn per_pair(entries: &[(&str, f64)]) -> NoiseSpec {
    NoiseSpec {
        gates: entries.iter().map(|(k, f)| (k.to_string(), ChannelSpec::depolarizing_at(*f))).collect(),
        ..NoiseSpec::default()
    }
}

fn base(
    name: &str,
    model: HubbardSpec,
    steps: usize,
    angle: f64,
    init: &[&str],
    noise: NoiseSpec,
    n_s: usize,
) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        model,
        trotter: TrotterConfig { steps, angle },
        initial_state: labels(init),
        noise,
        pec: PecConfig { samples: n_s, shots: DEFAULT_RAW_SHOTS, master_seed: 0, exact_inverse: false },
        characterization: CharacterizationConfig::default(),
        post: PostConfig::default(),
        raw_shots: DEFAULT_RAW_SHOTS,
        exact: false,
        outputs: OutputConfig::default(),
    }
}

/// Built-in experiment. Noise is depolarizing per entangling pair,
/// calibrated to the listed average gate fidelities.
pub fn preset(name: &str) -> Result<ExperimentConfig, ExperimentError> {
    let three = |v: f64| {
        base(
            name,
            HubbardSpec::spinless(3, 1.0, v),
            4,
            PI / 8.0,
            &["101", "110"],
            per_pair(&[("yy(0,1)", 0.9779), ("yy(1,2)", 0.9748)]),
            1500,
        )
    };
    let spinful = |u: f64| {
        base(
            name,
            HubbardSpec::spinful(2, 1.0, u),
            4,
            PI / 8.0,
            &["1001", "1010"],
            per_pair(&[("yy(0,1)", 0.9755), ("yy(2,3)", 0.9706), ("yy(0,2)", 0.9720), ("yy(1,3)", 0.9744)]),
            2000,
        )
    };
    match name {
        "two_spinless" => Ok(base(
            name,
            HubbardSpec::spinless(2, 1.0, 2.0),
            8,
            PI / 4.0,
            &["11", "10"],
            per_pair(&[("yy(0,1)", 0.9811)]),
            1000,
        )),
        "three_spinless" => Ok(three(2.0)),
        "three_spinless_v0" => Ok(three(0.0)),
        "two_site_spinful" => Ok(spinful(2.0)),
        "two_site_spinful_u0" => Ok(spinful(0.0)),
        other => Err(ExperimentError::UnknownPreset(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calibration_hits_target() {
        let p = calibrate(0.9811, |p| PauliChannel::depolarizing(2, p)).unwrap();
        // F_avg = (4·(1 − 15p/16) + 1)/5
        let f = (4.0 * (1.0 - 15.0 * p / 16.0) + 1.0) / 5.0;
        assert!((f - 0.9811).abs() < 1e-12);
        assert!((p - 0.0252).abs() < 1e-12);
    }

    #[test]
    fn calibration_rejects_unreachable_target() {
        assert!(calibrate(1.5, |p| PauliChannel::depolarizing(2, p)).is_err());
    }

    #[test]
    fn presets_round_trip_through_json() {
        for name in PRESET_NAMES {
            let cfg = preset(name).unwrap();
            let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
            assert_eq!(cfg, back);
        }
    }

    #[test]
    fn preset_noise_builds_on_every_pair() {
        for name in PRESET_NAMES {
            let cfg = preset(name).unwrap();
            let nm = cfg.noise.build(cfg.model.qubit_count()).unwrap();
            assert!(nm.default_channel.is_none());
            assert!(!nm.per_gate.is_empty());
        }
    }

    #[test]
    fn config_error_reports_position() {
        let err = ExperimentConfig::from_json("{\n  \"name\": 3\n}").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn unknown_field_is_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&preset("two_spinless").unwrap().to_json()).unwrap();
        v["trotter"]["stepz"] = 3.into();
        let err = ExperimentConfig::from_json(&v.to_string()).unwrap_err();
        assert!(err.to_string().contains("stepz"), "{err}");
    }

    #[test]
    fn channel_needs_one_parameter() {
        let c = ChannelSpec::Depolarizing { p: Some(0.1), average_gate_fidelity: Some(0.9) };
        assert!(c.build(2).is_err());
    }

    #[test]
    fn exact_mode_disables_shots() {
        let cfg = preset("two_spinless").unwrap().with_exact();
        assert_eq!((cfg.characterization_shots(), cfg.pec_shots(), cfg.raw_shots()), (0, 0, 0));
    }
}
