//! Noise attached to gates and to the detector.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::circuit::{entangler_unitary, EntanglingGate};
use crate::ptm::{PauliChannel, Ptm};

/// Detector response of one qubit: `m[read][actual]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix(pub [[f64; 2]; 2]);

impl ConfusionMatrix {
    pub fn identity() -> Self {
        Self([[1.0, 0.0], [0.0, 1.0]])
    }

    /// Reads `1` for a true `0` with probability `e01`, and `0` for a true `1` with `e10`.
    pub fn flips(e01: f64, e10: f64) -> Self {
        Self([[1.0 - e01, e10], [e01, 1.0 - e10]])
    }

    pub fn validate(&self, qubit: usize) -> Result<(), SimError> {
        let m = self.0;
        let bad = |reason: String| Err(SimError::InvalidConfusion { qubit, reason });
        if m.iter().flatten().any(|x| !(0.0..=1.0).contains(x)) {
            return bad("entries must lie in [0, 1]".into());
        }
        for (col, sum) in [m[0][0] + m[1][0], m[0][1] + m[1][1]].into_iter().enumerate() {
            if (sum - 1.0).abs() > 1e-12 {
                return bad(format!("column {col} sums to {sum}"));
            }
        }
        if m[0][0] < 0.5 || m[1][1] < 0.5 {
            return bad("diagonal entries below 0.5".into());
        }
        Ok(())
    }

    pub fn inverse(&self, qubit: usize) -> Result<[[f64; 2]; 2], SimError> {
        let [[a, b], [c, d]] = self.0;
        let det = a * d - b * c;
        if det.abs() < 1e-12 {
            return Err(SimError::SingularConfusion { qubit });
        }
        Ok([[d / det, -b / det], [-c / det, a / det]])
    }
}

/// Gate and detector noise.
///
/// Two-qubit channels are looked up by gate id (`yy(0,1)@0.392699`), then by
/// pair key (`yy(0,1)`), then fall back to `default_channel`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseModel {
    #[serde(default)]
    pub per_gate: BTreeMap<String, PauliChannel>,
    #[serde(default)]
    pub default_channel: Option<PauliChannel>,
    /// Coherent extra angle `ε` per gate (the gate becomes `exp(-i(φ+ε)σσ)`).
    /// Not a Pauli error; characterization reports it as such.
    #[serde(default)]
    pub overrotation: BTreeMap<String, f64>,
    /// One-qubit channel after every single-qubit rotation.
    #[serde(default)]
    pub single_qubit: Option<PauliChannel>,
    /// One-qubit channel hitting every spectator qubit of an entangling gate.
    #[serde(default)]
    pub crosstalk: Option<PauliChannel>,
    /// Per-qubit detector response; empty means perfect readout.
    #[serde(default)]
    pub readout: Vec<ConfusionMatrix>,
}

impl NoiseModel {
    /// Every entangling gate gets the identity channel.
    pub fn ideal() -> Self {
        Self::uniform(PauliChannel::identity(2).expect("two qubits"))
    }

    /// The same channel after every entangling gate.
    pub fn uniform(channel: PauliChannel) -> Self {
        Self { default_channel: Some(channel), ..Self::default() }
    }

    pub fn with_gate(mut self, key: impl Into<String>, channel: PauliChannel) -> Self {
        self.per_gate.insert(key.into(), channel);
        self
    }

    pub fn channel_for(&self, gate: &EntanglingGate) -> Result<&PauliChannel, SimError> {
        self.per_gate
            .get(&gate.gate_id)
            .or_else(|| self.per_gate.get(&gate.pair_key()))
            .or(self.default_channel.as_ref())
            .ok_or_else(|| SimError::MissingNoiseEntry(gate.gate_id.clone()))
    }

    pub fn overrotation_for(&self, gate: &EntanglingGate) -> f64 {
        self.overrotation.get(&gate.gate_id).or_else(|| self.overrotation.get(&gate.pair_key())).copied().unwrap_or(0.0)
    }

    /// Error PTM applied after the ideal gate: overrotation first, then the
    /// Pauli channel.
    pub fn error_ptm(&self, gate: &EntanglingGate) -> Result<Ptm, SimError> {
        let channel = self.channel_for(gate)?.ptm();
        let eps = self.overrotation_for(gate);
        if eps == 0.0 {
            return Ok(channel);
        }
        let coherent = Ptm::from_unitary(&entangler_unitary(gate.kind, eps))?;
        Ok(coherent.then(&channel)?)
    }

    pub fn has_readout_error(&self) -> bool {
        self.readout.iter().any(|m| *m != ConfusionMatrix::identity())
    }

    /// Copy with the spectator channel removed.
    pub fn without_crosstalk(&self) -> Self {
        Self { crosstalk: None, ..self.clone() }
    }

    pub fn validate(&self, qubit_count: usize) -> Result<(), SimError> {
        let named = self.per_gate.iter().map(|(k, c)| (k.as_str(), c));
        for (key, ch) in named.chain(self.default_channel.iter().map(|c| ("default", c))) {
            if ch.qubit_count() != 2 {
                return Err(SimError::InvalidNoise(format!("channel {key} must act on two qubits")));
            }
        }
        for (name, ch) in [("single_qubit", &self.single_qubit), ("crosstalk", &self.crosstalk)] {
            if ch.as_ref().is_some_and(|c| c.qubit_count() != 1) {
                return Err(SimError::InvalidNoise(format!("{name} channel must act on one qubit")));
            }
        }
        if !self.readout.is_empty() && self.readout.len() != qubit_count {
            return Err(SimError::DimensionMismatch { expected: qubit_count, found: self.readout.len() });
        }
        for (q, m) in self.readout.iter().enumerate() {
            m.validate(q)?;
        }
        if let Some((k, e)) = self.overrotation.iter().find(|(_, e)| !e.is_finite()) {
            return Err(SimError::InvalidNoise(format!("overrotation {k} = {e}")));
        }
        Ok(())
    }
}
