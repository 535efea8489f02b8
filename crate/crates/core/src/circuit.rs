//! Gate-level circuits, first-order Trotterization and compilation to the
//! native `YY` entangler.
//!
//! Gate conventions:
//! - `Rotation { axis, angle θ }` is `exp(-i θ σ/2)`, so `√Z = exp(-iπ/4 σ^z)` is a
//!   Z rotation by `π/2`.
//! - An entangler of kind `KK` with angle `φ` is `exp(-i φ σ^k⊗σ^k)`; a Pauli
//!   term `c·σ^kσ^k` evolved for `δt` is therefore the gate with `φ = c·δt`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hubbard::{PauliHamiltonian, TermPart};
use crate::pauli::{Pauli, PauliString, MAX_QUBITS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("number of Trotter steps must be at least 1, got {0}")]
    InvalidSteps(usize),
    #[error("unknown gate kind {0:?}")]
    UnknownGateKind(String),
    #[error("gate acts on invalid qubits {qubits:?} of a {qubit_count}-qubit circuit")]
    InvalidQubits { qubits: Vec<usize>, qubit_count: usize },
    #[error("unsupported Hamiltonian term {0}: only 1- and 2-qubit terms of a single axis can be Trotterized")]
    UnsupportedTerm(String),
    #[error("qubit count {0} outside 1..={MAX_QUBITS}")]
    InvalidQubitCount(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn pauli(self) -> Pauli {
        match self {
            Axis::X => Pauli::X,
            Axis::Y => Pauli::Y,
            Axis::Z => Pauli::Z,
        }
    }
}

/// Two-qubit Ising-type entangler `exp(-iφ σσ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum EntanglerKind {
    XX,
    YY,
    ZZ,
}

impl EntanglerKind {
    pub fn axis(self) -> Axis {
        match self {
            EntanglerKind::XX => Axis::X,
            EntanglerKind::YY => Axis::Y,
            EntanglerKind::ZZ => Axis::Z,
        }
    }

    fn from_axis(axis: Axis) -> Self {
        match axis {
            Axis::X => EntanglerKind::XX,
            Axis::Y => EntanglerKind::YY,
            Axis::Z => EntanglerKind::ZZ,
        }
    }
}

impl fmt::Display for EntanglerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntanglerKind::XX => "XX",
            EntanglerKind::YY => "YY",
            EntanglerKind::ZZ => "ZZ",
        })
    }
}

impl FromStr for EntanglerKind {
    type Err = CircuitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "XX" => Ok(EntanglerKind::XX),
            "YY" => Ok(EntanglerKind::YY),
            "ZZ" => Ok(EntanglerKind::ZZ),
            _ => Err(CircuitError::UnknownGateKind(s.to_string())),
        }
    }
}

impl TryFrom<String> for EntanglerKind {
    type Error = CircuitError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<EntanglerKind> for String {
    fn from(k: EntanglerKind) -> Self {
        k.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntanglingGate {
    pub kind: EntanglerKind,
    pub angle: f64,
    pub pair: (usize, usize),
    /// Key used to look up this gate's noise and its error decomposition.
    pub gate_id: String,
}

impl EntanglingGate {
    pub fn new(kind: EntanglerKind, angle: f64, pair: (usize, usize)) -> Self {
        let gate_id = Self::default_id(kind, angle, pair);
        Self { kind, angle, pair, gate_id }
    }

    /// `yy(0,1)@0.785398`: distinct ideal gates get distinct ids.
    pub fn default_id(kind: EntanglerKind, angle: f64, pair: (usize, usize)) -> String {
        format!("{}({},{})@{:.6}", kind.to_string().to_lowercase(), pair.0, pair.1, angle)
    }

    /// `yy(0,1)`: shared by every gate of this kind on the pair.
    pub fn pair_key(&self) -> String {
        format!("{}({},{})", self.kind.to_string().to_lowercase(), self.pair.0, self.pair.1)
    }

    /// 4x4 unitary `cos φ·I - i sin φ·σ⊗σ`, first pair qubit most significant.
    pub fn local_unitary(&self) -> DMatrix<Complex64> {
        entangler_unitary(self.kind, self.angle)
    }
}

pub fn entangler_unitary(kind: EntanglerKind, angle: f64) -> DMatrix<Complex64> {
    let p = kind.axis().pauli();
    let pp = PauliString::new(vec![p, p]).expect("two qubits").matrix();
    DMatrix::<Complex64>::identity(4, 4) * Complex64::new(angle.cos(), 0.0) - pp * Complex64::new(0.0, angle.sin())
}

/// `exp(-i θ σ/2)`.
pub fn rotation_unitary(axis: Axis, angle: f64) -> DMatrix<Complex64> {
    let p = PauliString::new(vec![axis.pauli()]).expect("one qubit").matrix();
    let half = angle / 2.0;
    DMatrix::<Complex64>::identity(2, 2) * Complex64::new(half.cos(), 0.0) - p * Complex64::new(0.0, half.sin())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "snake_case")]
pub enum Gate {
    Rotation {
        axis: Axis,
        angle: f64,
        qubit: usize,
    },
    Entangling(EntanglingGate),
    /// Ideal Pauli layer, used for error-cancellation insertions.
    Pauli {
        pauli: PauliString,
        qubits: Vec<usize>,
    },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::Rotation { qubit, .. } => vec![*qubit],
            Gate::Entangling(g) => vec![g.pair.0, g.pair.1],
            Gate::Pauli { qubits, .. } => qubits.clone(),
        }
    }

    /// Unitary on the gate's own qubits, in the order of [`Gate::qubits`].
    pub fn local_unitary(&self) -> DMatrix<Complex64> {
        match self {
            Gate::Rotation { axis, angle, .. } => rotation_unitary(*axis, *angle),
            Gate::Entangling(g) => g.local_unitary(),
            Gate::Pauli { pauli, .. } => pauli.matrix(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    qubit_count: usize,
    gates: Vec<Gate>,
    /// Gate count at the end of each Trotter step.
    #[serde(default)]
    step_ends: Vec<usize>,
}

impl Circuit {
    pub fn new(qubit_count: usize) -> Result<Self, CircuitError> {
        if qubit_count == 0 || qubit_count > MAX_QUBITS {
            return Err(CircuitError::InvalidQubitCount(qubit_count));
        }
        Ok(Self { qubit_count, gates: Vec::new(), step_ends: Vec::new() })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn step_ends(&self) -> &[usize] {
        &self.step_ends
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), CircuitError> {
        let qubits = gate.qubits();
        let distinct = qubits.iter().enumerate().all(|(i, q)| !qubits[..i].contains(q));
        if qubits.is_empty() || !distinct || qubits.iter().any(|&q| q >= self.qubit_count) {
            return Err(CircuitError::InvalidQubits { qubits, qubit_count: self.qubit_count });
        }
        if let Gate::Pauli { pauli, qubits } = &gate {
            if pauli.qubit_count() != qubits.len() {
                return Err(CircuitError::InvalidQubits { qubits: qubits.clone(), qubit_count: self.qubit_count });
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    /// Mark the current end of the gate list as a Trotter step boundary.
    pub fn end_step(&mut self) {
        self.step_ends.push(self.gates.len());
    }

    pub fn step_count(&self) -> usize {
        self.step_ends.len()
    }

    /// Circuit made of the first `steps` Trotter steps (`0` gives an empty circuit).
    pub fn prefix(&self, steps: usize) -> Circuit {
        let steps = steps.min(self.step_ends.len());
        let end = if steps == 0 { 0 } else { self.step_ends[steps - 1] };
        Circuit {
            qubit_count: self.qubit_count,
            gates: self.gates[..end].to_vec(),
            step_ends: self.step_ends[..steps].to_vec(),
        }
    }

    pub fn entangling_gates(&self) -> impl Iterator<Item = &EntanglingGate> {
        self.gates.iter().filter_map(|g| match g {
            Gate::Entangling(e) => Some(e),
            _ => None,
        })
    }

    pub fn entangling_count(&self) -> usize {
        self.entangling_gates().count()
    }

    pub fn rotation_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Rotation { .. })).count()
    }

    /// Entangling gates in the first Trotter step.
    pub fn entangling_per_step(&self) -> usize {
        let end = self.step_ends.first().copied().unwrap_or(self.gates.len());
        self.gates[..end].iter().filter(|g| matches!(g, Gate::Entangling(_))).count()
    }
}

/// First-order Trotter circuit: each step applies the X group, then the Y
/// group, then the Z group (so the step unitary is `e^{-iH_Zδt} e^{-iH_Yδt} e^{-iH_Xδt}`).
/// Single-qubit Z terms are merged into one rotation per qubit per step.
pub fn trotter_circuit(h: &PauliHamiltonian, total_time: f64, steps: usize) -> Result<Circuit, CircuitError> {
    if steps < 1 {
        return Err(CircuitError::InvalidSteps(steps));
    }
    let dt = total_time / steps as f64;
    let n = h.qubit_count;
    let mut step_gates = Vec::new();
    for part in [TermPart::X, TermPart::Y, TermPart::Z] {
        let mut single = vec![0.0; n];
        let mut has_single = vec![false; n];
        let mut pairs = Vec::new();
        for term in h.part(part) {
            let support = term.pauli.support();
            let axes: Vec<Pauli> = support.iter().map(|&q| term.pauli.labels()[q]).collect();
            let axis = match axes[0] {
                Pauli::X => Axis::X,
                Pauli::Y => Axis::Y,
                Pauli::Z => Axis::Z,
                Pauli::I => unreachable!("support excludes identity"),
            };
            if axes.iter().any(|&a| a != axes[0]) {
                return Err(CircuitError::UnsupportedTerm(term.pauli.to_string()));
            }
            match support.len() {
                1 => {
                    single[support[0]] += term.coefficient;
                    has_single[support[0]] = true;
                }
                2 => pairs.push(Gate::Entangling(EntanglingGate::new(
                    EntanglerKind::from_axis(axis),
                    term.coefficient * dt,
                    (support[0], support[1]),
                ))),
                _ => return Err(CircuitError::UnsupportedTerm(term.pauli.to_string())),
            }
            if support.len() == 1 && axis != part_axis(part) {
                return Err(CircuitError::UnsupportedTerm(term.pauli.to_string()));
            }
        }
        step_gates.extend(pairs);
        for q in 0..n {
            if has_single[q] && single[q] != 0.0 {
                step_gates.push(Gate::Rotation { axis: part_axis(part), angle: 2.0 * single[q] * dt, qubit: q });
            }
        }
    }
    let mut c = Circuit::new(n)?;
    for _ in 0..steps {
        for g in &step_gates {
            c.push(g.clone())?;
        }
        c.end_step();
    }
    Ok(c)
}

fn part_axis(part: TermPart) -> Axis {
    match part {
        TermPart::X => Axis::X,
        TermPart::Y => Axis::Y,
        TermPart::Z => Axis::Z,
    }
}

/// Rewrite every entangler as a `YY` gate conjugated by single-qubit rotations:
/// `XX_φ = (√Z⊗√Z)† YY_φ (√Z⊗√Z)` and `ZZ_φ = (√X⊗√X) YY_φ (√X⊗√X)†`.
/// Step boundaries are preserved.
pub fn compile_to_native(c: &Circuit) -> Result<Circuit, CircuitError> {
    let mut out = Circuit::new(c.qubit_count)?;
    let mut boundaries = c.step_ends.iter().peekable();
    for (i, gate) in c.gates.iter().enumerate() {
        while boundaries.peek().is_some_and(|&&b| b == i) {
            out.end_step();
            boundaries.next();
        }
        match gate {
            Gate::Entangling(g) => {
                let (m, n) = g.pair;
                let native = Gate::Entangling(EntanglingGate::new(EntanglerKind::YY, g.angle, g.pair));
                let conj = |axis: Axis, angle: f64| {
                    [Gate::Rotation { axis, angle, qubit: m }, Gate::Rotation { axis, angle, qubit: n }]
                };
                match g.kind {
                    EntanglerKind::YY => out.push(native)?,
                    EntanglerKind::XX => {
                        for r in conj(Axis::Z, FRAC_PI_2) {
                            out.push(r)?;
                        }
                        out.push(native)?;
                        for r in conj(Axis::Z, -FRAC_PI_2) {
                            out.push(r)?;
                        }
                    }
                    EntanglerKind::ZZ => {
                        for r in conj(Axis::X, -FRAC_PI_2) {
                            out.push(r)?;
                        }
                        out.push(native)?;
                        for r in conj(Axis::X, FRAC_PI_2) {
                            out.push(r)?;
                        }
                    }
                }
            }
            other => out.push(other.clone())?,
        }
    }
    for _ in boundaries {
        out.end_step();
    }
    Ok(out)
}
