//! Noisy circuits lowered to a flat list of local PTM operations.

use nalgebra::DMatrix;

use super::noise::NoiseModel;
use super::pauli_vector::PauliVector;
use super::{check_qubits, SimError};
use crate::circuit::{rotation_unitary, Circuit, EntanglingGate, Gate};
use crate::pauli::{commutation_sign, pauli_dim};
use crate::ptm::{LocalLayout, Ptm};

#[derive(Debug, Clone)]
enum Op {
    Dense {
        layout: LocalLayout,
        matrix: DMatrix<f64>,
    },
    Diagonal {
        layout: LocalLayout,
        diag: Vec<f64>,
    },
    /// Point right after the noisy entangling gate with this index.
    Slot(usize),
    StepEnd,
}

/// A circuit with its noise baked in, ready to run many times with
/// different diagonal insertions after each entangling gate.
#[derive(Debug, Clone)]
pub struct NoisyProgram {
    qubit_count: usize,
    ops: Vec<Op>,
    slot_gates: Vec<EntanglingGate>,
    slot_layouts: Vec<LocalLayout>,
}

impl NoisyProgram {
    pub fn compile(c: &Circuit, nm: &NoiseModel) -> Result<Self, SimError> {
        let n = c.qubit_count();
        check_qubits(n)?;
        nm.validate(n)?;
        let single = nm.single_qubit.as_ref().map(|ch| ch.eigenvalues());
        let crosstalk = nm.crosstalk.as_ref().map(|ch| ch.eigenvalues());
        let mut ops = Vec::new();
        let mut slot_gates = Vec::new();
        let mut slot_layouts = Vec::new();
        let mut ends = c.step_ends().iter().peekable();
        for (i, gate) in c.gates().iter().enumerate() {
            while ends.peek().is_some_and(|&&e| e == i) {
                ops.push(Op::StepEnd);
                ends.next();
            }
            match gate {
                Gate::Rotation { axis, angle, qubit } => {
                    let layout = LocalLayout::new(&[*qubit], n);
                    let r = Ptm::from_unitary(&rotation_unitary(*axis, *angle))?;
                    ops.push(Op::Dense { layout: layout.clone(), matrix: r.matrix().clone() });
                    if let Some(diag) = &single {
                        ops.push(Op::Diagonal { layout, diag: diag.clone() });
                    }
                }
                Gate::Pauli { pauli, qubits } => {
                    let m = pauli.qubit_count();
                    let diag = (0..pauli_dim(m)).map(|b| commutation_sign(m, pauli.index(), b)).collect();
                    ops.push(Op::Diagonal { layout: LocalLayout::new(qubits, n), diag });
                }
                Gate::Entangling(g) => {
                    let pair = [g.pair.0, g.pair.1];
                    let layout = LocalLayout::new(&pair, n);
                    let ideal = Ptm::from_unitary(&g.local_unitary())?;
                    let noisy = ideal.then(&nm.error_ptm(g)?)?;
                    ops.push(Op::Dense { layout: layout.clone(), matrix: noisy.matrix().clone() });
                    if let Some(diag) = &crosstalk {
                        for q in (0..n).filter(|q| !pair.contains(q)) {
                            ops.push(Op::Diagonal { layout: LocalLayout::new(&[q], n), diag: diag.clone() });
                        }
                    }
                    ops.push(Op::Slot(slot_gates.len()));
                    slot_gates.push(g.clone());
                    slot_layouts.push(layout);
                }
            }
        }
        for _ in ends {
            ops.push(Op::StepEnd);
        }
        Ok(Self { qubit_count: n, ops, slot_gates, slot_layouts })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    /// Entangling gates in circuit order; slot `g` follows gate `g`.
    pub fn slot_gates(&self) -> &[EntanglingGate] {
        &self.slot_gates
    }

    pub fn run(&self, initial: &PauliVector) -> Result<PauliVector, SimError> {
        self.run_with(initial, |_| None)
    }

    /// Run, applying the two-qubit diagonal PTM `insert(g)` (16 entries) at
    /// slot `g` when it returns `Some`.
    pub fn run_with<'a, F>(&self, initial: &PauliVector, insert: F) -> Result<PauliVector, SimError>
    where
        F: Fn(usize) -> Option<&'a [f64]>,
    {
        let mut out = None;
        self.execute(initial, insert, |_| {}, &mut out)?;
        Ok(out.expect("execute always finishes"))
    }

    /// Like [`NoisyProgram::run_with`], returning the state before the first
    /// step and after every step.
    pub fn run_steps_with<'a, F>(&self, initial: &PauliVector, insert: F) -> Result<Vec<PauliVector>, SimError>
    where
        F: Fn(usize) -> Option<&'a [f64]>,
    {
        let mut snaps = vec![initial.clone()];
        let mut out = None;
        self.execute(initial, insert, |v| snaps.push(v.clone()), &mut out)?;
        Ok(snaps)
    }

    fn execute<'a, F, S>(
        &self,
        initial: &PauliVector,
        insert: F,
        mut on_step: S,
        out: &mut Option<PauliVector>,
    ) -> Result<(), SimError>
    where
        F: Fn(usize) -> Option<&'a [f64]>,
        S: FnMut(&PauliVector),
    {
        if initial.qubit_count() != self.qubit_count {
            return Err(SimError::DimensionMismatch { expected: self.qubit_count, found: initial.qubit_count() });
        }
        let mut v = initial.clone();
        let mut scratch = Vec::with_capacity(16);
        for op in &self.ops {
            match op {
                Op::Dense { layout, matrix } => v.apply_local(matrix, layout, &mut scratch),
                Op::Diagonal { layout, diag } => v.apply_local_diagonal(diag, layout),
                Op::Slot(g) => {
                    if let Some(diag) = insert(*g) {
                        if diag.len() != 16 {
                            return Err(SimError::DimensionMismatch { expected: 16, found: diag.len() });
                        }
                        v.apply_local_diagonal(diag, &self.slot_layouts[*g]);
                    }
                }
                Op::StepEnd => on_step(&v),
            }
        }
        *out = Some(v);
        Ok(())
    }
}

/// Evolve a Pauli-basis state through the noisy circuit.
pub fn run_noisy_ptm(c: &Circuit, nm: &NoiseModel, initial: &PauliVector) -> Result<PauliVector, SimError> {
    NoisyProgram::compile(c, nm)?.run(initial)
}

/// States before the first step and after each step.
pub fn run_noisy_ptm_steps(c: &Circuit, nm: &NoiseModel, initial: &PauliVector) -> Result<Vec<PauliVector>, SimError> {
    NoisyProgram::compile(c, nm)?.run_steps_with(initial, |_| None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{EntanglerKind, EntanglingGate};
    use crate::ptm::PauliChannel;
    use crate::sim::statevector::{run_ideal, StateVector};

    fn single_yy(angle: f64) -> Circuit {
        let mut c = Circuit::new(2).unwrap();
        c.push(Gate::Entangling(EntanglingGate::new(EntanglerKind::YY, angle, (0, 1)))).unwrap();
        c.end_step();
        c
    }

    #[test]
    fn identity_noise_matches_ideal() {
        let c = single_yy(0.4);
        let s = StateVector::from_labels(&["00", "01"]).unwrap();
        let out = run_noisy_ptm(&c, &NoiseModel::ideal(), &PauliVector::from_state(&s)).unwrap();
        let ideal = run_ideal(&c, &s).unwrap();
        for (a, b) in out.populations().iter().zip(&ideal) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(out.coefficients()[0], 1.0);
    }

    #[test]
    fn zz_noise_spares_populations_but_not_coherences() {
        let c = single_yy(std::f64::consts::FRAC_PI_4);
        let nm = NoiseModel::uniform(PauliChannel::from_labels(2, &[("II", 0.99), ("ZZ", 0.01)]).unwrap());
        let init = PauliVector::from_state(&StateVector::basis(2, 0).unwrap());
        let noisy = run_noisy_ptm(&c, &nm, &init).unwrap();
        let ideal = run_noisy_ptm(&c, &NoiseModel::ideal(), &init).unwrap();
        for (a, b) in noisy.populations().iter().zip(ideal.populations()) {
            assert!((a - b).abs() < 1e-12);
        }
        // a coherence that anticommutes with ZZ shrinks by 1 - 2·0.01
        let init = PauliVector::from_state(&StateVector::from_labels(&["00", "01"]).unwrap());
        let noisy = run_noisy_ptm(&c, &nm, &init).unwrap();
        let ideal = run_noisy_ptm(&c, &NoiseModel::ideal(), &init).unwrap();
        let (b, &largest) = ideal
            .coefficients()
            .iter()
            .enumerate()
            .filter(|&(b, _)| crate::pauli::commutation_sign(2, 15, b) < 0.0)
            .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
            .unwrap();
        assert!(largest.abs() > 0.5);
        assert!((noisy.coefficients()[b] - 0.98 * largest).abs() < 1e-12);
    }

    #[test]
    fn missing_entry_is_reported() {
        let c = single_yy(0.4);
        assert!(matches!(
            run_noisy_ptm(&c, &NoiseModel::default(), &PauliVector::maximally_mixed(2).unwrap()),
            Err(SimError::MissingNoiseEntry(_))
        ));
    }

    #[test]
    fn insertion_applies_after_the_gate() {
        let c = single_yy(0.4);
        let prog = NoisyProgram::compile(&c, &NoiseModel::ideal()).unwrap();
        let x_on_first: Vec<f64> = (0..16).map(|b| commutation_sign(2, 4, b)).collect();
        let init = PauliVector::from_state(&StateVector::basis(2, 0).unwrap());
        let plain = prog.run(&init).unwrap().populations();
        let flipped = prog.run_with(&init, |_| Some(&x_on_first[..])).unwrap().populations();
        // X on qubit 0 swaps |0b⟩ and |1b⟩
        for k in 0..4 {
            assert!((flipped[k ^ 2] - plain[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn steps_are_snapshotted() {
        let mut c = single_yy(0.2);
        c.push(Gate::Entangling(EntanglingGate::new(EntanglerKind::YY, 0.2, (0, 1)))).unwrap();
        c.end_step();
        let init = PauliVector::from_state(&StateVector::basis(2, 0).unwrap());
        let snaps = run_noisy_ptm_steps(&c, &NoiseModel::ideal(), &init).unwrap();
        assert_eq!(snaps.len(), 3);
        let once = run_noisy_ptm(&c.prefix(1), &NoiseModel::ideal(), &init).unwrap();
        assert_eq!(snaps[1], once);
    }
}
