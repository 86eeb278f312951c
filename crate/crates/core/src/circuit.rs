//! Gates and circuits built from controlled single-qubit unitaries.
//!
//! A gate acts on its target qubit only when every control qubit matches its
//! polarity bit, so a multi-controlled gate keyed to a full ancilla pattern
//! fires on exactly one syndrome. This is all the structure the codes here
//! need: encoders are CNOT/Clifford networks and recoveries are lookup-style
//! pattern-controlled corrections.

use crate::error::{QecError, Result};
use crate::linalg::{pauli_x, ComplexMatrix, StateVector};

/// Unitarity tolerance for gate construction.
pub const GATE_TOL: f64 = 1e-12;

/// A single-qubit unitary with (possibly empty) polarity controls.
#[derive(Debug, Clone)]
pub struct Gate {
    target: usize,
    unitary: ComplexMatrix,
    /// (qubit, polarity): the gate fires only when each control qubit's basis
    /// value equals its polarity bit.
    controls: Vec<(usize, bool)>,
}

impl Gate {
    pub fn new(target: usize, unitary: ComplexMatrix, controls: Vec<(usize, bool)>) -> Result<Self> {
        if unitary.rows() != 2 || unitary.cols() != 2 {
            return Err(QecError::InvalidGate("gate unitary must be 2x2".into()));
        }
        let defect = unitary.unitarity_defect();
        if defect > GATE_TOL {
            return Err(QecError::NotUnitary { defect });
        }
        let mut seen = Vec::with_capacity(controls.len());
        for &(qubit, _) in &controls {
            if qubit == target {
                return Err(QecError::InvalidGate(format!(
                    "target {target} appears among controls"
                )));
            }
            if seen.contains(&qubit) {
                return Err(QecError::InvalidGate(format!(
                    "duplicate control qubit {qubit}"
                )));
            }
            seen.push(qubit);
        }
        Ok(Self {
            target,
            unitary,
            controls,
        })
    }

    /// Uncontrolled single-qubit gate.
    pub fn single(target: usize, unitary: ComplexMatrix) -> Result<Self> {
        Self::new(target, unitary, Vec::new())
    }

    /// CNOT with a positive control.
    pub fn cnot(control: usize, target: usize) -> Self {
        Self::new(target, pauli_x(), vec![(control, true)]).expect("valid cnot")
    }

    /// X on `target` controlled on an exact ancilla pattern. `pattern` bit i
    /// (counting from the most significant of `qubits.len()` bits) is the
    /// required polarity of `qubits[i]`.
    pub fn pattern_controlled(
        target: usize,
        unitary: ComplexMatrix,
        qubits: &[usize],
        pattern: usize,
    ) -> Result<Self> {
        let k = qubits.len();
        let controls = qubits
            .iter()
            .enumerate()
            .map(|(i, &qb)| (qb, pattern >> (k - 1 - i) & 1 == 1))
            .collect();
        Self::new(target, unitary, controls)
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.unitary
    }

    pub fn controls(&self) -> &[(usize, bool)] {
        &self.controls
    }

    pub fn adjoint(&self) -> Self {
        Self {
            target: self.target,
            unitary: self.unitary.adjoint(),
            controls: self.controls.clone(),
        }
    }

    /// Same gate with every qubit index shifted up by `offset`.
    pub fn shifted(&self, offset: usize) -> Self {
        Self {
            target: self.target + offset,
            unitary: self.unitary.clone(),
            controls: self
                .controls
                .iter()
                .map(|&(qb, pol)| (qb + offset, pol))
                .collect(),
        }
    }

    /// (mask, value) pair over basis-index bits for the control condition.
    pub fn control_mask_value(&self, n_qubits: usize) -> (usize, usize) {
        let mut mask = 0usize;
        let mut value = 0usize;
        for &(qubit, polarity) in &self.controls {
            let bit = 1usize << (n_qubits - 1 - qubit);
            mask |= bit;
            if polarity {
                value |= bit;
            }
        }
        (mask, value)
    }

    /// True when the unitary is the Pauli X (so the gate permutes basis states).
    pub fn is_controlled_x(&self) -> bool {
        self.unitary.max_abs_diff(&pauli_x()) <= GATE_TOL
    }

    pub fn max_qubit(&self) -> usize {
        self.controls
            .iter()
            .map(|&(qb, _)| qb)
            .chain(std::iter::once(self.target))
            .max()
            .unwrap()
    }
}

/// An ordered list of gates on a fixed-width register.
#[derive(Debug, Clone, Default)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn with_gates(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut circuit = Self::new(n_qubits);
        for gate in gates {
            circuit.push(gate)?;
        }
        Ok(circuit)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        if gate.max_qubit() >= self.n_qubits {
            return Err(QecError::InvalidGate(format!(
                "gate touches qubit {} on a {}-qubit circuit",
                gate.max_qubit(),
                self.n_qubits
            )));
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Gates reversed, each unitary conjugate-transposed.
    pub fn inverse(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().map(Gate::adjoint).collect(),
        }
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &Self) -> Self {
        assert_eq!(self.n_qubits, other.n_qubits);
        let mut gates = self.gates.clone();
        gates.extend(other.gates.iter().cloned());
        Self {
            n_qubits: self.n_qubits,
            gates,
        }
    }

    /// Same circuit acting on qubits `offset..offset+n` of a wider register.
    pub fn shifted(&self, offset: usize, new_width: usize) -> Self {
        assert!(self.n_qubits + offset <= new_width);
        Self {
            n_qubits: new_width,
            gates: self.gates.iter().map(|g| g.shifted(offset)).collect(),
        }
    }

    pub fn apply_to_state(&self, state: &mut StateVector) {
        assert_eq!(state.n_qubits(), self.n_qubits);
        for gate in &self.gates {
            let (mask, value) = gate.control_mask_value(self.n_qubits);
            state.apply_controlled_1q(gate.unitary(), gate.target(), mask, value);
        }
    }

    /// Apply to a density matrix, which may be wider than the circuit; extra
    /// qubits occupy the leading indices (e.g. a reference qubit at index 0),
    /// so circuit qubit t maps to register qubit t + shift while the control
    /// bit positions stay put.
    pub fn apply_to_density(&self, rho: &mut crate::channel::DensityMatrix) {
        let n = rho.n_qubits();
        assert!(n >= self.n_qubits);
        let shift = n - self.n_qubits;
        for gate in &self.gates {
            let (mask, value) = gate.control_mask_value(self.n_qubits);
            rho.apply_controlled_1q(gate.unitary(), gate.target() + shift, mask, value);
        }
    }

    /// True when every gate is a (multi-)controlled X, so the circuit maps
    /// basis states to basis states.
    pub fn is_all_controlled_x(&self) -> bool {
        self.gates.iter().all(Gate::is_controlled_x)
    }

    /// Propagate a basis index through an all-controlled-X circuit.
    pub fn permute_basis(&self, mut index: usize) -> usize {
        debug_assert!(self.is_all_controlled_x());
        for gate in &self.gates {
            let (mask, value) = gate.control_mask_value(self.n_qubits);
            if index & mask == value {
                index ^= 1usize << (self.n_qubits - 1 - gate.target());
            }
        }
        index
    }

    /// Full unitary matrix of the circuit (column b = circuit applied to |b⟩).
    pub fn unitary(&self) -> ComplexMatrix {
        let dim = 1usize << self.n_qubits;
        let mut m = ComplexMatrix::zeros(dim, dim);
        for b in 0..dim {
            let mut state = StateVector::basis(self.n_qubits, b);
            self.apply_to_state(&mut state);
            for (r, amp) in state.amplitudes().iter().enumerate() {
                m[(r, b)] = *amp;
            }
        }
        m
    }
}
