//! Pauli strings and a small tableau-reduction synthesizer that turns a
//! stabilizer description of an [[n,1]] code into an encoding circuit.
//!
//! The synthesizer finds a Clifford circuit D (as H/S/CNOT/X/Z gates) that
//! conjugates {X̄, Z̄, S_1, …, S_{n−1}} to {X_0, Z_0, Z_1, …, Z_{n−1}}. Its
//! inverse C then maps |m, 0…0⟩ into the code space with X_0 acting as the
//! logical X, which is exactly what an encoder has to do.

use num_complex::Complex64;

use crate::circuit::{Circuit, Gate};
use crate::error::{QecError, Result};
use crate::linalg::{hadamard, pauli_x, pauli_z, phase_s, ComplexMatrix, StateVector};

/// A Pauli operator i^phase · Π_j X_j^{x_j} Z_j^{z_j}. Mask bit layout matches
/// basis indices: qubit j sits at bit (n−1−j).
#[derive(Debug, Clone, PartialEq)]
pub struct PauliString {
    n: usize,
    x: u32,
    z: u32,
    /// Exponent of i, mod 4. A letter Y contributes one factor of i.
    phase: u8,
}

impl PauliString {
    /// Parse a string of I/X/Y/Z letters, qubit 0 first.
    pub fn from_letters(letters: &str) -> Result<Self> {
        let n = letters.len();
        let mut x = 0u32;
        let mut z = 0u32;
        let mut phase = 0u8;
        for (i, ch) in letters.chars().enumerate() {
            let bit = 1u32 << (n - 1 - i);
            match ch {
                'I' => {}
                'X' => x |= bit,
                'Z' => z |= bit,
                'Y' => {
                    x |= bit;
                    z |= bit;
                    phase = (phase + 1) & 3;
                }
                other => {
                    return Err(QecError::InvalidArgument(format!(
                        "invalid Pauli letter {other:?}"
                    )))
                }
            }
        }
        Ok(Self { n, x, z, phase })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    fn bit(&self, qubit: usize) -> u32 {
        1u32 << (self.n - 1 - qubit)
    }

    /// (x, z) occupancy at `qubit`.
    pub fn letter(&self, qubit: usize) -> (bool, bool) {
        let b = self.bit(qubit);
        (self.x & b != 0, self.z & b != 0)
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        let anti = (self.x & other.z).count_ones() + (self.z & other.x).count_ones();
        anti.is_multiple_of(2)
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        let reorder = (self.z & other.x).count_ones() as u8;
        Self {
            n: self.n,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
            phase: (self.phase + other.phase + 2 * (reorder & 1)) & 3,
        }
    }

    // Conjugation by Clifford gates, P ↦ U P U†.

    pub fn conj_h(&mut self, qubit: usize) {
        let b = self.bit(qubit);
        if self.x & b != 0 && self.z & b != 0 {
            self.phase = (self.phase + 2) & 3;
        }
        let xb = self.x & b;
        let zb = self.z & b;
        self.x = (self.x & !b) | zb;
        self.z = (self.z & !b) | xb;
    }

    pub fn conj_s(&mut self, qubit: usize) {
        let b = self.bit(qubit);
        if self.x & b != 0 {
            self.phase = (self.phase + 1) & 3;
            self.z ^= b;
        }
    }

    pub fn conj_cnot(&mut self, control: usize, target: usize) {
        let cb = self.bit(control);
        let tb = self.bit(target);
        if self.x & cb != 0 {
            self.x ^= tb;
        }
        if self.z & tb != 0 {
            self.z ^= cb;
        }
    }

    pub fn conj_x(&mut self, qubit: usize) {
        if self.z & self.bit(qubit) != 0 {
            self.phase = (self.phase + 2) & 3;
        }
    }

    pub fn conj_z(&mut self, qubit: usize) {
        if self.x & self.bit(qubit) != 0 {
            self.phase = (self.phase + 2) & 3;
        }
    }

    /// Apply to a state vector: X^x Z^z |b⟩ = i^phase (−1)^{z·b} |b ⊕ x⟩.
    pub fn apply_to_state(&self, state: &StateVector) -> StateVector {
        debug_assert_eq!(state.n_qubits(), self.n);
        let mut out = StateVector::zeroed(self.n);
        let global = Complex64::new(0.0, 1.0).powu(self.phase as u32);
        for (b, &amp) in state.amplitudes().iter().enumerate() {
            if amp == crate::linalg::ZERO {
                continue;
            }
            let sign = if (self.z & b as u32).count_ones() % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            out.amplitudes_mut()[b ^ self.x as usize] += amp * global * sign;
        }
        out
    }

    pub fn render(&self) -> String {
        let mut s = match self.phase {
            0 => String::new(),
            1 => "i".to_string(),
            2 => "-".to_string(),
            _ => "-i".to_string(),
        };
        for qb in 0..self.n {
            s.push(match self.letter(qb) {
                (false, false) => 'I',
                (true, false) => 'X',
                (false, true) => 'Z',
                (true, true) => 'Y',
            });
        }
        s
    }
}

/// Tableau of Pauli rows plus the gate log that reduced them.
struct Reduction {
    rows: Vec<PauliString>,
    gates: Vec<Gate>,
}

impl Reduction {
    fn h(&mut self, qubit: usize) {
        for row in &mut self.rows {
            row.conj_h(qubit);
        }
        self.gates.push(Gate::single(qubit, hadamard()).unwrap());
    }

    fn s(&mut self, qubit: usize) {
        for row in &mut self.rows {
            row.conj_s(qubit);
        }
        self.gates.push(Gate::single(qubit, phase_s()).unwrap());
    }

    fn cnot(&mut self, control: usize, target: usize) {
        for row in &mut self.rows {
            row.conj_cnot(control, target);
        }
        self.gates.push(Gate::cnot(control, target));
    }

    fn x(&mut self, qubit: usize) {
        for row in &mut self.rows {
            row.conj_x(qubit);
        }
        self.gates.push(Gate::single(qubit, pauli_x()).unwrap());
    }

    fn z(&mut self, qubit: usize) {
        for row in &mut self.rows {
            row.conj_z(qubit);
        }
        self.gates.push(Gate::single(qubit, pauli_z()).unwrap());
    }

    fn swap(&mut self, a: usize, b: usize) {
        self.cnot(a, b);
        self.cnot(b, a);
        self.cnot(a, b);
    }

    /// Turn the letter at (row, qubit) into X using single-qubit gates.
    fn normalize_to_x(&mut self, row: usize, qubit: usize) {
        match self.rows[row].letter(qubit) {
            (true, false) => {}
            (true, true) => self.s(qubit),
            (false, true) => self.h(qubit),
            (false, false) => unreachable!("no support at pivot"),
        }
    }

    /// Turn the letter at (row, qubit) into Z using single-qubit gates.
    fn normalize_to_z(&mut self, row: usize, qubit: usize) {
        match self.rows[row].letter(qubit) {
            (false, true) => {}
            (true, true) => {
                self.s(qubit);
                self.h(qubit);
            }
            (true, false) => self.h(qubit),
            (false, false) => unreachable!("no support at pivot"),
        }
    }
}

/// GF(2) rank of the stabilizer generators' symplectic vectors.
fn symplectic_rank(rows: &[PauliString]) -> usize {
    let mut vecs: Vec<u64> = rows
        .iter()
        .map(|r| ((r.x as u64) << 32) | r.z as u64)
        .collect();
    let mut rank = 0;
    for bit in (0..64).rev() {
        let mask = 1u64 << bit;
        if let Some(pos) = (rank..vecs.len()).find(|&i| vecs[i] & mask != 0) {
            vecs.swap(rank, pos);
            let pivot = vecs[rank];
            for (i, v) in vecs.iter_mut().enumerate() {
                if i != rank && *v & mask != 0 {
                    *v ^= pivot;
                }
            }
            rank += 1;
        }
    }
    rank
}

/// Build an encoder circuit for the [[n,1]] code with the given stabilizer
/// generators and logical operators. The returned circuit C satisfies
/// C Z_0 C† = Z̄, C X_0 C† = X̄ and C Z_k C† = S_k, so C|m, 0…0⟩ is the
/// logical basis state with ancilla syndromes mapped onto qubits 1..n.
pub fn synthesize_encoder(
    logical_x: &PauliString,
    logical_z: &PauliString,
    stabilizers: &[PauliString],
) -> Result<Circuit> {
    let n = logical_x.n_qubits();
    if stabilizers.len() != n - 1 {
        return Err(QecError::StabilizerSynthesis(format!(
            "need {} stabilizer generators, got {}",
            n - 1,
            stabilizers.len()
        )));
    }
    if logical_x.commutes_with(logical_z) {
        return Err(QecError::StabilizerSynthesis(
            "logical X and Z must anticommute".into(),
        ));
    }
    for (i, s) in stabilizers.iter().enumerate() {
        if !s.commutes_with(logical_x) || !s.commutes_with(logical_z) {
            return Err(QecError::StabilizerSynthesis(format!(
                "stabilizer {i} does not commute with the logical operators"
            )));
        }
        for (j, t) in stabilizers.iter().enumerate().skip(i + 1) {
            if !s.commutes_with(t) {
                return Err(QecError::StabilizerSynthesis(format!(
                    "stabilizers {i} and {j} anticommute"
                )));
            }
        }
    }
    if symplectic_rank(stabilizers) != stabilizers.len() {
        return Err(QecError::StabilizerSynthesis(
            "stabilizer generators are dependent".into(),
        ));
    }

    let mut red = Reduction {
        rows: std::iter::once(logical_x.clone())
            .chain(std::iter::once(logical_z.clone()))
            .chain(stabilizers.iter().cloned())
            .collect(),
        gates: Vec::new(),
    };

    // Logical pair → X_0, Z_0.
    let pivot = (0..n)
        .find(|&qb| red.rows[0].letter(qb) != (false, false))
        .ok_or_else(|| QecError::StabilizerSynthesis("logical X is the identity".into()))?;
    red.normalize_to_x(0, pivot);
    if pivot != 0 {
        red.swap(0, pivot);
    }
    for qb in 1..n {
        if red.rows[0].letter(qb) != (false, false) {
            red.normalize_to_x(0, qb);
            red.cnot(0, qb);
        }
    }
    for qb in 1..n {
        if red.rows[1].letter(qb) != (false, false) {
            red.normalize_to_z(1, qb);
            red.cnot(qb, 0);
        }
    }
    if red.rows[1].letter(0) == (true, true) {
        // Y at 0; rotate to Z while fixing X_0.
        red.h(0);
        red.s(0);
        red.h(0);
    }

    // Stabilizer row k+1 → Z_k.
    for k in 1..n {
        let row = k + 1;
        for qb in 1..k {
            let (x, z) = red.rows[row].letter(qb);
            debug_assert!(!x, "stabilizer gained X support on a fixed qubit");
            if z {
                let fixed = red.rows[qb + 1].clone();
                red.rows[row] = red.rows[row].mul(&fixed);
            }
        }
        let pivot = (k..n)
            .find(|&qb| red.rows[row].letter(qb) != (false, false))
            .ok_or_else(|| {
                QecError::StabilizerSynthesis(format!(
                    "stabilizer {} reduced to identity; generators dependent",
                    k - 1
                ))
            })?;
        red.normalize_to_z(row, pivot);
        if pivot != k {
            red.swap(k, pivot);
        }
        for qb in k + 1..n {
            if red.rows[row].letter(qb) != (false, false) {
                red.normalize_to_z(row, qb);
                red.cnot(qb, k);
            }
        }
    }

    // Sign fixing: every row should now be +X_0 or +Z_k.
    if red.rows[0].phase() == 2 {
        red.z(0);
    }
    if red.rows[1].phase() == 2 {
        red.x(0);
    }
    for k in 1..n {
        if red.rows[k + 1].phase() == 2 {
            red.x(k);
        }
    }

    // Verify the reduction landed exactly where it should.
    let expect = |qb: usize, want_x: bool| -> PauliString {
        let mut letters = vec!['I'; n];
        letters[qb] = if want_x { 'X' } else { 'Z' };
        PauliString::from_letters(&letters.iter().collect::<String>()).unwrap()
    };
    if red.rows[0] != expect(0, true) || red.rows[1] != expect(0, false) {
        return Err(QecError::StabilizerSynthesis(format!(
            "logical reduction failed: {} / {}",
            red.rows[0].render(),
            red.rows[1].render()
        )));
    }
    for k in 1..n {
        if red.rows[k + 1] != expect(k, false) {
            return Err(QecError::StabilizerSynthesis(format!(
                "stabilizer reduction failed at row {}: {}",
                k,
                red.rows[k + 1].render()
            )));
        }
    }

    let reduction = Circuit::with_gates(n, red.gates)?;
    Ok(reduction.inverse())
}

/// Full matrix of a Pauli string (test-sized n only).
pub fn pauli_matrix(pauli: &PauliString) -> ComplexMatrix {
    let n = pauli.n_qubits();
    let mut m = ComplexMatrix::identity(1);
    for qb in 0..n {
        let factor = match pauli.letter(qb) {
            (false, false) => crate::linalg::pauli_i(),
            (true, false) => pauli_x(),
            (false, true) => pauli_z(),
            (true, true) => crate::linalg::pauli_y(),
        };
        m = m.tensor(&factor);
    }
    // Stored phase counts one i per Y, which pauli_y() already includes;
    // strip those and apply the net phase.
    let y_count = (pauli.x & pauli.z).count_ones();
    let net = (pauli.phase + 4 - (y_count % 4) as u8) & 3;
    m.scale(Complex64::new(0.0, 1.0).powu(net as u32))
}
