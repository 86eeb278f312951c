//! Code construction: repetition codes, the 5-qubit perfect code, recovery
//! derivation, the augmentation transform, and two-level concatenation.
//!
//! Every code fixes the message at qubit 0; qubits 1..n are ancillas. A
//! `CodeSpec` carries the full pre-error circuit (`encoder`, including the
//! inverse-recovery prefix once augmented) and the full post-error circuit
//! (`decoder`, i.e. decode plus recovery stages), which is what the fidelity
//! engine propagates through.

pub mod stabilizer;

use std::collections::BTreeMap;

use crate::circuit::{Circuit, Gate};
use crate::error::{QecError, Result};
use crate::linalg::{pauli_i, pauli_x, pauli_y, pauli_z, ComplexMatrix, StateVector};
use stabilizer::PauliString;

/// Which main-error process the code is built against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelFamily {
    BitFlip,
    Depolarizing,
}

/// Concatenation augmentation variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConcatVariant {
    Unaugmented,
    TopLevel,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CodeKind {
    SingleLevel,
    Concatenated,
}

/// Syndrome → message-qubit correction lookup.
#[derive(Debug, Clone)]
pub struct RecoveryTable {
    n_ancillas: usize,
    corrections: BTreeMap<usize, ComplexMatrix>,
}

impl RecoveryTable {
    pub fn new(n_ancillas: usize) -> Self {
        let mut corrections = BTreeMap::new();
        corrections.insert(0, pauli_i());
        Self {
            n_ancillas,
            corrections,
        }
    }

    pub fn n_ancillas(&self) -> usize {
        self.n_ancillas
    }

    pub fn len(&self) -> usize {
        self.corrections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.corrections.is_empty()
    }

    pub fn correction(&self, syndrome: usize) -> ComplexMatrix {
        self.corrections
            .get(&syndrome)
            .cloned()
            .unwrap_or_else(pauli_i)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, &ComplexMatrix)> {
        self.corrections.iter().map(|(&s, u)| (s, u))
    }

    /// Insert, rejecting inconsistent duplicates. Two corrections that agree
    /// up to a global phase are the same recovery.
    pub fn insert(&mut self, syndrome: usize, correction: ComplexMatrix) -> Result<()> {
        if syndrome == 0 && !correction.equal_up_to_phase(&pauli_i(), 1e-10) {
            return Err(QecError::RecoveryDerivation(
                "trivial syndrome must map to the identity correction".into(),
            ));
        }
        if let Some(existing) = self.corrections.get(&syndrome) {
            if !existing.equal_up_to_phase(&correction, 1e-10) {
                return Err(QecError::SyndromeCollision {
                    syndrome,
                    first: format!("{existing:?}"),
                    second: format!("{correction:?}"),
                });
            }
            return Ok(());
        }
        self.corrections.insert(syndrome, correction);
        Ok(())
    }

    /// One pattern-controlled gate per nontrivial correction, acting on the
    /// message qubit.
    pub fn to_circuit(&self, n_qubits: usize) -> Result<Circuit> {
        let ancilla_qubits: Vec<usize> = (1..n_qubits).collect();
        let mut circuit = Circuit::new(n_qubits);
        for (&syndrome, correction) in &self.corrections {
            if correction.max_abs_diff(&pauli_i()) <= 1e-12 {
                continue;
            }
            circuit.push(Gate::pattern_controlled(
                0,
                correction.clone(),
                &ancilla_qubits,
                syndrome,
            )?)?;
        }
        Ok(circuit)
    }

    /// The block-diagonal unitary ⊕_s (U_s ⊗ |s⟩⟨s|) the table describes.
    pub fn block_unitary(&self, n_qubits: usize) -> ComplexMatrix {
        let dim = 1usize << n_qubits;
        let half = dim >> 1;
        let mut m = ComplexMatrix::zeros(dim, dim);
        for s in 0..half {
            let u = self.correction(s);
            for a in 0..2 {
                for b in 0..2 {
                    m[(a * half + s, b * half + s)] = u[(a, b)];
                }
            }
        }
        m
    }
}

/// A single-qubit error inserted between encode and decode, for recovery
/// derivation.
#[derive(Debug, Clone)]
pub struct ErrorOp {
    pub qubit: usize,
    pub unitary: ComplexMatrix,
    pub label: String,
}

impl ErrorOp {
    pub fn identity() -> Self {
        Self {
            qubit: 0,
            unitary: pauli_i(),
            label: "I".into(),
        }
    }

    pub fn pauli(kind: char, qubit: usize) -> Self {
        let unitary = match kind {
            'X' => pauli_x(),
            'Y' => pauli_y(),
            'Z' => pauli_z(),
            _ => pauli_i(),
        };
        Self {
            qubit,
            unitary,
            label: format!("{kind}{qubit}"),
        }
    }
}

/// Identity plus every single-qubit Pauli on an n-qubit register.
pub fn single_qubit_pauli_errors(n_qubits: usize) -> Vec<ErrorOp> {
    let mut out = vec![ErrorOp::identity()];
    for qb in 0..n_qubits {
        for kind in ['X', 'Y', 'Z'] {
            out.push(ErrorOp::pauli(kind, qb));
        }
    }
    out
}

/// A complete code instance.
#[derive(Debug, Clone)]
pub struct CodeSpec {
    label: String,
    n_qubits: usize,
    family: ChannelFamily,
    augmented: bool,
    /// Set for the top-level-only concatenated variant, whose inner encoders
    /// stay unaugmented; the c0 = 1 guarantee applies only when every
    /// encoding stage carries its inverse-recovery prefix.
    partial: bool,
    kind: CodeKind,
    encoder: Circuit,
    decoder: Circuit,
    recovery: Circuit,
    recovery_table: RecoveryTable,
}

impl CodeSpec {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// The message qubit index; fixed at 0 for every code here.
    pub fn message_index(&self) -> usize {
        0
    }

    pub fn n_ancillas(&self) -> usize {
        self.n_qubits - 1
    }

    pub fn family(&self) -> ChannelFamily {
        self.family
    }

    pub fn is_augmented(&self) -> bool {
        self.augmented
    }

    /// True when every encoding stage carries its inverse-recovery prefix;
    /// only then is the constant fidelity coefficient pinned to 1.
    pub fn is_fully_augmented(&self) -> bool {
        self.augmented && !self.partial
    }

    pub fn is_concatenated(&self) -> bool {
        self.kind == CodeKind::Concatenated
    }

    /// Full pre-error circuit (augmentation prefix included once augmented).
    pub fn encoder(&self) -> &Circuit {
        &self.encoder
    }

    /// Full post-error circuit: decode and recovery stages.
    pub fn decoder(&self) -> &Circuit {
        &self.decoder
    }

    /// The recovery stage alone (for concatenated codes, the outer recovery).
    pub fn recovery(&self) -> &Circuit {
        &self.recovery
    }

    pub fn recovery_table(&self) -> &RecoveryTable {
        &self.recovery_table
    }

    /// Gates in the full pipeline, encoder plus decoder.
    pub fn pipeline_gate_count(&self) -> usize {
        self.encoder.len() + self.decoder.len()
    }

    /// The same code with an arbitrary circuit inserted before the encoder —
    /// the slot the augmentation occupies; used by the encoder-extension
    /// search.
    pub fn with_encoder_prefix(&self, prefix: &Circuit) -> Result<CodeSpec> {
        if prefix.n_qubits() != self.n_qubits {
            return Err(QecError::DimensionMismatch {
                expected: self.n_qubits,
                got: prefix.n_qubits(),
            });
        }
        Ok(CodeSpec {
            encoder: prefix.then(&self.encoder),
            ..self.clone()
        })
    }

    /// Run |m⟩ ⊗ |a⟩ through encoder, a fixed error, and decoder; used by the
    /// distance tests.
    pub fn propagate_basis_with_error(
        &self,
        message: usize,
        ancilla: usize,
        error: Option<&ErrorOp>,
    ) -> StateVector {
        let index = (message << self.n_ancillas()) | ancilla;
        let mut state = StateVector::basis(self.n_qubits, index);
        self.encoder.apply_to_state(&mut state);
        if let Some(err) = error {
            state.apply_controlled_1q(&err.unitary, err.qubit, 0, 0);
        }
        self.decoder.apply_to_state(&mut state);
        state
    }
}

/// The (2t+1)-qubit repetition code correcting up to t bit flips.
pub fn repetition_code(t: usize) -> Result<CodeSpec> {
    if !(1..=4).contains(&t) {
        return Err(QecError::InvalidArgument(format!(
            "repetition order t = {t} outside supported range 1..=4"
        )));
    }
    let n = 2 * t + 1;
    let mut encoder = Circuit::new(n);
    for anc in 1..n {
        encoder.push(Gate::cnot(0, anc))?;
    }
    // Majority vote: flip the message for every ancilla pattern of weight
    // ≥ t+1.
    let mut table = RecoveryTable::new(n - 1);
    for s in 0..(1usize << (n - 1)) {
        if (s as u32).count_ones() as usize > t {
            table.insert(s, pauli_x())?;
        }
    }
    let recovery = table.to_circuit(n)?;
    let decoder = encoder.inverse().then(&recovery);
    Ok(CodeSpec {
        label: format!("rep{n}"),
        n_qubits: n,
        family: ChannelFamily::BitFlip,
        augmented: false,
        partial: false,
        kind: CodeKind::SingleLevel,
        encoder,
        decoder,
        recovery,
        recovery_table: table,
    })
}

/// Derive the syndrome → correction table of an encoder by propagating each
/// error through encode / decode and reading off the residual acting on the
/// message qubit.
pub fn derive_recovery(encoder: &Circuit, errors: &[ErrorOp]) -> Result<RecoveryTable> {
    let n = encoder.n_qubits();
    if !errors
        .iter()
        .any(|e| e.unitary.max_abs_diff(&pauli_i()) <= 1e-12)
    {
        return Err(QecError::RecoveryDerivation(
            "error list must include the identity".into(),
        ));
    }
    let decoder = encoder.inverse();
    let half = 1usize << (n - 1);
    let mut table = RecoveryTable::new(n - 1);
    for error in errors {
        if error.qubit >= n {
            return Err(QecError::InvalidArgument(format!(
                "error {} targets qubit {} on a {}-qubit encoder",
                error.label, error.qubit, n
            )));
        }
        let mut outputs = Vec::with_capacity(2);
        for message in 0..2 {
            let mut state = StateVector::basis(n, message << (n - 1));
            encoder.apply_to_state(&mut state);
            state.apply_controlled_1q(&error.unitary, error.qubit, 0, 0);
            decoder.apply_to_state(&mut state);
            outputs.push(state);
        }
        // The decoded state must factor as (residual on message) ⊗ |s⟩.
        let mut syndrome = None;
        for state in &outputs {
            for (idx, amp) in state.amplitudes().iter().enumerate() {
                if amp.norm() > 1e-9 {
                    let s = idx & (half - 1);
                    match syndrome {
                        None => syndrome = Some(s),
                        Some(existing) if existing != s => {
                            return Err(QecError::RecoveryDerivation(format!(
                                "error {} does not produce a single syndrome",
                                error.label
                            )));
                        }
                        _ => {}
                    }
                }
            }
        }
        let s = syndrome.ok_or_else(|| {
            QecError::RecoveryDerivation(format!("error {} annihilated the state", error.label))
        })?;
        let mut residual = ComplexMatrix::zeros(2, 2);
        for (col, state) in outputs.iter().enumerate() {
            residual[(0, col)] = state.amplitudes()[s];
            residual[(1, col)] = state.amplitudes()[half | s];
        }
        if !residual.is_unitary(1e-9) {
            return Err(QecError::RecoveryDerivation(format!(
                "residual of error {} is not unitary",
                error.label
            )));
        }
        table.insert(s, residual.adjoint())?;
    }
    Ok(table)
}

/// Single-qubit Paulis as `PauliString`s.
fn single_qubit_pauli_strings(n: usize) -> Vec<PauliString> {
    let mut out = Vec::with_capacity(3 * n);
    for qb in 0..n {
        for kind in ['X', 'Y', 'Z'] {
            let mut letters = vec!['I'; n];
            letters[qb] = kind;
            out.push(
                PauliString::from_letters(&letters.iter().collect::<String>())
                    .expect("valid letters"),
            );
        }
    }
    out
}

/// Anticommutation pattern of `op` against the generator list, as a bit
/// string with generator 0 at the most significant bit.
fn syndrome_bits(op: &PauliString, generators: &[PauliString]) -> usize {
    let k = generators.len();
    generators
        .iter()
        .enumerate()
        .filter(|(_, g)| !op.commutes_with(g))
        .fold(0, |acc, (i, _)| acc | 1 << (k - 1 - i))
}

fn gf2_rank(rows: &[usize], width: usize) -> usize {
    let mut rows = rows.to_vec();
    let mut rank = 0;
    for bit in (0..width).rev() {
        if let Some(pos) = (rank..rows.len()).find(|&i| rows[i] & (1 << bit) != 0) {
            rows.swap(rank, pos);
            let pivot = rows[rank];
            for (i, row) in rows.iter_mut().enumerate() {
                if i != rank && *row & (1 << bit) != 0 {
                    *row ^= pivot;
                }
            }
            rank += 1;
        }
    }
    rank
}

/// Pick logical representatives and a generator basis for the 5-qubit code
/// such that each single-ancilla preparation flip decodes to a syndrome whose
/// correction is the identity. The choice is the syndrome-assignment freedom
/// every stabilizer encoder has; this particular assignment makes preparation
/// flips harmless at p = 0 unless two or more ancillas flip at once, which is
/// how the published fidelity tables behave.
fn perfect5_convention(
    generators: &[PauliString],
) -> Result<(PauliString, PauliString, Vec<PauliString>)> {
    let identity = PauliString::from_letters("IIIII")?;
    let product = |mask: usize| -> PauliString {
        let mut acc = identity.clone();
        for (j, g) in generators.iter().enumerate() {
            if mask & (1 << j) != 0 {
                acc = acc.mul(g);
            }
        }
        acc
    };
    let elements: Vec<PauliString> = (0..1usize << generators.len()).map(product).collect();
    let base_x = PauliString::from_letters("XXXXX")?;
    let base_z = PauliString::from_letters("ZZZZZ")?;
    let singles = single_qubit_pauli_strings(5);

    for tx in &elements {
        let logical_x = base_x.mul(tx);
        for tz in &elements {
            let logical_z = base_z.mul(tz);
            let trivial: Vec<&PauliString> = singles
                .iter()
                .filter(|e| e.commutes_with(&logical_x) && e.commutes_with(&logical_z))
                .collect();
            if trivial.len() != 4 {
                continue;
            }
            let syndromes: Vec<usize> = trivial
                .iter()
                .map(|e| syndrome_bits(e, generators))
                .collect();
            if gf2_rank(&syndromes, 4) != 4 {
                continue;
            }
            // Dual generator basis: trivial error i anticommutes with the new
            // generator i and commutes with the rest, so its syndrome becomes
            // the weight-1 string e_i. Invert the syndrome matrix over GF(2).
            let mut a = syndromes.clone();
            let mut inv: Vec<usize> = (0..4).map(|i| 1usize << (3 - i)).collect();
            for col in 0..4 {
                let bit = 3 - col;
                let pivot = (col..4)
                    .find(|&r| a[r] & (1 << bit) != 0)
                    .expect("full rank");
                a.swap(col, pivot);
                inv.swap(col, pivot);
                for r in 0..4 {
                    if r != col && a[r] & (1 << bit) != 0 {
                        a[r] ^= a[col];
                        inv[r] ^= inv[col];
                    }
                }
            }
            let basis: Vec<PauliString> = (0..4)
                .map(|k| {
                    let mut acc = identity.clone();
                    for (j, g) in generators.iter().enumerate() {
                        if inv[j] & (1 << (3 - k)) != 0 {
                            acc = acc.mul(g);
                        }
                    }
                    acc
                })
                .collect();
            let dual_ok = trivial.iter().enumerate().all(|(i, e)| {
                basis
                    .iter()
                    .enumerate()
                    .all(|(k, g)| e.commutes_with(g) == (i != k))
            });
            if dual_ok {
                return Ok((logical_x, logical_z, basis));
            }
        }
    }
    Err(QecError::StabilizerSynthesis(
        "no representative choice leaves single-flip syndromes harmless".into(),
    ))
}

/// The `[[5,1,3]]` code with stabilizer group generated by the cyclic shifts
/// of XZZXI, encoder synthesized from the generators, and recovery derived by
/// syndrome enumeration over every single-qubit Pauli.
pub fn perfect5_code() -> Result<CodeSpec> {
    let generators = [
        PauliString::from_letters("XZZXI")?,
        PauliString::from_letters("IXZZX")?,
        PauliString::from_letters("XIXZZ")?,
        PauliString::from_letters("ZXIXZ")?,
    ];
    let (logical_x, logical_z, basis) = perfect5_convention(&generators)?;
    let encoder = stabilizer::synthesize_encoder(&logical_x, &logical_z, &basis)?;
    let stabilizers = generators;

    // Sanity: the encoded |0̄⟩, |1̄⟩ really are stabilized with logical-Z
    // eigenvalues ±1.
    for message in 0..2usize {
        let mut state = StateVector::basis(5, message << 4);
        encoder.apply_to_state(&mut state);
        for s in &stabilizers {
            let overlap = state.inner(&s.apply_to_state(&state));
            if (overlap.re - 1.0).abs() > 1e-10 || overlap.im.abs() > 1e-10 {
                return Err(QecError::StabilizerSynthesis(
                    "synthesized encoder does not stabilize the code space".into(),
                ));
            }
        }
        let expected = if message == 0 { 1.0 } else { -1.0 };
        let overlap = state.inner(&logical_z.apply_to_state(&state));
        if (overlap.re - expected).abs() > 1e-10 {
            return Err(QecError::StabilizerSynthesis(
                "synthesized encoder has wrong logical-Z action".into(),
            ));
        }
    }

    let table = derive_recovery(&encoder, &single_qubit_pauli_errors(5))?;
    if table.len() != 16 {
        return Err(QecError::RecoveryDerivation(format!(
            "perfect code must resolve all 16 syndromes, got {}",
            table.len()
        )));
    }
    // The convention selection promises identity corrections exactly on the
    // weight-≤1 syndromes.
    for s in 0..16usize {
        let trivial = table.correction(s).equal_up_to_phase(&pauli_i(), 1e-10);
        if trivial != (s.count_ones() <= 1) {
            return Err(QecError::RecoveryDerivation(format!(
                "syndrome {s:04b} violates the single-flip convention"
            )));
        }
    }
    let recovery = table.to_circuit(5)?;
    let decoder = encoder.inverse().then(&recovery);
    Ok(CodeSpec {
        label: "perfect5".into(),
        n_qubits: 5,
        family: ChannelFamily::Depolarizing,
        augmented: false,
        partial: false,
        kind: CodeKind::SingleLevel,
        encoder,
        decoder,
        recovery,
        recovery_table: table,
    })
}

/// Augment a single-level code: prepend the inverse recovery to the encoder
/// so that false syndromes no longer corrupt the message when the main error
/// acts trivially.
pub fn augment(code: &CodeSpec) -> Result<CodeSpec> {
    if code.augmented {
        return Err(QecError::AlreadyAugmented);
    }
    if code.kind == CodeKind::Concatenated {
        return Err(QecError::AugmentConcatenated);
    }
    let encoder = code.recovery.inverse().then(&code.encoder);
    Ok(CodeSpec {
        label: format!("{}+aug", code.label),
        n_qubits: code.n_qubits,
        family: code.family,
        augmented: true,
        partial: false,
        kind: code.kind,
        encoder,
        decoder: code.decoder.clone(),
        recovery: code.recovery.clone(),
        recovery_table: code.recovery_table.clone(),
    })
}

/// Negative control for the verification suite: claims to be augmented while
/// its encoder lacks the inverse-recovery prefix, so the augmented-c0 and
/// trivial-error properties must flag it.
#[doc(hidden)]
pub fn corrupted_rep3_aug() -> Result<CodeSpec> {
    let base = repetition_code(1)?;
    Ok(CodeSpec {
        label: "rep3+aug".into(),
        augmented: true,
        ..base
    })
}

/// Two-level concatenated 3-qubit repetition code on 9 qubits.
///
/// Message q0; outer blocks headed by q0, q3, q6; inner blocks (b, b+1, b+2).
/// Decode runs inner decodes, inner recoveries, outer decode, outer recovery.
/// Augmentation prepends inverse recoveries in reverse order: the outer
/// inverse first, the inner inverses immediately before the inner encoders.
pub fn concatenated3(variant: ConcatVariant) -> Result<CodeSpec> {
    let n = 9;
    let blocks = [0usize, 3, 6];

    let mut outer_encoder = Circuit::new(n);
    outer_encoder.push(Gate::cnot(0, 3))?;
    outer_encoder.push(Gate::cnot(0, 6))?;

    let mut inner_encoders = Circuit::new(n);
    for &b in &blocks {
        inner_encoders.push(Gate::cnot(b, b + 1))?;
        inner_encoders.push(Gate::cnot(b, b + 2))?;
    }

    let mut inner_recoveries = Circuit::new(n);
    for &b in &blocks {
        inner_recoveries.push(Gate::pattern_controlled(
            b,
            pauli_x(),
            &[b + 1, b + 2],
            0b11,
        )?)?;
    }

    let mut outer_recovery = Circuit::new(n);
    outer_recovery.push(Gate::pattern_controlled(0, pauli_x(), &[3, 6], 0b11)?)?;

    let decoder = inner_encoders
        .inverse()
        .then(&inner_recoveries)
        .then(&outer_encoder.inverse())
        .then(&outer_recovery);

    let bare = outer_encoder.then(&inner_encoders);
    let (label, encoder, augmented) = match variant {
        ConcatVariant::Unaugmented => ("concat3-unaug", bare, false),
        ConcatVariant::TopLevel => (
            "concat3-top",
            outer_recovery
                .inverse()
                .then(&outer_encoder)
                .then(&inner_encoders),
            true,
        ),
        ConcatVariant::Full => (
            "concat3-full",
            outer_recovery
                .inverse()
                .then(&outer_encoder)
                .then(&inner_recoveries.inverse())
                .then(&inner_encoders),
            true,
        ),
    };

    // The outer level is an ordinary 3-qubit majority code over the block
    // heads; its table is what the recovery accessor reports.
    let mut table = RecoveryTable::new(2);
    table.insert(0b11, pauli_x())?;

    Ok(CodeSpec {
        label: label.into(),
        n_qubits: n,
        family: ChannelFamily::BitFlip,
        augmented,
        partial: variant == ConcatVariant::TopLevel,
        kind: CodeKind::Concatenated,
        encoder,
        decoder,
        recovery: outer_recovery,
        recovery_table: table,
    })
}

/// Every code instance the study covers; the labels double as CLI names.
pub fn all_code_labels() -> Vec<&'static str> {
    vec![
        "rep3",
        "rep3+aug",
        "rep5",
        "rep5+aug",
        "rep7",
        "rep7+aug",
        "rep9",
        "rep9+aug",
        "perfect5",
        "perfect5+aug",
        "concat3-unaug",
        "concat3-top",
        "concat3-full",
    ]
}

/// Resolve a CLI label into a code instance.
pub fn code_by_label(label: &str) -> Result<CodeSpec> {
    let (base, aug) = match label.strip_suffix("+aug") {
        Some(prefix) => (prefix, true),
        None => (label, false),
    };
    let code = match base {
        "rep3" => repetition_code(1)?,
        "rep5" => repetition_code(2)?,
        "rep7" => repetition_code(3)?,
        "rep9" => repetition_code(4)?,
        "perfect5" => perfect5_code()?,
        "concat3-unaug" if !aug => concatenated3(ConcatVariant::Unaugmented)?,
        "concat3-top" if !aug => concatenated3(ConcatVariant::TopLevel)?,
        "concat3-full" if !aug => concatenated3(ConcatVariant::Full)?,
        _ => return Err(QecError::UnknownCode(label.into())),
    };
    if aug {
        augment(&code)
    } else {
        Ok(code)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;

    fn assert_identity_action(code: &CodeSpec, error: Option<&ErrorOp>) {
        // With clean ancillas the pipeline must return both message basis
        // states exactly, with a common syndrome.
        let out0 = code.propagate_basis_with_error(0, 0, error);
        let out1 = code.propagate_basis_with_error(1, 0, error);
        let half = 1usize << code.n_ancillas();
        let mut syndrome = None;
        for (message, out) in [(0usize, &out0), (1usize, &out1)] {
            let (idx, amp) = out
                .amplitudes()
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                .unwrap();
            assert!((amp.norm() - 1.0).abs() < 1e-10, "state not basis-like");
            assert_eq!(idx >> code.n_ancillas(), message, "message corrupted");
            let s = idx & (half - 1);
            match syndrome {
                None => syndrome = Some(s),
                Some(existing) => assert_eq!(existing, s, "branches disagree on syndrome"),
            }
        }
    }

    #[test]
    fn rep3_layout() {
        let code = repetition_code(1).unwrap();
        assert_eq!(code.n_qubits(), 3);
        assert_eq!(code.encoder().len(), 2);
        assert_eq!(code.recovery().len(), 1);
        let gate = &code.recovery().gates()[0];
        assert_eq!(gate.target(), 0);
        assert_eq!(gate.controls(), &[(1, true), (2, true)]);
    }

    #[test]
    fn rep5_recovery_has_five_gates() {
        let code = repetition_code(2).unwrap();
        assert_eq!(code.recovery().len(), 5);
        assert!(repetition_code(0).is_err());
        assert!(repetition_code(5).is_err());
    }

    #[test]
    fn repetition_corrects_up_to_t_flips() {
        for t in 1..=4 {
            let code = repetition_code(t).unwrap();
            let n = code.n_qubits();
            for pattern in 0..(1usize << n) {
                if (pattern as u32).count_ones() as usize > t {
                    continue;
                }
                // Insert X on every qubit in the pattern.
                let mut circuit = Circuit::new(n);
                for qb in 0..n {
                    if pattern & (1 << (n - 1 - qb)) != 0 {
                        circuit.push(Gate::single(qb, pauli_x()).unwrap()).unwrap();
                    }
                }
                for message in 0..2usize {
                    let mut state = StateVector::basis(n, message << (n - 1));
                    code.encoder().apply_to_state(&mut state);
                    circuit.apply_to_state(&mut state);
                    code.decoder().apply_to_state(&mut state);
                    let (idx, amp) = state
                        .amplitudes()
                        .iter()
                        .enumerate()
                        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                        .unwrap();
                    assert_eq!(*amp, ONE);
                    assert_eq!(idx >> (n - 1), message, "weight-{} pattern uncorrected", t);
                }
            }
        }
    }

    #[test]
    fn derive_recovery_for_rep3() {
        let code = repetition_code(1).unwrap();
        let errors = vec![
            ErrorOp::identity(),
            ErrorOp::pauli('X', 0),
            ErrorOp::pauli('X', 1),
            ErrorOp::pauli('X', 2),
        ];
        let table = derive_recovery(code.encoder(), &errors).unwrap();
        assert!(table.correction(0b11).equal_up_to_phase(&pauli_x(), 1e-12));
        assert!(table.correction(0b00).equal_up_to_phase(&pauli_i(), 1e-12));
        assert!(table.correction(0b01).equal_up_to_phase(&pauli_i(), 1e-12));
        assert!(table.correction(0b10).equal_up_to_phase(&pauli_i(), 1e-12));
    }

    #[test]
    fn augment_rep3_gate_order() {
        let code = repetition_code(1).unwrap();
        let aug = augment(&code).unwrap();
        assert!(aug.is_augmented());
        assert_eq!(aug.label(), "rep3+aug");
        let gates = aug.encoder().gates();
        assert_eq!(gates.len(), 3);
        // Inverse Toffoli first, then the two CNOTs.
        assert_eq!(gates[0].target(), 0);
        assert_eq!(gates[0].controls().len(), 2);
        assert_eq!(gates[1].target(), 1);
        assert_eq!(gates[2].target(), 2);
        assert!(augment(&aug).is_err());
        // Gate count at most doubles.
        assert!(aug.pipeline_gate_count() <= 2 * code.pipeline_gate_count());
    }

    #[test]
    fn augmented_pipeline_is_identity_without_main_error() {
        // For every ancilla preparation pattern, no main error means the
        // message comes back exactly.
        for code in [
            augment(&repetition_code(1).unwrap()).unwrap(),
            augment(&repetition_code(2).unwrap()).unwrap(),
            concatenated3(ConcatVariant::Full).unwrap(),
        ] {
            let half = 1usize << code.n_ancillas();
            for ancilla in 0..half {
                for message in 0..2usize {
                    let index = (message << code.n_ancillas()) | ancilla;
                    let mut state = StateVector::basis(code.n_qubits(), index);
                    code.encoder().apply_to_state(&mut state);
                    code.decoder().apply_to_state(&mut state);
                    assert!(
                        (state.amplitudes()[index].norm() - 1.0).abs() < 1e-10,
                        "{}: pattern {ancilla:b} not restored",
                        code.label()
                    );
                }
            }
        }
    }

    #[test]
    fn single_errors_corrected_at_q0() {
        let rep3 = repetition_code(1).unwrap();
        for qb in 0..3 {
            assert_identity_action(&rep3, Some(&ErrorOp::pauli('X', qb)));
        }
        assert_identity_action(&rep3, None);
    }

    #[test]
    fn perfect5_corrects_all_single_paulis() {
        let code = perfect5_code().unwrap();
        assert_eq!(code.n_qubits(), 5);
        assert_eq!(code.recovery_table().len(), 16);
        for error in single_qubit_pauli_errors(5) {
            // Any single Pauli between encode and decode comes back to the
            // input on the message qubit (up to a per-branch global phase
            // handled inside the recovery construction).
            let out0 = code.propagate_basis_with_error(0, 0, Some(&error));
            let out1 = code.propagate_basis_with_error(1, 0, Some(&error));
            let half = 1usize << 4;
            // Locate the syndrome and check the message survived.
            let residual = |state: &StateVector, m: usize, s: usize| state.amplitudes()
                [(m << 4) | s]
                .norm();
            let (s, _) = (0..half)
                .map(|s| (s, residual(&out0, 0, s) + residual(&out1, 1, s)))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            assert!(
                (residual(&out0, 0, s) - 1.0).abs() < 1e-10
                    && (residual(&out1, 1, s) - 1.0).abs() < 1e-10,
                "error {} not corrected",
                error.label
            );
        }
    }

    #[test]
    fn perfect5_syndromes_are_distinct() {
        let code = perfect5_code().unwrap();
        let decoder = code.encoder().inverse();
        let mut seen = std::collections::BTreeSet::new();
        for error in single_qubit_pauli_errors(5) {
            let mut state = StateVector::basis(5, 0);
            code.encoder().apply_to_state(&mut state);
            state.apply_controlled_1q(&error.unitary, error.qubit, 0, 0);
            decoder.apply_to_state(&mut state);
            let (idx, _) = state
                .amplitudes()
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                .unwrap();
            seen.insert(idx & 0b1111);
        }
        assert_eq!(seen.len(), 16, "syndromes must cover all 4-bit strings");
    }

    #[test]
    fn recovery_table_matches_circuit() {
        // Full matrix comparison at n ≤ 5.
        for code in [
            repetition_code(1).unwrap(),
            repetition_code(2).unwrap(),
            perfect5_code().unwrap(),
        ] {
            let table_u = code.recovery_table().block_unitary(code.n_qubits());
            let circuit_u = code.recovery().unitary();
            assert!(
                table_u.max_abs_diff(&circuit_u) < 1e-12,
                "{} recovery table/circuit mismatch",
                code.label()
            );
        }
        // Basis-state propagation at n = 9.
        for code in [repetition_code(4).unwrap()] {
            let n = code.n_qubits();
            let half = 1usize << (n - 1);
            for idx in 0..(1usize << n) {
                let out = code.recovery().permute_basis(idx);
                let s = idx & (half - 1);
                let correction = code.recovery_table().correction(s);
                let flips = correction.max_abs_diff(&pauli_i()) > 1e-12;
                let expected = if flips { idx ^ half } else { idx };
                assert_eq!(out, expected);
            }
        }
    }

    #[test]
    fn concat_variants_layout() {
        let unaug = concatenated3(ConcatVariant::Unaugmented).unwrap();
        assert_eq!(unaug.n_qubits(), 9);
        assert_eq!(unaug.encoder().len(), 8);
        assert_eq!(unaug.decoder().len(), 8 + 3 + 1);
        assert!(!unaug.is_augmented());

        let top = concatenated3(ConcatVariant::TopLevel).unwrap();
        assert_eq!(top.encoder().len(), 9);
        assert!(top.is_augmented());

        let full = concatenated3(ConcatVariant::Full).unwrap();
        assert_eq!(full.encoder().len(), 12);
        assert!(augment(&unaug).is_err());
    }

    #[test]
    fn labels_resolve() {
        for label in all_code_labels() {
            let code = code_by_label(label).unwrap();
            assert_eq!(code.label(), label);
        }
        assert!(code_by_label("nosuch").is_err());
        assert!(code_by_label("concat3-full+aug").is_err());
    }
}
