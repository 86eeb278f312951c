//! Exact channel-fidelity polynomials by error-pattern enumeration, plus an
//! independent density-matrix oracle.
//!
//! For each assignment of ancilla preparation flips and per-qubit main
//! errors, the pipeline is a fixed unitary; propagating the two message
//! basis inputs yields the effective Kraus trace per ancilla outcome, and
//! the pattern's contribution (1/4) Σ_s |Tr K_s|² lands in a histogram cell
//! keyed by (number of flips, number of main errors). The exact bivariate
//! polynomial follows by expanding the binomial probability factors once at
//! the end, so no polynomial arithmetic happens inside the 2^17-pattern
//! loops. Circuits made purely of controlled-X gates take a permutation fast
//! path where each pattern costs one basis-index walk per branch.
//!
//! Accumulation order is fixed: patterns are processed in index order within
//! fixed-size chunks and chunk histograms are merged in chunk order, so
//! results are bit-identical regardless of how many worker threads run.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bipoly::BiPoly;
use crate::channel::{depolarizing_channel, main_bitflip_channel, rho_q, DensityMatrix};
use crate::codes::{ChannelFamily, CodeSpec};
use crate::error::Result;
use crate::linalg::{
    check_unit_interval, pauli_i, pauli_x, pauli_y, pauli_z, ComplexMatrix, StateVector,
};

/// Patterns per reduction chunk; fixed so that the merge order (and hence
/// every emitted coefficient) is independent of the worker count.
const CHUNK: usize = 1 << 12;

/// One Pauli letter of a main-error assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_digit(digit: usize) -> Self {
        match digit {
            0 => Pauli::I,
            1 => Pauli::X,
            2 => Pauli::Y,
            _ => Pauli::Z,
        }
    }

    pub fn matrix(self) -> ComplexMatrix {
        match self {
            Pauli::I => pauli_i(),
            Pauli::X => pauli_x(),
            Pauli::Y => pauli_y(),
            Pauli::Z => pauli_z(),
        }
    }

    pub fn is_identity(self) -> bool {
        self == Pauli::I
    }
}

/// A single enumerated error assignment: which ancillas start flipped and
/// which Pauli hits each qubit in transit.
#[derive(Debug, Clone)]
pub struct ErrorPattern {
    /// Bit (n_ancillas − 1 − i) set means ancilla i+1 starts flipped; the
    /// value doubles as the ancilla part of the initial basis index.
    pub init_flips: usize,
    pub main_errors: Vec<Pauli>,
}

impl ErrorPattern {
    pub fn flip_count(&self) -> usize {
        self.init_flips.count_ones() as usize
    }

    pub fn error_count(&self) -> usize {
        self.main_errors.iter().filter(|p| !p.is_identity()).count()
    }

    /// The pattern's probability weight as a polynomial in (p, q); it depends
    /// only on the flip and error counts.
    pub fn weight_poly(&self, family: ChannelFamily, n_ancillas: usize) -> BiPoly {
        let n_qubits = self.main_errors.len();
        let j = self.flip_count() as u32;
        let k = self.error_count() as u32;
        init_weight_poly(j, n_ancillas as u32)
            .mul(&main_weight_poly(family, k, n_qubits as u32))
    }
}

/// (q/2)^j (1 − q/2)^{Na − j}, expanded.
fn init_weight_poly(j: u32, n_ancillas: u32) -> BiPoly {
    let flipped = BiPoly::q().scale(0.5);
    let kept = BiPoly::one().sub(&flipped);
    flipped.pow(j).mul(&kept.pow(n_ancillas - j))
}

/// The probability of a count-k main-error assignment, expanded in p.
fn main_weight_poly(family: ChannelFamily, k: u32, n_qubits: u32) -> BiPoly {
    let (hit, miss) = match family {
        ChannelFamily::BitFlip => (BiPoly::p(), BiPoly::one().sub(&BiPoly::p())),
        ChannelFamily::Depolarizing => (
            BiPoly::p().scale(0.25),
            BiPoly::one().sub(&BiPoly::p().scale(0.75)),
        ),
    };
    hit.pow(k).mul(&miss.pow(n_qubits - k))
}

/// Trace weight accumulated per (initial-flip count, main-error count) cell.
#[derive(Debug, Clone)]
pub struct WeightHistogram {
    n_ancillas: usize,
    n_qubits: usize,
    cells: Vec<f64>,
}

impl WeightHistogram {
    fn new(n_ancillas: usize, n_qubits: usize) -> Self {
        Self {
            n_ancillas,
            n_qubits,
            cells: vec![0.0; (n_ancillas + 1) * (n_qubits + 1)],
        }
    }

    #[inline]
    fn add(&mut self, flips: usize, errors: usize, weight: f64) {
        self.cells[flips * (self.n_qubits + 1) + errors] += weight;
    }

    pub fn get(&self, flips: usize, errors: usize) -> f64 {
        self.cells[flips * (self.n_qubits + 1) + errors]
    }

    pub fn n_ancillas(&self) -> usize {
        self.n_ancillas
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn merge(&mut self, other: &Self) {
        for (a, b) in self.cells.iter_mut().zip(&other.cells) {
            *a += b;
        }
    }
}

fn family_arity(family: ChannelFamily) -> usize {
    match family {
        ChannelFamily::BitFlip => 2,
        ChannelFamily::Depolarizing => 4,
    }
}

/// Decode a pattern index into (ancilla flips, per-qubit error digits).
#[inline]
fn split_pattern(pattern: usize, n_qubits: usize, arity: usize) -> (usize, usize) {
    let main_span = arity.pow(n_qubits as u32);
    (pattern / main_span, pattern % main_span)
}

/// Enumerate every error pattern into the (flips, errors) histogram.
pub fn weight_histogram(code: &CodeSpec) -> Result<WeightHistogram> {
    let fast = code.family() == ChannelFamily::BitFlip
        && code.encoder().is_all_controlled_x()
        && code.decoder().is_all_controlled_x();
    if fast {
        enumerate(code, propagate_permutation)
    } else {
        weight_histogram_generic(code)
    }
}

/// Enumerate with the generic state-vector propagation path regardless of
/// circuit structure (used to cross-check the permutation fast path).
pub fn weight_histogram_generic(code: &CodeSpec) -> Result<WeightHistogram> {
    let prepared = PreparedStates::build(code);
    enumerate(code, move |code, init, errors| {
        propagate_generic(code, &prepared, init, errors)
    })
}

fn enumerate<F>(code: &CodeSpec, contribution: F) -> Result<WeightHistogram>
where
    F: Fn(&CodeSpec, usize, usize) -> f64 + Sync,
{
    let n = code.n_qubits();
    let na = code.n_ancillas();
    let arity = family_arity(code.family());
    let total = (1usize << na) * arity.pow(n as u32);
    let chunks = total.div_ceil(CHUNK);

    let partials: Vec<WeightHistogram> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut hist = WeightHistogram::new(na, n);
            let start = chunk * CHUNK;
            let end = (start + CHUNK).min(total);
            for pattern in start..end {
                let (init, errors) = split_pattern(pattern, n, arity);
                let flips = init.count_ones() as usize;
                let mut count = 0;
                let mut digits = errors;
                for _ in 0..n {
                    if digits % arity != 0 {
                        count += 1;
                    }
                    digits /= arity;
                }
                hist.add(flips, count, contribution(code, init, errors));
            }
            hist
        })
        .collect();

    let mut hist = WeightHistogram::new(na, n);
    for partial in &partials {
        hist.merge(partial);
    }
    Ok(hist)
}

/// Fast path: every circuit gate and every inserted error is a controlled X,
/// so basis states stay basis states and each branch is one index walk.
fn propagate_permutation(code: &CodeSpec, init: usize, errors: usize) -> f64 {
    let n = code.n_qubits();
    let half = 1usize << (n - 1);
    // X-error mask: digit i of `errors` belongs to qubit i, whose basis bit
    // is n − 1 − i; reversing the digit order gives the mask directly.
    let mut xmask = 0usize;
    let mut digits = errors;
    for qb in 0..n {
        if digits & 1 != 0 {
            xmask |= 1usize << (n - 1 - qb);
        }
        digits >>= 1;
    }

    let run = |message: usize| -> usize {
        let start = (message << (n - 1)) | init;
        let mid = code.encoder().permute_basis(start) ^ xmask;
        code.decoder().permute_basis(mid)
    };
    let out0 = run(0);
    let out1 = run(1);
    let ok0 = out0 >> (n - 1) == 0;
    let ok1 = out1 >> (n - 1) == 1;
    match (ok0, ok1) {
        (true, true) if out0 & (half - 1) == out1 & (half - 1) => 1.0,
        (true, true) => 0.5,
        (true, false) | (false, true) => 0.25,
        (false, false) => 0.0,
    }
}

/// Post-encoder states for each (message, ancilla-flip) input, shared across
/// all main-error assignments.
struct PreparedStates {
    states: Vec<StateVector>,
    n_ancillas: usize,
}

impl PreparedStates {
    fn build(code: &CodeSpec) -> Self {
        let n = code.n_qubits();
        let na = code.n_ancillas();
        let mut states = Vec::with_capacity(1 << (na + 1));
        for message in 0..2usize {
            for init in 0..(1usize << na) {
                let mut state = StateVector::basis(n, (message << na) | init);
                code.encoder().apply_to_state(&mut state);
                states.push(state);
            }
        }
        Self {
            states,
            n_ancillas: na,
        }
    }

    fn get(&self, message: usize, init: usize) -> &StateVector {
        &self.states[(message << self.n_ancillas) | init]
    }
}

fn propagate_generic(
    code: &CodeSpec,
    prepared: &PreparedStates,
    init: usize,
    errors: usize,
) -> f64 {
    let n = code.n_qubits();
    let half = 1usize << (n - 1);
    let arity = family_arity(code.family());

    let branch = |message: usize| -> StateVector {
        let mut state = prepared.get(message, init).clone();
        let mut digits = errors;
        for qb in 0..n {
            let pauli = Pauli::from_digit(digits % arity);
            digits /= arity;
            if !pauli.is_identity() {
                state.apply_controlled_1q(&pauli.matrix(), qb, 0, 0);
            }
        }
        code.decoder().apply_to_state(&mut state);
        state
    };
    let psi0 = branch(0);
    let psi1 = branch(1);

    let mut total = 0.0;
    for s in 0..half {
        let tr = psi0.amplitudes()[s] + psi1.amplitudes()[half | s];
        total += tr.norm_sqr();
    }
    total / 4.0
}

/// Expand the histogram into the exact fidelity polynomial
/// F(p, q) = Σ_{j,k} W[j][k] · (q/2)^j (1−q/2)^{Na−j} · e_k(p).
pub fn assemble_polynomial(hist: &WeightHistogram, family: ChannelFamily) -> BiPoly {
    let na = hist.n_ancillas() as u32;
    let n = hist.n_qubits() as u32;
    let mut poly = BiPoly::zero();
    for j in 0..=na {
        let init_poly = init_weight_poly(j, na);
        for k in 0..=n {
            let w = hist.get(j as usize, k as usize);
            if w == 0.0 {
                continue;
            }
            let term = init_poly.mul(&main_weight_poly(family, k, n));
            poly = poly.add(&term.scale(w));
        }
    }
    poly
}

/// Exact F_C(p, q) of the code's effective message-qubit channel.
pub fn fidelity_polynomial(code: &CodeSpec) -> Result<BiPoly> {
    Ok(assemble_polynomial(&weight_histogram(code)?, code.family()))
}

/// Same, forcing the generic propagation path.
pub fn fidelity_polynomial_generic(code: &CodeSpec) -> Result<BiPoly> {
    Ok(assemble_polynomial(
        &weight_histogram_generic(code)?,
        code.family(),
    ))
}

/// Channel fidelity of unencoded transmission through one copy of the main
/// error channel.
pub fn unencoded_baseline(family: ChannelFamily, p: f64) -> f64 {
    match family {
        ChannelFamily::BitFlip => 1.0 - p,
        ChannelFamily::Depolarizing => 1.0 - 0.75 * p,
    }
}

/// Independent numeric fidelity: entangle the message with a reference qubit,
/// tensor the ancillas in ρ_q, push the density matrix through the pipeline
/// applying each error process as a Kraus map (no pattern enumeration), and
/// read the overlap with the maximally entangled state.
pub fn oracle_fidelity(code: &CodeSpec, p: f64, q: f64) -> Result<f64> {
    check_unit_interval("p", p)?;
    check_unit_interval("q", q)?;

    let n = code.n_qubits();
    // Register layout: [reference, message, ancillas...].
    let mut bell = ComplexMatrix::zeros(4, 4);
    for &(r, c) in &[(0usize, 0usize), (0, 3), (3, 0), (3, 3)] {
        bell[(r, c)] = Complex64::new(0.5, 0.0);
    }
    let mut rho = DensityMatrix::from_matrix_unchecked(bell);
    let ancilla = rho_q(q)?;
    for _ in 0..code.n_ancillas() {
        rho = rho.tensor(&ancilla);
    }

    code.encoder().apply_to_density(&mut rho);
    let channel = match code.family() {
        ChannelFamily::BitFlip => main_bitflip_channel(p)?,
        ChannelFamily::Depolarizing => depolarizing_channel(p)?,
    };
    for qb in 0..n {
        rho.apply_1q_kraus(channel.operators(), qb + 1);
    }
    code.decoder().apply_to_density(&mut rho);

    let reduced = rho.partial_trace(&[0, 1])?;
    let m = reduced.matrix();
    let fidelity = 0.5 * (m[(0, 0)] + m[(0, 3)] + m[(3, 0)] + m[(3, 3)]).re;
    Ok(fidelity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{augment, concatenated3, repetition_code, ConcatVariant};

    fn rep3_poly() -> BiPoly {
        fidelity_polynomial(&repetition_code(1).unwrap()).unwrap()
    }

    #[test]
    fn rep3_unaugmented_matches_hand_expansion() {
        // c0 = 1 - q^2/4, c1 = -2q + 1.5q^2 (checked by hand against the
        // four-pattern enumeration at p = 0 and the single-error cases).
        let poly = rep3_poly();
        let c0 = poly.coefficient_in_p(0);
        let c1 = poly.coefficient_in_p(1);
        assert!((c0.coeff(0, 0) - 1.0).abs() < 1e-12);
        assert!((c0.coeff(0, 2) + 0.25).abs() < 1e-12);
        assert!(c0.coeff(0, 1).abs() < 1e-12);
        assert!((c1.coeff(0, 1) + 2.0).abs() < 1e-12);
        assert!((c1.coeff(0, 2) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn rep3_augmented_matches_hand_expansion() {
        let poly = fidelity_polynomial(&augment(&repetition_code(1).unwrap()).unwrap()).unwrap();
        let c0 = poly.coefficient_in_p(0);
        let c1 = poly.coefficient_in_p(1);
        assert!(c0.sub(&BiPoly::one()).max_coeff_diff(&BiPoly::zero()) < 1e-12);
        assert!((c1.coeff(0, 1) + 2.0).abs() < 1e-12);
        assert!((c1.coeff(0, 2) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rep3_pure_ancilla_closed_form() {
        // F(p, 0) = 1 - 3p^2 + 2p^3 exactly.
        let poly = rep3_poly();
        let q0: Vec<f64> = (0..=3).map(|k| poly.coefficient_in_p(k).coeff(0, 0)).collect();
        assert!((q0[0] - 1.0).abs() < 1e-13);
        assert!(q0[1].abs() < 1e-13);
        assert!((q0[2] + 3.0).abs() < 1e-13);
        assert!((q0[3] - 2.0).abs() < 1e-13);
    }

    #[test]
    fn degree_bounds_hold() {
        for code in [
            repetition_code(1).unwrap(),
            augment(&repetition_code(1).unwrap()).unwrap(),
            concatenated3(ConcatVariant::Full).unwrap(),
        ] {
            let poly = fidelity_polynomial(&code).unwrap();
            assert!(poly.degree_p() <= code.n_qubits() as u32);
            assert!(poly.degree_q() <= code.n_ancillas() as u32);
        }
    }

    #[test]
    fn pattern_weight_poly_depends_on_counts() {
        let pattern = ErrorPattern {
            init_flips: 0b10,
            main_errors: vec![Pauli::X, Pauli::I, Pauli::I],
        };
        let weight = pattern.weight_poly(ChannelFamily::BitFlip, 2);
        // (q/2)(1 - q/2) · p(1-p)^2
        let expected = BiPoly::q()
            .scale(0.5)
            .mul(&BiPoly::one().sub(&BiPoly::q().scale(0.5)))
            .mul(&BiPoly::p())
            .mul(&BiPoly::one().sub(&BiPoly::p()).pow(2));
        assert!(weight.max_coeff_diff(&expected) < 1e-14);
    }

    #[test]
    fn histogram_cells_bounded_by_pattern_counts() {
        // Each pattern contributes at most 1, so a (j, k) cell is bounded by
        // the number of patterns it aggregates.
        let binom = |n: usize, k: usize| -> f64 {
            let mut acc = 1.0;
            for i in 0..k {
                acc = acc * (n - i) as f64 / (i + 1) as f64;
            }
            acc
        };
        for label in ["rep3", "rep3+aug", "perfect5"] {
            let code = crate::codes::code_by_label(label).unwrap();
            let hist = weight_histogram(&code).unwrap();
            let branches: f64 = match code.family() {
                ChannelFamily::BitFlip => 1.0,
                ChannelFamily::Depolarizing => 3.0,
            };
            for j in 0..=hist.n_ancillas() {
                for k in 0..=hist.n_qubits() {
                    let cell = hist.get(j, k);
                    let count = binom(hist.n_ancillas(), j)
                        * binom(hist.n_qubits(), k)
                        * branches.powi(k as i32);
                    assert!(
                        cell >= 0.0 && cell <= count + 1e-9,
                        "{label}: cell ({j},{k}) = {cell} exceeds pattern count {count}"
                    );
                }
            }
        }
    }

    #[test]
    fn histogram_total_weight_counts_patterns() {
        // Summing the histogram against probability polynomials at p=q=0.5
        // must give a number ≤ 1 (it is the fidelity there).
        let code = repetition_code(1).unwrap();
        let poly = rep3_poly();
        let f = poly.eval(0.5, 0.5);
        assert!((0.0..=1.0 + 1e-12).contains(&f));
        // Trivial-error slice of an augmented code reassembles to exactly 1.
        let hist = weight_histogram(&augment(&code).unwrap()).unwrap();
        let mut slice = BiPoly::zero();
        for j in 0..=hist.n_ancillas() {
            slice = slice.add(
                &init_weight_poly(j as u32, hist.n_ancillas() as u32)
                    .scale(hist.get(j, 0)),
            );
        }
        assert!(slice.max_coeff_diff(&BiPoly::one()) < 1e-12);
    }

    #[test]
    fn fast_path_agrees_with_generic_on_rep3() {
        for code in [
            repetition_code(1).unwrap(),
            augment(&repetition_code(1).unwrap()).unwrap(),
        ] {
            let fast = fidelity_polynomial(&code).unwrap();
            let generic = fidelity_polynomial_generic(&code).unwrap();
            assert!(fast.max_coeff_diff(&generic) < 1e-12);
        }
    }

    #[test]
    fn oracle_matches_polynomial_on_rep3() {
        let code = repetition_code(1).unwrap();
        let poly = rep3_poly();
        for &(p, q) in &[(0.0, 0.0), (0.1, 0.3), (0.25, 0.8), (0.02, 1.0)] {
            let numeric = oracle_fidelity(&code, p, q).unwrap();
            assert!(
                (numeric - poly.eval(p, q)).abs() < 1e-12,
                "mismatch at ({p}, {q})"
            );
        }
        // Unaugmented c0 at p=0: 1 - q^2/4 directly from the oracle.
        let f = oracle_fidelity(&code, 0.0, 0.6).unwrap();
        assert!((f - (1.0 - 0.09)).abs() < 1e-12);
    }

    #[test]
    fn oracle_rejects_bad_parameters() {
        let code = repetition_code(1).unwrap();
        assert!(oracle_fidelity(&code, -0.1, 0.0).is_err());
        assert!(oracle_fidelity(&code, 0.0, 1.5).is_err());
    }

    #[test]
    fn baselines() {
        assert!((unencoded_baseline(ChannelFamily::BitFlip, 0.1) - 0.9).abs() < 1e-15);
        assert!((unencoded_baseline(ChannelFamily::Depolarizing, 0.1) - 0.925).abs() < 1e-15);
        assert_eq!(unencoded_baseline(ChannelFamily::BitFlip, 0.0), 1.0);
        assert_eq!(unencoded_baseline(ChannelFamily::Depolarizing, 0.0), 1.0);
    }

    #[test]
    fn concat_unaugmented_composes_per_block_failure() {
        // At q = 0 the concatenated fidelity is the single-level form with
        // p' = 3p^2 - 2p^3 per block.
        let code = concatenated3(ConcatVariant::Unaugmented).unwrap();
        let poly = fidelity_polynomial(&code).unwrap();
        for &p in &[0.0f64, 0.05, 0.2, 0.4] {
            let inner_fail = 3.0 * p * p - 2.0 * p * p * p;
            let expected = 1.0 - (3.0 * inner_fail.powi(2) - 2.0 * inner_fail.powi(3));
            assert!(
                (poly.eval(p, 0.0) - expected).abs() < 1e-12,
                "concat composition mismatch at p = {p}"
            );
        }
    }
}
