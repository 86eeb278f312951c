//! Dense complex matrices and state vectors for circuit simulation.
//!
//! Everything here is sized for registers of at most ten qubits (dimension
//! 1024 once a reference qubit is attached), so plain row-major `Vec` storage
//! is used throughout. Qubit 0 is the most significant bit of a basis index.

use num_complex::Complex64;

use crate::error::{QecError, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Build from nested slices; rows must all have the same length.
    pub fn from_rows(rows: &[&[Complex64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            entries.extend_from_slice(row);
        }
        Self {
            rows: r,
            cols: c,
            entries,
        }
    }

    pub fn from_reals(rows: &[&[f64]]) -> Self {
        let converted: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|row| row.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        let refs: Vec<&[Complex64]> = converted.iter().map(|r| r.as_slice()).collect();
        Self::from_rows(&refs)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [Complex64] {
        &mut self.entries
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (x, y) in out.entries.iter_mut().zip(&other.entries) {
            *x += y;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (x, y) in out.entries.iter_mut().zip(&other.entries) {
            *x -= y;
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for x in out.entries.iter_mut() {
            *x *= s;
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        assert_eq!(self.rows, self.cols);
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry magnitude of `self - other` (the max norm used by every
    /// tolerance check in this crate).
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// ‖M†M − I‖_max.
    pub fn unitarity_defect(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        self.adjoint()
            .mul(self)
            .max_abs_diff(&Self::identity(self.rows))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.rows == self.cols && self.unitarity_defect() <= tol
    }

    /// ‖M − M†‖_max.
    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// Kronecker product; dimensions multiply.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// True when the two matrices agree entrywise up to a single global phase.
    pub fn equal_up_to_phase(&self, other: &Self, tol: f64) -> bool {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return false;
        }
        // Phase from the largest entry of self.
        let (mut best, mut phase) = (0.0, ONE);
        for (a, b) in self.entries.iter().zip(&other.entries) {
            if a.norm() > best && b.norm() > 1e-14 {
                best = a.norm();
                phase = a / b;
            }
        }
        if best == 0.0 {
            return other.max_abs() <= tol;
        }
        let phase = phase / phase.norm();
        self.max_abs_diff(&other.scale(phase)) <= tol
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.cols + j]
    }
}

/// Kronecker product of two matrices (free-function form of [`ComplexMatrix::tensor`]).
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.tensor(b)
}

pub fn pauli_i() -> ComplexMatrix {
    ComplexMatrix::identity(2)
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_reals(&[&[0.0, 1.0], &[1.0, 0.0]])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[
        &[ZERO, Complex64::new(0.0, -1.0)],
        &[Complex64::new(0.0, 1.0), ZERO],
    ])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_reals(&[&[1.0, 0.0], &[0.0, -1.0]])
}

pub fn hadamard() -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_reals(&[&[h, h], &[h, -h]])
}

/// Phase gate diag(1, i).
pub fn phase_s() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[&[ONE, ZERO], &[ZERO, Complex64::new(0.0, 1.0)]])
}

/// Pure state on `n_qubits` qubits; qubit 0 is the most significant bit of
/// the basis index.
#[derive(Debug, Clone)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// All-zero amplitude vector, used as an accumulator.
    pub fn zeroed(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            amplitudes: vec![ZERO; 1usize << n_qubits],
        }
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let dim = 1usize << n_qubits;
        assert!(index < dim, "basis index out of range");
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Self {
            n_qubits,
            amplitudes,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Apply a single-qubit unitary at `target`, restricted to basis states
    /// whose bits match `(control_mask, control_value)`.
    pub fn apply_controlled_1q(
        &mut self,
        unitary: &ComplexMatrix,
        target: usize,
        control_mask: usize,
        control_value: usize,
    ) {
        debug_assert_eq!(unitary.rows(), 2);
        let tbit = 1usize << (self.n_qubits - 1 - target);
        debug_assert_eq!(control_mask & tbit, 0);
        let u00 = unitary[(0, 0)];
        let u01 = unitary[(0, 1)];
        let u10 = unitary[(1, 0)];
        let u11 = unitary[(1, 1)];
        let dim = self.amplitudes.len();
        let mut idx = 0;
        while idx < dim {
            if idx & tbit != 0 {
                idx += tbit; // skip the half where the target bit is set
                continue;
            }
            if idx & control_mask == control_value {
                let a = self.amplitudes[idx];
                let b = self.amplitudes[idx | tbit];
                self.amplitudes[idx] = u00 * a + u01 * b;
                self.amplitudes[idx | tbit] = u10 * a + u11 * b;
            }
            idx += 1;
        }
    }
}

/// Reject parameters outside [0, 1].
pub fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) || !value.is_finite() {
        return Err(QecError::ParameterOutOfRange {
            name,
            value,
            min: 0.0,
            max: 1.0,
        });
    }
    Ok(())
}
