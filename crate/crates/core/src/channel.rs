//! Kraus channels, density matrices, and the channel-fidelity functional.

use num_complex::Complex64;

use crate::error::{QecError, Result};
use crate::linalg::{
    check_unit_interval, pauli_i, pauli_x, pauli_y, pauli_z, ComplexMatrix, ONE, ZERO,
};

/// Tolerance for completeness, trace, hermiticity, and unitarity checks.
pub const CHECK_TOL: f64 = 1e-12;

/// Eigenvalue floor for density-matrix positivity.
pub const EIGENVALUE_FLOOR: f64 = 1e-10;

/// A quantum channel as a finite list of Kraus operators.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    dim: usize,
    operators: Vec<ComplexMatrix>,
    /// Probability weight per operator, when the channel is a mixture of
    /// unitaries (all channels in this crate are).
    weights: Option<Vec<f64>>,
}

impl KrausChannel {
    /// Build a channel and verify completeness Σ K†K = I.
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = operators
            .first()
            .map(|k| k.rows())
            .ok_or_else(|| QecError::InvalidArgument("empty Kraus operator list".into()))?;
        for k in &operators {
            if k.rows() != dim || k.cols() != dim {
                return Err(QecError::DimensionMismatch {
                    expected: dim,
                    got: k.rows().max(k.cols()),
                });
            }
        }
        let channel = Self {
            dim,
            operators,
            weights: None,
        };
        let defect = channel.completeness_defect();
        if defect > CHECK_TOL {
            return Err(QecError::IncompleteChannel { defect });
        }
        Ok(channel)
    }

    pub fn with_weights(operators: Vec<ComplexMatrix>, weights: Vec<f64>) -> Result<Self> {
        let mut channel = Self::new(operators)?;
        if weights.len() != channel.operators.len() {
            return Err(QecError::DimensionMismatch {
                expected: channel.operators.len(),
                got: weights.len(),
            });
        }
        channel.weights = Some(weights);
        Ok(channel)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// ‖Σ K†K − I‖_max.
    pub fn completeness_defect(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.dim, self.dim);
        for k in &self.operators {
            sum = sum.add(&k.adjoint().mul(k));
        }
        sum.max_abs_diff(&ComplexMatrix::identity(self.dim))
    }

    /// Apply the channel: ρ ↦ Σ K ρ K†.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim {
            return Err(QecError::DimensionMismatch {
                expected: self.dim,
                got: rho.dim(),
            });
        }
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for k in &self.operators {
            out = out.add(&k.mul(rho.matrix()).mul(&k.adjoint()));
        }
        Ok(DensityMatrix::from_matrix_unchecked(out))
    }
}

/// Channel fidelity (1/4^n) Σ_k |Tr K_k|², the entanglement fidelity of the
/// channel with respect to the maximally entangled input.
pub fn channel_fidelity(channel: &KrausChannel) -> Result<f64> {
    let dim = channel.dim();
    if !dim.is_power_of_two() {
        return Err(QecError::NotPowerOfTwo { dim });
    }
    let denom = (dim * dim) as f64; // 4^n = (2^n)^2
    let sum: f64 = channel
        .operators()
        .iter()
        .map(|k| k.trace().norm_sqr())
        .sum();
    Ok(sum / denom)
}

/// Density matrix with Hermiticity / trace / positivity validation helpers.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// |0...0⟩⟨0...0| on `n_qubits` qubits.
    pub fn ground(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(0, 0)] = ONE;
        Self { matrix: m }
    }

    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        let dm = Self::from_matrix_unchecked(matrix);
        dm.validate()?;
        Ok(dm)
    }

    pub fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        debug_assert_eq!(matrix.rows(), matrix.cols());
        Self { matrix }
    }

    pub fn from_pure(state: &crate::linalg::StateVector) -> Self {
        let dim = state.dim();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = state.amplitudes()[i] * state.amplitudes()[j].conj();
            }
        }
        Self { matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Check trace = 1, Hermiticity, and eigenvalues ≥ −EIGENVALUE_FLOOR.
    pub fn validate(&self) -> Result<()> {
        let tr = self.trace();
        if (tr.re - 1.0).abs() > CHECK_TOL || tr.im.abs() > CHECK_TOL {
            return Err(QecError::InvalidArgument(format!(
                "density matrix trace {tr} differs from 1"
            )));
        }
        let herm = self.matrix.hermiticity_defect();
        if herm > CHECK_TOL {
            return Err(QecError::InvalidArgument(format!(
                "density matrix not Hermitian (defect {herm:e})"
            )));
        }
        if !is_positive_semidefinite(&self.matrix, EIGENVALUE_FLOOR) {
            return Err(QecError::InvalidArgument(
                "density matrix has an eigenvalue below the positivity floor".into(),
            ));
        }
        Ok(())
    }

    /// Tensor product ρ_a ⊗ ρ_b.
    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            matrix: self.matrix.tensor(other.matrix()),
        }
    }

    /// Left-multiply by a controlled single-qubit unitary and right-multiply
    /// by its adjoint: ρ ↦ U ρ U†.
    pub fn apply_controlled_1q(
        &mut self,
        unitary: &ComplexMatrix,
        target: usize,
        control_mask: usize,
        control_value: usize,
    ) {
        let n = self.n_qubits();
        let dim = self.dim();
        let tbit = 1usize << (n - 1 - target);
        debug_assert_eq!(control_mask & tbit, 0);
        let u00 = unitary[(0, 0)];
        let u01 = unitary[(0, 1)];
        let u10 = unitary[(1, 0)];
        let u11 = unitary[(1, 1)];

        // Row mixing (U ρ).
        for r0 in 0..dim {
            if r0 & tbit != 0 || r0 & control_mask != control_value {
                continue;
            }
            let r1 = r0 | tbit;
            for j in 0..dim {
                let a = self.matrix[(r0, j)];
                let b = self.matrix[(r1, j)];
                self.matrix[(r0, j)] = u00 * a + u01 * b;
                self.matrix[(r1, j)] = u10 * a + u11 * b;
            }
        }
        // Column mixing (ρ U†).
        let (c00, c01) = (u00.conj(), u01.conj());
        let (c10, c11) = (u10.conj(), u11.conj());
        for c0 in 0..dim {
            if c0 & tbit != 0 || c0 & control_mask != control_value {
                continue;
            }
            let c1 = c0 | tbit;
            for i in 0..dim {
                let a = self.matrix[(i, c0)];
                let b = self.matrix[(i, c1)];
                self.matrix[(i, c0)] = a * c00 + b * c01;
                self.matrix[(i, c1)] = a * c10 + b * c11;
            }
        }
    }

    /// Apply a single-qubit Kraus channel at `target`: ρ ↦ Σ K ρ K†.
    pub fn apply_1q_kraus(&mut self, kraus: &[ComplexMatrix], target: usize) {
        let dim = self.dim();
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for k in kraus {
            let mut branch = self.clone();
            branch.apply_controlled_1q(k, target, 0, 0);
            acc = acc.add(branch.matrix());
        }
        self.matrix = acc;
    }

    /// Partial trace keeping the listed qubits (in the given order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        partial_trace(self, keep)
    }
}

/// Partial trace of `rho` onto the qubits in `keep`.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.n_qubits();
    if keep.is_empty() {
        return Err(QecError::InvalidArgument(
            "partial trace must keep at least one qubit".into(),
        ));
    }
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != keep.len() || sorted.iter().any(|&qb| qb >= n) {
        return Err(QecError::InvalidArgument(format!(
            "invalid keep set {keep:?} for {n} qubits"
        )));
    }
    let traced: Vec<usize> = (0..n).filter(|qb| !sorted.contains(qb)).collect();
    let keep_bits: Vec<usize> = sorted.iter().map(|&qb| 1usize << (n - 1 - qb)).collect();
    let traced_bits: Vec<usize> = traced.iter().map(|&qb| 1usize << (n - 1 - qb)).collect();
    let out_dim = 1usize << sorted.len();
    let scatter = |packed: usize, bits: &[usize]| -> usize {
        let mut idx = 0;
        for (pos, &bit) in bits.iter().enumerate() {
            if packed & (1 << (bits.len() - 1 - pos)) != 0 {
                idx |= bit;
            }
        }
        idx
    };
    let mut out = ComplexMatrix::zeros(out_dim, out_dim);
    for i in 0..out_dim {
        let ri = scatter(i, &keep_bits);
        for j in 0..out_dim {
            let cj = scatter(j, &keep_bits);
            let mut sum = ZERO;
            for t in 0..(1usize << traced.len()) {
                let tt = scatter(t, &traced_bits);
                sum += rho.matrix()[(ri | tt, cj | tt)];
            }
            out[(i, j)] = sum;
        }
    }
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

/// Cholesky-based positive-semidefiniteness check for a Hermitian matrix,
/// allowing eigenvalues down to −floor.
fn is_positive_semidefinite(m: &ComplexMatrix, floor: f64) -> bool {
    let n = m.rows();
    // Factor m + 2·floor·I; a pivot below −floor means an eigenvalue below
    // the allowed range.
    let mut a = m.clone();
    for i in 0..n {
        a[(i, i)] += Complex64::new(2.0 * floor, 0.0);
    }
    let mut l = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            if i == j {
                if s.re < -floor {
                    return false;
                }
                l[(i, i)] = Complex64::new(s.re.max(0.0).sqrt(), 0.0);
            } else {
                let d = l[(j, j)].re;
                l[(i, j)] = if d > 1e-300 {
                    s / l[(j, j)]
                } else {
                    ZERO
                };
            }
        }
    }
    true
}

/// The mixed ancilla state diag(1 − q/2, q/2).
pub fn rho_q(q: f64) -> Result<DensityMatrix> {
    check_unit_interval("q", q)?;
    let m = ComplexMatrix::from_reals(&[&[1.0 - q / 2.0, 0.0], &[0.0, q / 2.0]]);
    Ok(DensityMatrix::from_matrix_unchecked(m))
}

/// The bit-flip channel {√(1 − q/2) I, √(q/2) X} modelling imperfect ancilla
/// initialization; applied to |0⟩⟨0| it produces [`rho_q`].
pub fn bitflip_init_channel(q: f64) -> Result<KrausChannel> {
    check_unit_interval("q", q)?;
    let ops = vec![
        pauli_i().scale(Complex64::new((1.0 - q / 2.0).sqrt(), 0.0)),
        pauli_x().scale(Complex64::new((q / 2.0).sqrt(), 0.0)),
    ];
    KrausChannel::with_weights(ops, vec![1.0 - q / 2.0, q / 2.0])
}

/// The main bit-flip channel {√(1 − p) I, √p X}.
pub fn main_bitflip_channel(p: f64) -> Result<KrausChannel> {
    check_unit_interval("p", p)?;
    let ops = vec![
        pauli_i().scale(Complex64::new((1.0 - p).sqrt(), 0.0)),
        pauli_x().scale(Complex64::new(p.sqrt(), 0.0)),
    ];
    KrausChannel::with_weights(ops, vec![1.0 - p, p])
}

/// The depolarizing channel {√(1 − 3p/4) I, √(p/4) X, √(p/4) Y, √(p/4) Z}.
pub fn depolarizing_channel(p: f64) -> Result<KrausChannel> {
    check_unit_interval("p", p)?;
    let w = (p / 4.0).sqrt();
    let ops = vec![
        pauli_i().scale(Complex64::new((1.0 - 3.0 * p / 4.0).sqrt(), 0.0)),
        pauli_x().scale(Complex64::new(w, 0.0)),
        pauli_y().scale(Complex64::new(w, 0.0)),
        pauli_z().scale(Complex64::new(w, 0.0)),
    ];
    KrausChannel::with_weights(
        ops,
        vec![1.0 - 3.0 * p / 4.0, p / 4.0, p / 4.0, p / 4.0],
    )
}
