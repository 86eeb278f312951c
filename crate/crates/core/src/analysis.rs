//! Derived quantities: coefficient tables, the usefulness predicate, and
//! tolerable-initialization-noise curves.

use rayon::prelude::*;
use serde::Serialize;

use crate::bipoly::BiPoly;
use crate::codes::CodeSpec;
use crate::engine::{fidelity_polynomial, unencoded_baseline};
use crate::error::{QecError, Result};

/// Slack applied to every usefulness comparison.
pub const USEFULNESS_SLACK: f64 = 1e-12;

/// Coarse scan step used to bracket the last usefulness sign change.
pub const SCAN_STEP: f64 = 1e-3;

/// Bisection tolerance for tolerable-q boundaries.
pub const BISECT_TOL: f64 = 1e-6;

/// A code together with its exact fidelity polynomial.
#[derive(Debug, Clone)]
pub struct CodeFidelity {
    code: CodeSpec,
    poly: BiPoly,
}

/// Per-order fidelity coefficients c_k(q) of one code.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    pub code: String,
    pub rows: Vec<(u32, BiPoly)>,
}

/// Sampled tolerable-initialization curve q*(p).
#[derive(Debug, Clone)]
pub struct TolerableQCurve {
    pub code: String,
    pub samples: Vec<(f64, f64)>,
    pub resolution: f64,
}

#[derive(Serialize)]
struct QTerm {
    q_pow: u32,
    coeff: f64,
}

#[derive(Serialize)]
struct CoefficientRow {
    k: u32,
    terms: Vec<QTerm>,
}

impl CodeFidelity {
    pub fn new(code: CodeSpec) -> Result<Self> {
        let poly = fidelity_polynomial(&code)?;
        Ok(Self { code, poly })
    }

    pub fn with_poly(code: CodeSpec, poly: BiPoly) -> Self {
        Self { code, poly }
    }

    pub fn code(&self) -> &CodeSpec {
        &self.code
    }

    pub fn poly(&self) -> &BiPoly {
        &self.poly
    }

    pub fn baseline(&self, p: f64) -> f64 {
        unencoded_baseline(self.code.family(), p)
    }

    /// True when the encoded pipeline beats (or ties) unencoded transmission.
    pub fn usefulness(&self, p: f64, q: f64) -> bool {
        self.poly.eval(p, q) >= self.baseline(p) - USEFULNESS_SLACK
    }

    /// Largest q in [0, 1] at which the code is still useful: a downward scan
    /// at step 1e−3 locates the last sign change (monotonicity in q is not
    /// assumed), then bisection tightens it to 1e−6. Returns 0 when no
    /// positive q qualifies and 1 when every q does. p = 0 is rejected since
    /// augmented codes qualify degenerately for all q there.
    pub fn tolerable_q(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(QecError::ParameterOutOfRange {
                name: "p",
                value: p,
                min: f64::MIN_POSITIVE,
                max: 1.0,
            });
        }
        let steps = (1.0 / SCAN_STEP).round() as usize;
        let grid = |i: usize| i as f64 * SCAN_STEP;
        let last_useful = (0..=steps).rev().find(|&i| self.usefulness(p, grid(i)));
        let Some(i) = last_useful else {
            return Ok(0.0);
        };
        if i == steps {
            return Ok(1.0);
        }
        let (mut lo, mut hi) = (grid(i), grid(i + 1));
        while hi - lo > BISECT_TOL {
            let mid = 0.5 * (lo + hi);
            if self.usefulness(p, mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }

    /// Tolerable q at every grid point.
    pub fn curve_sweep(&self, p_grid: &[f64]) -> Result<TolerableQCurve> {
        if p_grid.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
            return Err(QecError::InvalidArgument(
                "curve grid values must lie in (0, 1]".into(),
            ));
        }
        let samples: Vec<(f64, f64)> = p_grid
            .par_iter()
            .map(|&p| self.tolerable_q(p).map(|qs| (p, qs)))
            .collect::<Result<_>>()?;
        Ok(TolerableQCurve {
            code: self.code.label().to_string(),
            samples,
            resolution: BISECT_TOL,
        })
    }

    /// Extract c_0 … c_{max_k}.
    pub fn coefficient_table(&self, max_k: u32) -> Result<CoefficientTable> {
        if max_k > self.code.n_qubits() as u32 {
            return Err(QecError::InvalidArgument(format!(
                "order {max_k} exceeds the p-degree bound {}",
                self.code.n_qubits()
            )));
        }
        let rows = (0..=max_k)
            .map(|k| (k, self.poly.coefficient_in_p(k)))
            .collect();
        Ok(CoefficientTable {
            code: self.code.label().to_string(),
            rows,
        })
    }

    /// Smallest p in [lo, hi] whose tolerable q is exactly zero, bracketed on
    /// a 1e−3 scan and bisected to 1e−6; None when the crossover is outside
    /// the window.
    pub fn crossover_p(&self, lo: f64, hi: f64) -> Result<Option<f64>> {
        let positive = |p: f64| -> Result<bool> { Ok(self.tolerable_q(p)? > 0.0) };
        if !positive(lo)? {
            return Ok(Some(lo));
        }
        let steps = ((hi - lo) / SCAN_STEP).ceil() as usize;
        let mut bracket = None;
        for i in 1..=steps {
            let p = (lo + i as f64 * SCAN_STEP).min(hi);
            if !positive(p)? {
                bracket = Some((p - SCAN_STEP, p));
                break;
            }
        }
        let Some((mut a, mut b)) = bracket else {
            return Ok(None);
        };
        while b - a > BISECT_TOL {
            let mid = 0.5 * (a + b);
            if positive(mid)? {
                a = mid;
            } else {
                b = mid;
            }
        }
        Ok(Some(b))
    }
}

impl CoefficientTable {
    /// Reassemble Σ_k c_k(q) p^k; must reproduce the source polynomial when
    /// every order is included.
    pub fn reassemble(&self) -> BiPoly {
        let mut poly = BiPoly::zero();
        for (k, ck) in &self.rows {
            poly = poly.add(&ck.mul(&BiPoly::p().pow(*k)));
        }
        poly
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<CoefficientRow> = self
            .rows
            .iter()
            .map(|(k, ck)| CoefficientRow {
                k: *k,
                terms: ck
                    .canonical_terms()
                    .iter()
                    .map(|t| {
                        debug_assert_eq!(t.p_pow, 0);
                        QTerm {
                            q_pow: t.q_pow,
                            coeff: t.coeff,
                        }
                    })
                    .collect(),
            })
            .collect();
        serde_json::json!({
            "code": self.code,
            "coefficients": rows,
        })
    }
}

impl TolerableQCurve {
    /// CSV with header `p,q_star,code`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,q_star,code\n");
        for (p, qs) in &self.samples {
            out.push_str(&format!("{p},{qs},{}\n", self.code));
        }
        out
    }
}

/// Evenly spaced grid over [start, stop] with `count` points.
pub fn linear_grid(start: f64, stop: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![start];
    }
    (0..count)
        .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
        .collect()
}
