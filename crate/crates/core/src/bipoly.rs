//! Sparse bivariate polynomials in the main-error parameter `p` and the
//! initialization parameter `q`.
//!
//! Coefficients below [`PRUNE_THRESHOLD`] in magnitude are dropped after every
//! operation, so accumulation dust never survives into emitted tables.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Coefficients with magnitude below this are treated as exact zeros.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

/// Polynomial term for serialization, in canonical monomial order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub p_pow: u32,
    pub q_pow: u32,
    pub coeff: f64,
}

/// Sparse polynomial Σ c_{ij} p^i q^j with real coefficients.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BiPoly {
    terms: BTreeMap<(u32, u32), f64>,
}

impl BiPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        let mut poly = Self::zero();
        poly.add_term(0, 0, c);
        poly
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    /// The variable p.
    pub fn p() -> Self {
        let mut poly = Self::zero();
        poly.add_term(1, 0, 1.0);
        poly
    }

    /// The variable q.
    pub fn q() -> Self {
        let mut poly = Self::zero();
        poly.add_term(0, 1, 1.0);
        poly
    }

    pub fn from_terms(terms: &[(u32, u32, f64)]) -> Self {
        let mut poly = Self::zero();
        for &(i, j, c) in terms {
            poly.add_term(i, j, c);
        }
        poly
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Add `c·p^i q^j` in place, pruning if the result cancels out.
    pub fn add_term(&mut self, p_pow: u32, q_pow: u32, coeff: f64) {
        let entry = self.terms.entry((p_pow, q_pow)).or_insert(0.0);
        *entry += coeff;
        if entry.abs() < PRUNE_THRESHOLD {
            self.terms.remove(&(p_pow, q_pow));
        }
    }

    pub fn coeff(&self, p_pow: u32, q_pow: u32) -> f64 {
        self.terms.get(&(p_pow, q_pow)).copied().unwrap_or(0.0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&(i, j), &c) in &other.terms {
            out.add_term(i, j, c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&(i, j), &c) in &other.terms {
            out.add_term(i, j, -c);
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::zero();
        for (&(i, j), &c) in &self.terms {
            out.add_term(i, j, c * s);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&(i1, j1), &c1) in &self.terms {
            for (&(i2, j2), &c2) in &other.terms {
                out.add_term(i1 + i2, j1 + j2, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..exp {
            out = out.mul(self);
        }
        out
    }

    /// Evaluate at (p, q) by Horner accumulation: inner Horner in q for each
    /// power of p, then outer Horner in p. The summation order is fixed, so
    /// results are reproducible.
    pub fn eval(&self, p: f64, q: f64) -> f64 {
        let dp = self.degree_p();
        let dq = self.degree_q();
        let mut outer = 0.0;
        for i in (0..=dp).rev() {
            let mut inner = 0.0;
            for j in (0..=dq).rev() {
                inner = inner * q + self.coeff(i, j);
            }
            outer = outer * p + inner;
        }
        outer
    }

    /// The coefficient of p^k, a polynomial in q alone.
    pub fn coefficient_in_p(&self, k: u32) -> Self {
        let mut out = Self::zero();
        for (&(i, j), &c) in &self.terms {
            if i == k {
                out.add_term(0, j, c);
            }
        }
        out
    }

    pub fn degree_p(&self) -> u32 {
        self.terms.keys().map(|&(i, _)| i).max().unwrap_or(0)
    }

    pub fn degree_q(&self) -> u32 {
        self.terms.keys().map(|&(_, j)| j).max().unwrap_or(0)
    }

    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        let mut keys: Vec<(u32, u32)> = self.terms.keys().copied().collect();
        keys.extend(other.terms.keys().copied());
        keys.iter()
            .map(|&(i, j)| (self.coeff(i, j) - other.coeff(i, j)).abs())
            .fold(0.0, f64::max)
    }

    /// Terms in canonical order: ascending total degree, ties broken with the
    /// higher p-power first. This is the order used for all JSON output.
    pub fn canonical_terms(&self) -> Vec<Term> {
        let mut terms: Vec<Term> = self
            .terms
            .iter()
            .map(|(&(i, j), &c)| Term {
                p_pow: i,
                q_pow: j,
                coeff: c,
            })
            .collect();
        terms.sort_by_key(|t| (t.p_pow + t.q_pow, std::cmp::Reverse(t.p_pow)));
        terms
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.canonical_terms()).expect("terms serialize")
    }

    /// Render as plain text, e.g. `1 - 0.25*q^2`.
    pub fn render(&self) -> String {
        let terms = self.canonical_terms();
        if terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (idx, t) in terms.iter().enumerate() {
            let mag = t.coeff.abs();
            if idx == 0 {
                if t.coeff < 0.0 {
                    out.push('-');
                }
            } else if t.coeff < 0.0 {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            let mut factors = Vec::new();
            if (mag - 1.0).abs() > 1e-15 || (t.p_pow == 0 && t.q_pow == 0) {
                factors.push(format!("{mag}"));
            }
            for (sym, pow) in [("p", t.p_pow), ("q", t.q_pow)] {
                match pow {
                    0 => {}
                    1 => factors.push(sym.to_string()),
                    _ => factors.push(format!("{sym}^{pow}")),
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn add_cancels_to_zero() {
        let sum = BiPoly::one().add(&BiPoly::constant(-1.0));
        assert!(sum.is_zero());
    }

    #[test]
    fn product_expansion() {
        // (1 - p)(1 - q/2) = 1 - p - q/2 + pq/2
        let a = BiPoly::one().sub(&BiPoly::p());
        let b = BiPoly::one().sub(&BiPoly::q().scale(0.5));
        let prod = a.mul(&b);
        let expected =
            BiPoly::from_terms(&[(0, 0, 1.0), (1, 0, -1.0), (0, 1, -0.5), (1, 1, 0.5)]);
        assert!(prod.max_coeff_diff(&expected) < 1e-15);
    }

    #[test]
    fn eval_table_one_entry() {
        // 1 - q^2/4 at q = 1 is the maximally mixed constant coefficient 0.75.
        let poly = BiPoly::from_terms(&[(0, 0, 1.0), (0, 2, -0.25)]);
        assert_eq!(poly.eval(0.3, 0.0), 1.0);
        assert!((poly.eval(0.7, 1.0) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn coefficient_extraction() {
        // 1 - q^2/4 - 2pq + 1.5pq^2
        let poly = BiPoly::from_terms(&[(0, 0, 1.0), (0, 2, -0.25), (1, 1, -2.0), (1, 2, 1.5)]);
        let c0 = poly.coefficient_in_p(0);
        let c1 = poly.coefficient_in_p(1);
        assert!(c0
            .max_coeff_diff(&BiPoly::from_terms(&[(0, 0, 1.0), (0, 2, -0.25)]))
            .abs()
            < 1e-15);
        assert!(c1
            .max_coeff_diff(&BiPoly::from_terms(&[(0, 1, -2.0), (0, 2, 1.5)]))
            .abs()
            < 1e-15);
        assert!(BiPoly::zero().coefficient_in_p(3).is_zero());
    }

    #[test]
    fn canonical_order_is_graded() {
        let poly = BiPoly::from_terms(&[(0, 1, 1.0), (1, 0, 1.0), (0, 0, 1.0), (2, 0, 1.0)]);
        let order: Vec<(u32, u32)> = poly
            .canonical_terms()
            .iter()
            .map(|t| (t.p_pow, t.q_pow))
            .collect();
        assert_eq!(order, vec![(0, 0), (1, 0), (0, 1), (2, 0)]);
    }

    #[test]
    fn render_readable() {
        let poly = BiPoly::from_terms(&[(0, 0, 1.0), (0, 2, -0.25)]);
        assert_eq!(poly.render(), "1 - 0.25*q^2");
    }

    #[test]
    fn json_is_a_canonical_term_list() {
        let poly = BiPoly::from_terms(&[(1, 1, 0.5), (0, 0, 1.0)]);
        let json = poly.to_json();
        assert_eq!(
            json,
            serde_json::json!([
                {"p_pow": 0, "q_pow": 0, "coeff": 1.0},
                {"p_pow": 1, "q_pow": 1, "coeff": 0.5},
            ])
        );
    }

    fn small_poly() -> impl Strategy<Value = BiPoly> {
        prop::collection::vec(((0u32..4, 0u32..4), -2.0f64..2.0), 0..6).prop_map(|terms| {
            let mut poly = BiPoly::zero();
            for ((i, j), c) in terms {
                poly.add_term(i, j, c);
            }
            poly
        })
    }

    proptest! {
        #[test]
        fn mul_commutes_and_associates(a in small_poly(), b in small_poly(), c in small_poly()) {
            let ab = a.mul(&b);
            let ba = b.mul(&a);
            prop_assert!(ab.max_coeff_diff(&ba) < 1e-12);
            let left = ab.mul(&c);
            let right = a.mul(&b.mul(&c));
            prop_assert!(left.max_coeff_diff(&right) < 1e-12);
        }

        #[test]
        fn eval_is_ring_homomorphism(a in small_poly(), b in small_poly(),
                                     p in 0.0f64..1.0, q in 0.0f64..1.0) {
            let prod = a.mul(&b).eval(p, q);
            let direct = a.eval(p, q) * b.eval(p, q);
            prop_assert!((prod - direct).abs() < 1e-12);
            let sum = a.add(&b).eval(p, q);
            prop_assert!((sum - (a.eval(p, q) + b.eval(p, q))).abs() < 1e-12);
        }
    }
}
