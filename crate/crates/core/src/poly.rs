//! Sparse multivariate polynomials over the monomial basis.
//!
//! Used for ideal generators, dual certificates and SOS objectives,
//! where products and compositions are needed. Terms are keyed by
//! exponent vectors in a `BTreeMap` so iteration order (and therefore
//! every downstream computation) is deterministic.

use std::collections::BTreeMap;

use crate::linalg::horner_compensated;

/// Polynomial in `n` variables, monomial coefficients keyed by exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct MonoPoly {
    n: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl MonoPoly {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let mut p = Self::zero(n);
        if c != 0.0 {
            p.terms.insert(vec![0; n], c);
        }
        p
    }

    /// The coordinate monomial x_i.
    pub fn var(n: usize, i: usize) -> Self {
        assert!(i < n);
        let mut e = vec![0; n];
        e[i] = 1;
        let mut p = Self::zero(n);
        p.terms.insert(e, 1.0);
        p
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (Vec<u32>, f64)>) -> Self {
        let mut p = Self::zero(n);
        for (e, c) in terms {
            assert_eq!(e.len(), n);
            p.add_term(&e, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &f64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[u32]) -> f64 {
        self.terms.get(exps).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn add_term(&mut self, exps: &[u32], c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(exps.to_vec()).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.remove(exps);
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            out.add_term(e, c * s);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e, *c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = Self::zero(self.n);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(&e, ca * cb);
            }
        }
        out
    }

    /// Substitute an affine argument x_i -> (x_i - shift) / scale is not
    /// needed; what we do need is composing a univariate polynomial with
    /// a multivariate inner polynomial: self must be univariate.
    pub fn compose_univariate(&self, inner: &MonoPoly) -> MonoPoly {
        assert_eq!(self.n, 1, "outer polynomial must be univariate");
        // Horner in the inner polynomial
        let deg = self.degree() as usize;
        let mut coeffs = vec![0.0; deg + 1];
        for (e, c) in &self.terms {
            coeffs[e[0] as usize] = *c;
        }
        let mut acc = MonoPoly::constant(inner.n, coeffs[deg]);
        for k in (0..deg).rev() {
            acc = acc.mul(inner);
            acc.add_term(&vec![0; inner.n], coeffs[k]);
        }
        acc
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n);
        if self.n == 1 {
            let deg = self.degree() as usize;
            let mut coeffs = vec![0.0; deg + 1];
            for (e, c) in &self.terms {
                coeffs[e[0] as usize] = *c;
            }
            return horner_compensated(&coeffs, x[0]);
        }
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            let mut t = *c;
            for (xi, &ei) in x.iter().zip(e.iter()) {
                t *= xi.powi(ei as i32);
            }
            acc += t;
        }
        acc
    }

    /// Partial derivative with respect to variable `i`.
    pub fn diff(&self, i: usize) -> MonoPoly {
        assert!(i < self.n);
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut e2 = e.clone();
                e2[i] -= 1;
                out.add_term(&e2, c * e[i] as f64);
            }
        }
        out
    }

    pub fn gradient(&self) -> Vec<MonoPoly> {
        (0..self.n).map(|i| self.diff(i)).collect()
    }

    pub fn eval_gradient(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.diff(i).eval(x)).collect()
    }

    /// Euclidean norm of the coefficient vector.
    pub fn coeff_norm(&self) -> f64 {
        self.terms.values().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Drop terms with |coeff| <= tol (used to tidy products of
    /// numerically-derived generators).
    pub fn trim(&self, tol: f64) -> Self {
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            if c.abs() > tol {
                out.add_term(e, *c);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_of_linear_factors() {
        let n = 1;
        // (x - 1)(x + 1) = x^2 - 1
        let mut a = MonoPoly::var(n, 0);
        a.add_term(&[0], -1.0);
        let mut b = MonoPoly::var(n, 0);
        b.add_term(&[0], 1.0);
        let p = a.mul(&b);
        assert_eq!(p.coeff(&[2]), 1.0);
        assert_eq!(p.coeff(&[0]), -1.0);
        assert_eq!(p.coeff(&[1]), 0.0);
    }

    #[test]
    fn bivariate_eval_and_gradient() {
        // f = x^2 y + 3y
        let f = MonoPoly::from_terms(2, [(vec![2, 1], 1.0), (vec![0, 1], 3.0)]);
        assert_eq!(f.eval(&[2.0, 1.5]), 4.0 * 1.5 + 4.5);
        let g = f.eval_gradient(&[2.0, 1.5]);
        assert_eq!(g[0], 2.0 * 2.0 * 1.5);
        assert_eq!(g[1], 4.0 + 3.0);
    }

    #[test]
    fn composition_univariate() {
        // outer: t^2 - 1, inner: x + y -> (x+y)^2 - 1
        let mut outer = MonoPoly::from_terms(1, [(vec![2], 1.0), (vec![0], -1.0)]);
        outer = outer.trim(0.0);
        let inner = MonoPoly::from_terms(2, [(vec![1, 0], 1.0), (vec![0, 1], 1.0)]);
        let c = outer.compose_univariate(&inner);
        assert_eq!(c.coeff(&[1, 1]), 2.0);
        assert_eq!(c.coeff(&[0, 0]), -1.0);
    }
}
