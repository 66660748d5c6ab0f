//! Multivariate polynomial bases, Chebyshev polynomials and exact box
//! moments.
//!
//! Three basis kinds are supported: plain monomials, tensor products of
//! shifted normalized Legendre polynomials (orthonormal with respect to
//! the uniform probability measure on a box) and tensor Chebyshev
//! products. Elements are always ordered graded-lexicographically so
//! moment vectors are reproducible bit for bit.

use std::sync::Arc;

use thiserror::Error;

use crate::linalg::binomial;
use crate::poly::MonoPoly;

#[derive(Debug, Error)]
pub enum BasisError {
    #[error("box coordinate {0} is degenerate or unordered: [{1}, {2}]")]
    DegenerateBox(usize, f64, f64),
    #[error("point dimension {got} does not match basis dimension {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("weight {0:?} is only supported for n=1 on [-1, 1]")]
    UnsupportedWeight(Weight),
    #[error("coefficient length {got} does not match basis size {want}")]
    CoeffLength { got: usize, want: usize },
}

/// Exponent vector of a monomial; total degree is the component sum.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }
}

/// Enumerate all multi-indices with total degree <= d in n variables,
/// graded-lexicographic order: ascending total degree, and within one
/// degree block descending lexicographic order of the exponent vector
/// (so for n=2, d=1 the order is (0,0), (1,0), (0,1)).
pub fn enumerate_basis(n: usize, d: u32) -> Vec<MultiIndex> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(binomial(n + d as usize, d as usize));
    let mut current = vec![0u32; n];
    for t in 0..=d {
        emit_degree_block(&mut out, &mut current, 0, t);
    }
    out
}

fn emit_degree_block(out: &mut Vec<MultiIndex>, current: &mut Vec<u32>, coord: usize, rem: u32) {
    if coord + 1 == current.len() {
        current[coord] = rem;
        out.push(MultiIndex(current.clone()));
        return;
    }
    for e in (0..=rem).rev() {
        current[coord] = e;
        emit_degree_block(out, current, coord + 1, rem - e);
    }
    current[coord] = 0;
}

/// Monomial coefficients of the Chebyshev polynomial T_k, via the
/// recursion T_{k+1} = 2x T_k - T_{k-1}. Coefficients are exact
/// integers in f64 for every k used here.
pub fn chebyshev_coeffs(k: u32) -> Polynomial {
    let basis = PolyBasis::monomial(1, k);
    let mut coeffs = vec![0.0; k as usize + 1];
    let dense = chebyshev_dense(k);
    coeffs[..dense.len()].copy_from_slice(&dense);
    Polynomial::new(Arc::new(basis), coeffs).expect("length matches")
}

pub(crate) fn chebyshev_dense(k: u32) -> Vec<f64> {
    if k == 0 {
        return vec![1.0];
    }
    let mut prev = vec![1.0];
    let mut cur = vec![0.0, 1.0];
    for _ in 1..k {
        let mut next = vec![0.0; cur.len() + 1];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += 2.0 * c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// Stable evaluation of T_k(x) by the three-term recurrence.
pub fn chebyshev_eval(k: u32, x: f64) -> f64 {
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = x;
    for _ in 1..k {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Reference densities with closed-form moments on [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weight {
    /// Unnormalized Lebesgue measure on the box.
    Uniform,
    /// Density sqrt(1 - x^2) on [-1, 1].
    Cheb1,
    /// Density 1 / sqrt(1 - x^2) on [-1, 1].
    Cheb2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    Monomial,
    OrthonormalUniformBox,
    ChebyshevProduct,
}

/// An ordered multivariate polynomial basis on a box.
#[derive(Debug, Clone)]
pub struct PolyBasis {
    n: usize,
    degree: u32,
    kind: BasisKind,
    bounds: Vec<(f64, f64)>,
    indices: Vec<MultiIndex>,
    /// Monomial coefficients of the univariate factors, per coordinate
    /// and per degree; identity powers for the monomial kind.
    factor_coeffs: Vec<Vec<Vec<f64>>>,
}

impl PolyBasis {
    pub fn monomial(n: usize, degree: u32) -> Self {
        Self::build(n, degree, BasisKind::Monomial, vec![(-1.0, 1.0); n]).expect("valid box")
    }

    pub fn monomial_on(n: usize, degree: u32, bounds: Vec<(f64, f64)>) -> Result<Self, BasisError> {
        Self::build(n, degree, BasisKind::Monomial, bounds)
    }

    /// Basis orthonormal under the uniform probability measure on the box,
    /// realized as tensor products of shifted normalized Legendre
    /// polynomials and reordered graded-lex.
    pub fn orthonormalize(n: usize, degree: u32, bounds: Vec<(f64, f64)>) -> Result<Self, BasisError> {
        Self::build(n, degree, BasisKind::OrthonormalUniformBox, bounds)
    }

    pub fn chebyshev_product(n: usize, degree: u32, bounds: Vec<(f64, f64)>) -> Result<Self, BasisError> {
        Self::build(n, degree, BasisKind::ChebyshevProduct, bounds)
    }

    fn build(n: usize, degree: u32, kind: BasisKind, bounds: Vec<(f64, f64)>) -> Result<Self, BasisError> {
        assert!(n >= 1);
        assert_eq!(bounds.len(), n);
        for (c, &(lo, hi)) in bounds.iter().enumerate() {
            if !(hi - lo).is_finite() || hi - lo <= 0.0 {
                return Err(BasisError::DegenerateBox(c, lo, hi));
            }
        }
        let indices = enumerate_basis(n, degree);
        let factor_coeffs = (0..n)
            .map(|c| univariate_factor_coeffs(kind, degree, bounds[c]))
            .collect();
        Ok(Self {
            n,
            degree,
            kind,
            bounds,
            indices,
            factor_coeffs,
        })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    /// Number of basis elements, binomial(n + d, d).
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn position(&self, exps: &[u32]) -> Option<usize> {
        // graded-lex rank; the basis is small enough that a scan is fine
        self.indices.iter().position(|m| m.exponents() == exps)
    }

    /// Evaluate every basis element at a point.
    pub fn eval(&self, z: &[f64]) -> Result<Vec<f64>, BasisError> {
        if z.len() != self.n {
            return Err(BasisError::DimensionMismatch {
                got: z.len(),
                want: self.n,
            });
        }
        let tables: Vec<Vec<f64>> = (0..self.n)
            .map(|c| self.factor_values(c, z[c]))
            .collect();
        Ok(self
            .indices
            .iter()
            .map(|m| {
                m.exponents()
                    .iter()
                    .enumerate()
                    .map(|(c, &e)| tables[c][e as usize])
                    .product()
            })
            .collect())
    }

    /// Values and gradients of every basis element at a point; the
    /// gradient of element j is `grads[j]` with one entry per coordinate.
    pub fn eval_with_grad(&self, z: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>), BasisError> {
        if z.len() != self.n {
            return Err(BasisError::DimensionMismatch {
                got: z.len(),
                want: self.n,
            });
        }
        let vals: Vec<Vec<f64>> = (0..self.n).map(|c| self.factor_values(c, z[c])).collect();
        let ders: Vec<Vec<f64>> = (0..self.n).map(|c| self.factor_derivs(c, z[c])).collect();
        let mut values = Vec::with_capacity(self.len());
        let mut grads = Vec::with_capacity(self.len());
        for m in &self.indices {
            let e = m.exponents();
            let v: f64 = e
                .iter()
                .enumerate()
                .map(|(c, &ec)| vals[c][ec as usize])
                .product();
            values.push(v);
            let mut g = vec![0.0; self.n];
            for c in 0..self.n {
                let mut t = ders[c][e[c] as usize];
                for c2 in 0..self.n {
                    if c2 != c {
                        t *= vals[c2][e[c2] as usize];
                    }
                }
                g[c] = t;
            }
            grads.push(g);
        }
        Ok((values, grads))
    }

    fn affine(&self, c: usize, x: f64) -> (f64, f64) {
        let (lo, hi) = self.bounds[c];
        ((2.0 * x - lo - hi) / (hi - lo), 2.0 / (hi - lo))
    }

    fn factor_values(&self, c: usize, x: f64) -> Vec<f64> {
        let d = self.degree as usize;
        let mut out = vec![0.0; d + 1];
        match self.kind {
            BasisKind::Monomial => {
                out[0] = 1.0;
                for k in 1..=d {
                    out[k] = out[k - 1] * x;
                }
            }
            BasisKind::OrthonormalUniformBox => {
                let (t, _) = self.affine(c, x);
                let mut prev = 1.0;
                let mut cur = t;
                out[0] = 1.0;
                if d >= 1 {
                    out[1] = 3f64.sqrt() * t;
                }
                for k in 1..d {
                    let next = ((2 * k + 1) as f64 * t * cur - k as f64 * prev) / (k + 1) as f64;
                    prev = cur;
                    cur = next;
                    out[k + 1] = ((2 * (k + 1) + 1) as f64).sqrt() * cur;
                }
            }
            BasisKind::ChebyshevProduct => {
                let (t, _) = self.affine(c, x);
                out[0] = 1.0;
                if d >= 1 {
                    out[1] = t;
                }
                for k in 1..d {
                    out[k + 1] = 2.0 * t * out[k] - out[k - 1];
                }
            }
        }
        out
    }

    fn factor_derivs(&self, c: usize, x: f64) -> Vec<f64> {
        let d = self.degree as usize;
        let mut out = vec![0.0; d + 1];
        match self.kind {
            BasisKind::Monomial => {
                for k in 1..=d {
                    out[k] = k as f64 * x.powi(k as i32 - 1);
                }
            }
            BasisKind::OrthonormalUniformBox => {
                let (t, dt) = self.affine(c, x);
                // Legendre values and derivatives by the stable recurrences
                let mut p = vec![0.0; d + 1];
                let mut dp = vec![0.0; d + 1];
                p[0] = 1.0;
                if d >= 1 {
                    p[1] = t;
                    dp[1] = 1.0;
                }
                for k in 1..d {
                    p[k + 1] = ((2 * k + 1) as f64 * t * p[k] - k as f64 * p[k - 1]) / (k + 1) as f64;
                    dp[k + 1] = dp[k - 1] + (2 * k + 1) as f64 * p[k];
                }
                for k in 0..=d {
                    out[k] = ((2 * k + 1) as f64).sqrt() * dp[k] * dt;
                }
            }
            BasisKind::ChebyshevProduct => {
                let (t, dt) = self.affine(c, x);
                let mut tv = vec![0.0; d + 1];
                let mut td = vec![0.0; d + 1];
                tv[0] = 1.0;
                if d >= 1 {
                    tv[1] = t;
                    td[1] = 1.0;
                }
                for k in 1..d {
                    tv[k + 1] = 2.0 * t * tv[k] - tv[k - 1];
                    td[k + 1] = 2.0 * tv[k] + 2.0 * t * td[k] - td[k - 1];
                }
                for k in 0..=d {
                    out[k] = td[k] * dt;
                }
            }
        }
        out
    }

    /// Column j holds the monomial coefficients of basis element j, so
    /// `C * coeffs` maps basis coefficients to monomial coefficients over
    /// the graded-lex monomial list of the same degree.
    pub fn to_monomial_matrix(&self) -> nalgebra::DMatrix<f64> {
        let t = self.len();
        let mut c = nalgebra::DMatrix::zeros(t, t);
        for (j, m) in self.indices.iter().enumerate() {
            let e = m.exponents();
            // tensor the univariate factor coefficient vectors
            let mut acc: Vec<(Vec<u32>, f64)> = vec![(vec![0; self.n], 1.0)];
            for (coord, &ec) in e.iter().enumerate() {
                let fac = &self.factor_coeffs[coord][ec as usize];
                let mut next = Vec::with_capacity(acc.len() * fac.len());
                for (exps, v) in &acc {
                    for (pow, &fc) in fac.iter().enumerate() {
                        if fc == 0.0 {
                            continue;
                        }
                        let mut e2 = exps.clone();
                        e2[coord] = pow as u32;
                        next.push((e2, v * fc));
                    }
                }
                acc = next;
            }
            for (exps, v) in acc {
                let row = self.position(&exps).expect("monomial within degree");
                c[(row, j)] += v;
            }
        }
        c
    }

    /// Gram matrix of the basis under the uniform probability measure on
    /// the box, computed from exact monomial moments.
    pub fn gram_uniform(&self) -> nalgebra::DMatrix<f64> {
        let t = self.len();
        let vol: f64 = self.bounds.iter().map(|&(lo, hi)| hi - lo).product();
        let big = enumerate_basis(self.n, 2 * self.degree);
        let mono: Vec<f64> = big
            .iter()
            .map(|m| lebesgue_monomial_moment(m.exponents(), &self.bounds) / vol)
            .collect();
        let pos = |exps: &[u32]| big.iter().position(|m| m.exponents() == exps).unwrap();
        let c = self.to_monomial_matrix();
        let mut gram = nalgebra::DMatrix::zeros(t, t);
        for i in 0..t {
            for j in 0..t {
                let mut acc = 0.0;
                for (a, ma) in self.indices.iter().enumerate() {
                    let ca = c[(a, i)];
                    if ca == 0.0 {
                        continue;
                    }
                    for (b, mb) in self.indices.iter().enumerate() {
                        let cb = c[(b, j)];
                        if cb == 0.0 {
                            continue;
                        }
                        let sum: Vec<u32> = ma
                            .exponents()
                            .iter()
                            .zip(mb.exponents())
                            .map(|(x, y)| x + y)
                            .collect();
                        acc += ca * cb * mono[pos(&sum)];
                    }
                }
                gram[(i, j)] = acc;
            }
        }
        gram
    }
}

fn univariate_factor_coeffs(kind: BasisKind, degree: u32, (lo, hi): (f64, f64)) -> Vec<Vec<f64>> {
    let d = degree as usize;
    match kind {
        BasisKind::Monomial => (0..=d)
            .map(|k| {
                let mut v = vec![0.0; k + 1];
                v[k] = 1.0;
                v
            })
            .collect(),
        BasisKind::OrthonormalUniformBox | BasisKind::ChebyshevProduct => {
            // polynomials in x through the affine map t = (2x - lo - hi)/(hi - lo)
            let a0 = -(lo + hi) / (hi - lo);
            let a1 = 2.0 / (hi - lo);
            let mul_affine = |p: &[f64]| {
                let mut out = vec![0.0; p.len() + 1];
                for (i, &c) in p.iter().enumerate() {
                    out[i] += a0 * c;
                    out[i + 1] += a1 * c;
                }
                out
            };
            let mut table: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
            table.push(vec![1.0]);
            if d >= 1 {
                table.push(vec![a0, a1]);
            }
            for k in 1..d {
                let next = match kind {
                    BasisKind::OrthonormalUniformBox => {
                        // (k+1) P_{k+1} = (2k+1) t P_k - k P_{k-1}
                        let tp = mul_affine(&table[k]);
                        let mut v = vec![0.0; tp.len()];
                        for (i, &c) in tp.iter().enumerate() {
                            v[i] += (2 * k + 1) as f64 * c;
                        }
                        for (i, &c) in table[k - 1].iter().enumerate() {
                            v[i] -= k as f64 * c;
                        }
                        v.iter().map(|c| c / (k + 1) as f64).collect()
                    }
                    _ => {
                        // T_{k+1} = 2 t T_k - T_{k-1}
                        let tp = mul_affine(&table[k]);
                        let mut v = vec![0.0; tp.len()];
                        for (i, &c) in tp.iter().enumerate() {
                            v[i] += 2.0 * c;
                        }
                        for (i, &c) in table[k - 1].iter().enumerate() {
                            v[i] -= c;
                        }
                        v
                    }
                };
                table.push(next);
            }
            if kind == BasisKind::OrthonormalUniformBox {
                for (k, row) in table.iter_mut().enumerate() {
                    let s = ((2 * k + 1) as f64).sqrt();
                    for c in row.iter_mut() {
                        *c *= s;
                    }
                }
            }
            table
        }
    }
}

/// Coefficient vector over a shared basis.
#[derive(Debug, Clone)]
pub struct Polynomial {
    basis: Arc<PolyBasis>,
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(basis: Arc<PolyBasis>, coeffs: Vec<f64>) -> Result<Self, BasisError> {
        if coeffs.len() != basis.len() {
            return Err(BasisError::CoeffLength {
                got: coeffs.len(),
                want: basis.len(),
            });
        }
        Ok(Self { basis, coeffs })
    }

    pub fn basis(&self) -> &PolyBasis {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, z: &[f64]) -> Result<f64, BasisError> {
        if self.basis.kind() == BasisKind::Monomial && self.basis.dimension() == 1 {
            // dense compensated Horner handles high-degree Chebyshev vectors
            return Ok(crate::linalg::horner_compensated(&self.coeffs, z[0]));
        }
        let vals = self.basis.eval(z)?;
        Ok(self
            .coeffs
            .iter()
            .zip(vals.iter())
            .map(|(c, v)| c * v)
            .sum())
    }

    /// Expansion in the sparse monomial representation.
    pub fn to_mono(&self) -> MonoPoly {
        let c = self.basis.to_monomial_matrix();
        let v = nalgebra::DVector::from_column_slice(&self.coeffs);
        let mono = c * v;
        let mut out = MonoPoly::zero(self.basis.dimension());
        for (i, m) in self.basis.indices().iter().enumerate() {
            out.add_term(m.exponents(), mono[i]);
        }
        out
    }

    /// Re-express a polynomial in another basis on the same box and
    /// degree (coefficients transform through the monomial expansion).
    pub fn change_basis(&self, target: Arc<PolyBasis>) -> Result<Polynomial, BasisError> {
        assert_eq!(self.basis.dimension(), target.dimension());
        assert_eq!(self.basis.degree(), target.degree());
        let mono = self.basis.to_monomial_matrix() * nalgebra::DVector::from_column_slice(&self.coeffs);
        let ct = target.to_monomial_matrix();
        let solved = ct
            .lu()
            .solve(&mono)
            .expect("basis change matrix is invertible");
        Polynomial::new(target, solved.as_slice().to_vec())
    }
}

/// Exact Lebesgue moment of a monomial over a box (unnormalized).
pub fn lebesgue_monomial_moment(exps: &[u32], bounds: &[(f64, f64)]) -> f64 {
    exps.iter()
        .zip(bounds.iter())
        .map(|(&e, &(lo, hi))| {
            let p = e as i32 + 1;
            (hi.powi(p) - lo.powi(p)) / p as f64
        })
        .product()
}

fn central_binomial_ratio(p: usize) -> f64 {
    // C(2p, p) / 4^p computed stably
    let mut r = 1.0;
    for j in 1..=p {
        r *= (2 * j - 1) as f64 / (2 * j) as f64;
    }
    r
}

/// Monomial moment of x^k against the named weight on [-1, 1].
fn weight_monomial_moment(weight: Weight, k: u32) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let p = (k / 2) as usize;
    match weight {
        Weight::Uniform => 2.0 / (k as f64 + 1.0),
        Weight::Cheb2 => std::f64::consts::PI * central_binomial_ratio(p),
        Weight::Cheb1 => {
            std::f64::consts::PI
                * (central_binomial_ratio(p) - central_binomial_ratio(p + 1))
        }
    }
}

/// Exact moments of the basis functions against the named density.
///
/// `Uniform` integrates against the unnormalized Lebesgue measure on the
/// basis box; the Chebyshev weights require n = 1 on [-1, 1].
pub fn box_moments(basis: &PolyBasis, weight: Weight) -> Result<Vec<f64>, BasisError> {
    let mono_moment = |exps: &[u32]| -> Result<f64, BasisError> {
        match weight {
            Weight::Uniform => Ok(lebesgue_monomial_moment(exps, basis.bounds())),
            Weight::Cheb1 | Weight::Cheb2 => {
                let ok = basis.dimension() == 1
                    && (basis.bounds()[0].0 + 1.0).abs() < 1e-12
                    && (basis.bounds()[0].1 - 1.0).abs() < 1e-12;
                if !ok {
                    return Err(BasisError::UnsupportedWeight(weight));
                }
                Ok(weight_monomial_moment(weight, exps[0]))
            }
        }
    };
    let c = basis.to_monomial_matrix();
    let mut out = vec![0.0; basis.len()];
    for (j, val) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (row, m) in basis.indices().iter().enumerate() {
            let cc = c[(row, j)];
            if cc != 0.0 {
                acc += cc * mono_moment(m.exponents())?;
            }
        }
        *val = acc;
    }
    Ok(out)
}

/// Quadrature fallback for arbitrary densities: tensor Gauss-Legendre
/// with `order` nodes per axis.
pub fn box_moments_density<F: Fn(&[f64]) -> f64>(
    basis: &PolyBasis,
    density: F,
    order: usize,
) -> Result<Vec<f64>, BasisError> {
    let (nodes, weights) = crate::linalg::gauss_legendre(order);
    let n = basis.dimension();
    let mut out = vec![0.0; basis.len()];
    let mut idx = vec![0usize; n];
    loop {
        let mut point = vec![0.0; n];
        let mut w = 1.0;
        for c in 0..n {
            let (lo, hi) = basis.bounds()[c];
            point[c] = 0.5 * (hi - lo) * nodes[idx[c]] + 0.5 * (lo + hi);
            w *= 0.5 * (hi - lo) * weights[idx[c]];
        }
        let f = density(&point) * w;
        let vals = basis.eval(&point)?;
        for (o, v) in out.iter_mut().zip(vals.iter()) {
            *o += f * v;
        }
        // odometer over the tensor grid
        let mut c = 0;
        loop {
            idx[c] += 1;
            if idx[c] < nodes.len() {
                break;
            }
            idx[c] = 0;
            c += 1;
            if c == n {
                return Ok(out);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerate_univariate() {
        let b = enumerate_basis(1, 2);
        let exps: Vec<&[u32]> = b.iter().map(|m| m.exponents()).collect();
        assert_eq!(exps, vec![&[0][..], &[1], &[2]]);
    }

    #[test]
    fn enumerate_bivariate_order() {
        let b = enumerate_basis(2, 1);
        let exps: Vec<&[u32]> = b.iter().map(|m| m.exponents()).collect();
        assert_eq!(exps, vec![&[0, 0][..], &[1, 0], &[0, 1]]);
        assert_eq!(enumerate_basis(2, 2).len(), 6);
    }

    #[test]
    fn basis_count_matches_binomial() {
        for n in 1..=6 {
            for d in 0..=10u32 {
                assert_eq!(
                    enumerate_basis(n, d).len(),
                    binomial(n + d as usize, d as usize),
                    "n={n} d={d}"
                );
            }
        }
    }

    #[test]
    fn chebyshev_base_cases() {
        assert_eq!(chebyshev_coeffs(0).coeffs(), &[1.0]);
        assert_eq!(chebyshev_coeffs(1).coeffs(), &[0.0, 1.0]);
        assert_eq!(chebyshev_coeffs(2).coeffs(), &[-1.0, 0.0, 2.0]);
    }

    #[test]
    fn chebyshev_trig_identity_spot() {
        // T_3(0.5) = cos(3 * arccos(0.5)) = -1
        let t3 = chebyshev_coeffs(3);
        assert!((t3.eval(&[0.5]).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn chebyshev_identity_dense_grid() {
        for k in (0..=40u32).step_by(5) {
            let p = chebyshev_coeffs(k);
            for i in 0..200 {
                let x = -1.0 + 2.0 * (i as f64 + 0.5) / 200.0;
                let want = (k as f64 * x.acos()).cos();
                let got = p.eval(&[x]).unwrap();
                assert!(
                    (got - want).abs() <= 1e-9,
                    "k={k} x={x} got={got} want={want}"
                );
                assert!((chebyshev_eval(k, x) - want).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn orthonormal_linear_element() {
        let b = PolyBasis::orthonormalize(1, 1, vec![(-1.0, 1.0)]).unwrap();
        let v = b.eval(&[1.0]).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-14);
        assert!((v[1] - 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn orthonormal_gram_is_identity() {
        let b = PolyBasis::orthonormalize(2, 3, vec![(0.0, 1.0), (0.0, 1.0)]).unwrap();
        let g = b.gram_uniform();
        let id = nalgebra::DMatrix::<f64>::identity(b.len(), b.len());
        assert!((g - id).amax() <= 1e-10);
    }

    #[test]
    fn degenerate_box_is_rejected() {
        assert!(PolyBasis::orthonormalize(1, 2, vec![(1.0, 1.0)]).is_err());
    }

    #[test]
    fn monomial_eval_vector() {
        let b = PolyBasis::monomial(1, 2);
        assert_eq!(b.eval(&[2.0]).unwrap(), vec![1.0, 2.0, 4.0]);
        assert!(b.eval(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn lebesgue_moments_univariate() {
        let b = PolyBasis::monomial(1, 2);
        let m = box_moments(&b, Weight::Uniform).unwrap();
        assert!((m[0] - 2.0).abs() < 1e-14);
        assert!(m[1].abs() < 1e-14);
        assert!((m[2] - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn cheb2_second_moment_is_half_pi() {
        let b = PolyBasis::monomial(1, 2);
        let m = box_moments(&b, Weight::Cheb2).unwrap();
        assert!((m[0] - std::f64::consts::PI).abs() < 1e-12);
        assert!((m[2] - std::f64::consts::PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn cheb1_mass_is_half_pi() {
        let b = PolyBasis::monomial(1, 2);
        let m = box_moments(&b, Weight::Cheb1).unwrap();
        assert!((m[0] - std::f64::consts::PI / 2.0).abs() < 1e-12);
        // int x^2 sqrt(1-x^2) = pi/8
        assert!((m[2] - std::f64::consts::PI / 8.0).abs() < 1e-12);
    }

    #[test]
    fn cheb_weight_requires_unit_interval() {
        let b = PolyBasis::monomial(2, 2);
        assert!(box_moments(&b, Weight::Cheb2).is_err());
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let b = PolyBasis::monomial(1, 4);
        let exact = box_moments(&b, Weight::Uniform).unwrap();
        let quad = box_moments_density(&b, |_| 1.0, 20).unwrap();
        for (e, q) in exact.iter().zip(quad.iter()) {
            assert!((e - q).abs() < 1e-12);
        }
    }

    #[test]
    fn change_of_basis_round_trip() {
        let mono = Arc::new(PolyBasis::monomial_on(2, 3, vec![(0.0, 1.0), (0.0, 1.0)]).unwrap());
        let orth = Arc::new(PolyBasis::orthonormalize(2, 3, vec![(0.0, 1.0), (0.0, 1.0)]).unwrap());
        let coeffs: Vec<f64> = (0..mono.len()).map(|i| (i as f64 * 0.37).sin()).collect();
        let p = Polynomial::new(mono.clone(), coeffs.clone()).unwrap();
        let q = p.change_basis(orth.clone()).unwrap();
        let back = q.change_basis(mono).unwrap();
        for (a, b) in coeffs.iter().zip(back.coeffs()) {
            assert!((a - b).abs() < 1e-10);
        }
        // values agree too
        let z = [0.3, 0.8];
        assert!((p.eval(&z).unwrap() - q.eval(&z).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn eval_with_grad_matches_finite_differences() {
        let b = PolyBasis::orthonormalize(2, 4, vec![(-1.0, 1.0), (0.0, 2.0)]).unwrap();
        let z = [0.37, 1.21];
        let (vals, grads) = b.eval_with_grad(&z).unwrap();
        let h = 1e-6;
        for c in 0..2 {
            let mut zp = z;
            zp[c] += h;
            let vp = b.eval(&zp).unwrap();
            let mut zm = z;
            zm[c] -= h;
            let vm = b.eval(&zm).unwrap();
            for j in 0..b.len() {
                let fd = (vp[j] - vm[j]) / (2.0 * h);
                assert!(
                    (grads[j][c] - fd).abs() < 1e-5 * (1.0 + fd.abs()),
                    "j={j} c={c}"
                );
                assert!((vals[j] - b.eval(&z).unwrap()[j]).abs() < 1e-14);
            }
        }
    }
}
