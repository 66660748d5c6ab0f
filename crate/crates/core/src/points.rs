//! Linear algebra on ideals of finite point sets: Hilbert functions,
//! interpolation and generator degrees, singular-hypersurface degree and
//! the degree bounds that govern unique recovery.
//!
//! All ranks are computed on points rescaled to the unit box, with
//! singular values below `RANK_RTOL` times the largest treated as zero.

use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

use crate::basis::{enumerate_basis, MultiIndex};
use crate::linalg::{binomial, null_space, rank_svd};
use crate::poly::MonoPoly;

/// Relative singular-value cutoff for all rank decisions in this module.
pub const RANK_RTOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum PointSetError {
    #[error("point set must be nonempty")]
    Empty,
    #[error("points {0} and {1} coincide")]
    Duplicate(usize, usize),
    #[error("point {0} has dimension {1}, expected {2}")]
    Dimension(usize, usize, usize),
}

/// A finite set of pairwise distinct points in R^n.
#[derive(Debug, Clone)]
pub struct PointSet {
    n: usize,
    points: Vec<Vec<f64>>,
}

impl PointSet {
    pub fn new(n: usize, points: Vec<Vec<f64>>) -> Result<Self, PointSetError> {
        if points.is_empty() {
            return Err(PointSetError::Empty);
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != n {
                return Err(PointSetError::Dimension(i, p.len(), n));
            }
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                let d2: f64 = points[i]
                    .iter()
                    .zip(&points[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                if d2 == 0.0 {
                    return Err(PointSetError::Duplicate(i, j));
                }
            }
        }
        Ok(Self { n, points })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// Minimum pairwise Euclidean distance.
    pub fn separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.points.len() {
            for j in i + 1..self.points.len() {
                let d2: f64 = self.points[i]
                    .iter()
                    .zip(&self.points[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                best = best.min(d2.sqrt());
            }
        }
        best
    }

    /// Euclidean distance from `z` to the set.
    pub fn distance(&self, z: &[f64]) -> f64 {
        self.points
            .iter()
            .map(|p| {
                p.iter()
                    .zip(z)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Affine rescaling of every coordinate onto [-1, 1], returning the
    /// rescaled set (used to control conditioning of rank computations).
    fn rescaled(&self) -> PointSet {
        let mut lo = vec![f64::INFINITY; self.n];
        let mut hi = vec![f64::NEG_INFINITY; self.n];
        for p in &self.points {
            for c in 0..self.n {
                lo[c] = lo[c].min(p[c]);
                hi[c] = hi[c].max(p[c]);
            }
        }
        let points = self
            .points
            .iter()
            .map(|p| {
                p.iter()
                    .enumerate()
                    .map(|(c, &x)| {
                        let w = hi[c] - lo[c];
                        if w <= 0.0 {
                            0.0
                        } else {
                            (2.0 * x - lo[c] - hi[c]) / w
                        }
                    })
                    .collect()
            })
            .collect();
        PointSet {
            n: self.n,
            points,
        }
    }
}

/// Evaluation matrix: entry (i, j) is monomial j of degree <= d at point i.
pub fn vandermonde(x: &PointSet, d: u32) -> DMatrix<f64> {
    let idx = enumerate_basis(x.dimension(), d);
    vandermonde_over(x, &idx)
}

fn vandermonde_over(x: &PointSet, idx: &[MultiIndex]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(x.len(), idx.len());
    for (i, p) in x.points().iter().enumerate() {
        for (j, mi) in idx.iter().enumerate() {
            let mut v = 1.0;
            for (c, &e) in mi.exponents().iter().enumerate() {
                v *= p[c].powi(e as i32);
            }
            m[(i, j)] = v;
        }
    }
    m
}

/// Evaluation matrix of the tensor Chebyshev basis at the (rescaled)
/// points. Spans the same column space as the monomial Vandermonde but
/// stays well conditioned at high degree, so all rank decisions use it.
fn chebyshev_vandermonde(x: &PointSet, d: u32) -> DMatrix<f64> {
    let basis = crate::basis::PolyBasis::chebyshev_product(
        x.dimension(),
        d,
        vec![(-1.0, 1.0); x.dimension()],
    )
    .expect("unit box");
    let mut m = DMatrix::zeros(x.len(), basis.len());
    for (i, p) in x.points().iter().enumerate() {
        let vals = basis.eval(p).expect("dimension matches");
        for (j, v) in vals.iter().enumerate() {
            m[(i, j)] = *v;
        }
    }
    m
}

/// Hilbert function HF(A, t) of the homogeneous coordinate ring: the
/// rank of the degree-t evaluation matrix.
pub fn hilbert_function(x: &PointSet, t: u32) -> usize {
    rank_svd(&chebyshev_vandermonde(&x.rescaled(), t), RANK_RTOL)
}

/// Interpolation degree i(X): smallest t with HF(A, t) = |X|.
pub fn interpolation_degree(x: &PointSet) -> u32 {
    let k = x.len();
    let mut t = 0;
    loop {
        if hilbert_function(x, t) == k {
            return t;
        }
        t += 1;
        assert!(t as usize <= k, "HF must reach k by degree k-1");
    }
}

/// A generator of the vanishing ideal with its homogeneous degree.
#[derive(Debug, Clone)]
pub struct Generator {
    pub degree: u32,
    pub poly: MonoPoly,
}

/// Invariants of the vanishing ideal of a point set.
#[derive(Debug, Clone, Serialize)]
pub struct IdealProfile {
    pub k: usize,
    pub hilbert: Vec<usize>,
    pub interpolation_degree: u32,
    pub regularity: u32,
    pub generator_degrees: Vec<(u32, usize)>,
    pub max_generator_degree: u32,
    pub singular_degree: u32,
    pub safe_degree: u32,
    pub theorem_degree: u32,
    #[serde(skip)]
    pub generators: Vec<Generator>,
}

/// Minimal generator degrees (with multiplicity) and a generating set of
/// the vanishing ideal, extracted degree by degree on the homogenized
/// ideal; polynomials are returned dehomogenized with unit coefficient
/// norm.
pub fn generator_degrees(x: &PointSet) -> (Vec<(u32, usize)>, Vec<Generator>, u32) {
    let xs = x.rescaled();
    let alpha = interpolation_degree(x) + 1;
    let mut degrees = Vec::new();
    let mut gens: Vec<Generator> = Vec::new();
    let mut prev_kernel: Option<DMatrix<f64>> = None;
    for t in 1..=alpha {
        let idx_t = enumerate_basis(xs.dimension(), t);
        let vt = vandermonde_over(&xs, &idx_t);
        let kernel = null_space(&vt, RANK_RTOL);
        let new_count;
        let fresh: DMatrix<f64>;
        if let Some(kprev) = &prev_kernel {
            // span of degree-(t-1) kernel times the n+1 homogenizing
            // variables, inside the degree-t coefficient space
            let idx_prev = enumerate_basis(xs.dimension(), t - 1);
            let mut prods: Vec<Vec<f64>> = Vec::new();
            for col in 0..kprev.ncols() {
                let f = kprev.column(col);
                // X_0 * f: same affine monomials viewed in degree t
                let mut v0 = vec![0.0; idx_t.len()];
                for (j, mi) in idx_prev.iter().enumerate() {
                    let pos = idx_t
                        .iter()
                        .position(|m| m.exponents() == mi.exponents())
                        .unwrap();
                    v0[pos] += f[j];
                }
                prods.push(v0);
                // X_c * f for affine coordinates
                for c in 0..xs.dimension() {
                    let mut v = vec![0.0; idx_t.len()];
                    for (j, mi) in idx_prev.iter().enumerate() {
                        let mut e = mi.exponents().to_vec();
                        e[c] += 1;
                        let pos = idx_t.iter().position(|m| m.exponents() == e).unwrap();
                        v[pos] += f[j];
                    }
                    prods.push(v);
                }
            }
            let prod_mat = DMatrix::from_fn(idx_t.len(), prods.len(), |r, c| prods[c][r]);
            let old_rank = rank_svd(&prod_mat, RANK_RTOL);
            new_count = kernel.ncols() - old_rank;
            if new_count > 0 {
                // complement of the old span inside the new kernel
                let q = orthonormal_columns(&prod_mat);
                let mut resid = kernel.clone();
                if q.ncols() > 0 {
                    resid -= &q * (q.transpose() * &kernel);
                }
                fresh = top_singular_directions(&resid, new_count);
            } else {
                fresh = DMatrix::zeros(idx_t.len(), 0);
            }
        } else {
            new_count = kernel.ncols();
            fresh = kernel.clone();
        }
        if new_count > 0 {
            degrees.push((t, new_count));
            for col in 0..fresh.ncols() {
                let mut poly = MonoPoly::zero(xs.dimension());
                for (j, mi) in idx_t.iter().enumerate() {
                    poly.add_term(mi.exponents(), fresh[(j, col)]);
                }
                let nrm = poly.coeff_norm();
                gens.push(Generator {
                    degree: t,
                    poly: poly.scale(1.0 / nrm),
                });
            }
        }
        prev_kernel = Some(kernel);
    }
    let gmax = degrees.iter().map(|d| d.0).max().unwrap_or(0);
    // generators were computed on the rescaled set; map back to original
    // coordinates through the same affine change of variables
    let gens = unscale_generators(x, gens);
    (degrees, gens, gmax)
}

fn orthonormal_columns(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.ncols() == 0 {
        return m.clone();
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("svd u");
    let smax = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > RANK_RTOL * smax.max(1e-300))
        .count();
    u.columns(0, rank).into_owned()
}

fn top_singular_directions(m: &DMatrix<f64>, count: usize) -> DMatrix<f64> {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("svd u");
    u.columns(0, count.min(u.ncols())).into_owned()
}

fn unscale_generators(x: &PointSet, gens: Vec<Generator>) -> Vec<Generator> {
    // substitution x_c -> (2 x_c - lo - hi) / (hi - lo) in each generator
    let mut lo = vec![f64::INFINITY; x.dimension()];
    let mut hi = vec![f64::NEG_INFINITY; x.dimension()];
    for p in x.points() {
        for c in 0..x.dimension() {
            lo[c] = lo[c].min(p[c]);
            hi[c] = hi[c].max(p[c]);
        }
    }
    gens.into_iter()
        .map(|g| {
            let mut out = MonoPoly::zero(x.dimension());
            for (e, &coef) in g.poly.terms() {
                let mut term = MonoPoly::constant(x.dimension(), coef);
                for (c, &ec) in e.iter().enumerate() {
                    let w = hi[c] - lo[c];
                    let (a0, a1) = if w > 0.0 {
                        (-(lo[c] + hi[c]) / w, 2.0 / w)
                    } else {
                        (0.0, 0.0)
                    };
                    let mut affine = MonoPoly::constant(x.dimension(), a0);
                    affine.add_term(
                        &{
                            let mut v = vec![0; x.dimension()];
                            v[c] = 1;
                            v
                        },
                        a1,
                    );
                    for _ in 0..ec {
                        term = term.mul(&affine);
                    }
                }
                out = out.add(&term);
            }
            let nrm = out.coeff_norm();
            Generator {
                degree: g.degree,
                poly: out.scale(1.0 / nrm),
            }
        })
        .collect()
}

/// Smallest degree of a hypersurface singular at all points of X: first
/// l for which the stacked value-and-gradient evaluation matrix (n+1)k
/// rows by binomial(n+l, n) columns has a nontrivial kernel.
pub fn singular_degree(x: &PointSet) -> u32 {
    let xs = x.rescaled();
    let n = xs.dimension();
    let k = xs.len();
    let mut ell = 1u32;
    loop {
        let basis =
            crate::basis::PolyBasis::chebyshev_product(n, ell, vec![(-1.0, 1.0); n]).unwrap();
        let cols = basis.len();
        let mut m = DMatrix::zeros((n + 1) * k, cols);
        for (i, p) in xs.points().iter().enumerate() {
            let (vals, grads) = basis.eval_with_grad(p).expect("dimension matches");
            for j in 0..cols {
                m[((n + 1) * i, j)] = vals[j];
                for c in 0..n {
                    m[((n + 1) * i + 1 + c, j)] = grads[j][c];
                }
            }
        }
        if rank_svd(&m, RANK_RTOL) < cols {
            return ell;
        }
        ell += 1;
        assert!(ell <= 2 * (k as u32) + 2, "singular degree exceeded 2k+2");
    }
}

/// Degree bounds for generic k-point sets: upper 2(e+1) with e the
/// smallest integer with k <= binomial(n+e, e); lower the smallest l with
/// k <= binomial(n+l, n) / (n+1).
pub fn generic_bounds(n: usize, k: usize) -> (u32, u32) {
    assert!(n >= 1 && k >= 1);
    let mut e = 0u32;
    while binomial(n + e as usize, e as usize) < k {
        e += 1;
    }
    let upper = 2 * (e + 1);
    let mut l = 0u32;
    while binomial(n + l as usize, n) < k * (n + 1) {
        l += 1;
    }
    (upper, l)
}

/// Degree certified to give unique recovery: max(2 g(X), i(X) + 1); the
/// bare theorem-statement value max(2 g(X), i(X)) is reported alongside
/// in [`IdealProfile`].
pub fn safe_degree(x: &PointSet) -> u32 {
    let profile = analyze(x);
    profile.safe_degree
}

/// Full ideal profile of a point set.
pub fn analyze(x: &PointSet) -> IdealProfile {
    let k = x.len();
    let i = interpolation_degree(x);
    let alpha = i + 1;
    let hilbert: Vec<usize> = (0..=alpha).map(|t| hilbert_function(x, t)).collect();
    let (generator_degrees, generators, gmax) = generator_degrees_impl(x);
    let ell = singular_degree(x);
    IdealProfile {
        k,
        hilbert,
        interpolation_degree: i,
        regularity: alpha,
        generator_degrees,
        max_generator_degree: gmax,
        singular_degree: ell,
        safe_degree: (2 * gmax).max(i + 1),
        theorem_degree: (2 * gmax).max(i),
        generators,
    }
}

fn generator_degrees_impl(x: &PointSet) -> (Vec<(u32, usize)>, Vec<Generator>, u32) {
    generator_degrees(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_points(n: usize, k: usize, seed: u64) -> PointSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = (0..k)
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        PointSet::new(n, pts).unwrap()
    }

    #[test]
    fn vandermonde_small_cases() {
        let x = PointSet::new(1, vec![vec![0.0]]).unwrap();
        let v = vandermonde(&x, 2);
        assert_eq!(v.as_slice(), &[1.0, 0.0, 0.0]);

        let x2 = PointSet::new(1, vec![vec![-1.0], vec![1.0]]).unwrap();
        let v2 = vandermonde(&x2, 1);
        assert_eq!(rank_svd(&v2, RANK_RTOL), 2);

        let x3 = PointSet::new(2, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(rank_svd(&vandermonde(&x3, 1), RANK_RTOL), 3);
    }

    #[test]
    fn hilbert_function_basics() {
        let x = random_points(2, 5, 3);
        assert_eq!(hilbert_function(&x, 0), 1);
        // generic: HF(t) = min(binom(n+t, t), k)
        for t in 0..=4 {
            let want = binomial(2 + t as usize, t as usize).min(5);
            assert_eq!(hilbert_function(&x, t), want, "t={t}");
        }
    }

    #[test]
    fn univariate_hilbert_is_clamped_count() {
        let x = random_points(1, 6, 11);
        for t in 0..=7u32 {
            assert_eq!(hilbert_function(&x, t), ((t + 1) as usize).min(6));
        }
        assert_eq!(interpolation_degree(&x), 5);
    }

    #[test]
    fn interpolation_degree_small() {
        let single = PointSet::new(2, vec![vec![0.3, -0.4]]).unwrap();
        assert_eq!(interpolation_degree(&single), 0);
        let six = random_points(2, 6, 7);
        assert_eq!(interpolation_degree(&six), 2);
    }

    #[test]
    fn univariate_generator_is_nodal_polynomial() {
        let x = random_points(1, 4, 5);
        let (degs, gens, gmax) = generator_degrees(&x);
        assert_eq!(gmax, 4);
        assert_eq!(degs, vec![(4, 1)]);
        for g in &gens {
            for p in x.points() {
                assert!(g.poly.eval(p).abs() <= 1e-9, "generator must vanish on X");
            }
        }
    }

    #[test]
    fn three_generic_plane_points_have_conic_generators() {
        let x = random_points(2, 3, 17);
        let (degs, gens, gmax) = generator_degrees(&x);
        assert_eq!(gmax, 2);
        assert_eq!(degs, vec![(2, 3)]);
        for g in &gens {
            for p in x.points() {
                assert!(g.poly.eval(p).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn conic_times_cubic_intersection_generator_degree() {
        // 2d points on a nonsingular conic (circle) and a generic degree-d
        // curve, d = 3: expect g(X) = 3
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        // sample 6 points on the unit circle (degree-2 curve); a generic
        // sextic through them exists, and the ideal structure gives g = 3
        let pts: Vec<Vec<f64>> = (0..6)
            .map(|_| {
                let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                vec![th.cos(), th.sin()]
            })
            .collect();
        let x = PointSet::new(2, pts).unwrap();
        let (_degs, _gens, gmax) = generator_degrees(&x);
        assert_eq!(gmax, 3);
    }

    #[test]
    fn singular_degree_cases() {
        let one = PointSet::new(2, vec![vec![0.1, 0.2]]).unwrap();
        assert_eq!(singular_degree(&one), 2);

        for k in 1..=4usize {
            let x = random_points(1, k, 100 + k as u64);
            assert_eq!(singular_degree(&x), 2 * k as u32, "k={k}");
        }

        let ten = random_points(2, 10, 41);
        assert_eq!(singular_degree(&ten), 7);
    }

    #[test]
    fn generic_bounds_formulas() {
        for k in 1..=8usize {
            assert_eq!(generic_bounds(1, k), (2 * k as u32, 2 * k as u32 - 1));
        }
        assert_eq!(generic_bounds(2, 10), (8, 7));
    }

    #[test]
    fn safe_degree_univariate_is_2k() {
        let x = random_points(1, 4, 2);
        assert_eq!(safe_degree(&x), 8);
        let p = analyze(&x);
        assert_eq!(p.theorem_degree, 8);
    }

    #[test]
    fn safe_degree_three_generic_points() {
        let x = random_points(2, 3, 19);
        let p = analyze(&x);
        assert_eq!(p.max_generator_degree, 2);
        assert_eq!(p.interpolation_degree, 1);
        assert_eq!(p.safe_degree, 4);
    }

    #[test]
    fn hilbert_monotonicity_law() {
        for seed in 0..50u64 {
            let n = 1 + (seed % 3) as usize;
            let k = 1 + (seed % 12) as usize;
            let x = random_points(n, k, 500 + seed);
            let mut prev = 0usize;
            let mut reached = false;
            for t in 0..=(k as u32) {
                let h = hilbert_function(&x, t);
                assert!(h >= prev, "HF nondecreasing");
                if reached {
                    assert_eq!(h, k, "constant after reaching k");
                } else if h == k {
                    reached = true;
                } else {
                    assert!(h > prev || t == 0, "strictly increasing until k");
                }
                prev = h;
            }
            assert!(reached);
        }
    }

    #[test]
    fn generic_hilbert_formula_sweep() {
        for seed in 0..12u64 {
            let n = 1 + (seed % 3) as usize;
            let k = 2 + (seed as usize * 3) % 19;
            let x = random_points(n, k, 900 + seed);
            let mut t = 0u32;
            loop {
                let want = binomial(n + t as usize, t as usize).min(k);
                assert_eq!(hilbert_function(&x, t), want, "n={n} k={k} t={t}");
                if want == k {
                    break;
                }
                t += 1;
            }
        }
    }

    #[test]
    fn bound_consistency_on_generic_sets() {
        for seed in 0..8u64 {
            let n = 1 + (seed % 2) as usize;
            let k = 2 + (seed % 5) as usize;
            let x = random_points(n, k, 1300 + seed);
            let p = analyze(&x);
            let (_, lower) = generic_bounds(n, k);
            assert!(
                lower <= p.singular_degree,
                "generic lower {lower} <= singular {}",
                p.singular_degree
            );
            assert!(p.singular_degree <= p.safe_degree);
            assert!(p.max_generator_degree <= p.regularity);
        }
    }

    #[test]
    fn duplicate_points_rejected() {
        assert!(PointSet::new(1, vec![vec![0.5], vec![0.5]]).is_err());
    }
}
