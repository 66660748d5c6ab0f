//! Dual certificates and quantitative recovery diagnostics.
//!
//! Two witness constructions are provided for the quadratic isolation
//! condition: the plain sum-of-squares-of-generators certificate
//! P = 1 - H/M, and the Chebyshev-helper construction
//! P_m = (1/s) sum_i H_m(f_i / M_i) whose constants
//! C_a = m^2 D / (12 s) and C_b = 1 / (4 s) quantify how recovery error
//! scales with the noise bound. Sup norms and curvature constants are
//! grid-verified estimates, not proofs.

use serde::Serialize;
use thiserror::Error;

use crate::basis::{chebyshev_dense, Polynomial};
use crate::points::PointSet;
use crate::poly::MonoPoly;
use crate::recovery::DiscreteMeasure;

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("helper order must be even and >= 2, got {0}")]
    BadHelperOrder(u32),
    #[error("degree budget {budget} below witness degree {needed}")]
    DegreeBudget { budget: u32, needed: u32 },
    #[error("sup-norm estimate is not positive (degenerate generators)")]
    DegenerateSup,
    #[error("generator Jacobian is singular at support point {0} (generators do not cut out X transversally)")]
    SingularJacobian(usize),
    #[error("curvature constant estimate D <= 0")]
    NonPositiveD,
    #[error("grid sets must all have the same size s > 1, got {0}")]
    BadGridSize(usize),
}

/// Monomial coefficients of the helper polynomial
/// H_m(x) = (1/m) sum_{k=0}^{m-1} (-1)^k T_{2k}(x), degree 2(m-1).
pub fn helper_poly(m: u32) -> Result<Polynomial, CertifyError> {
    if m < 2 || m % 2 != 0 {
        return Err(CertifyError::BadHelperOrder(m));
    }
    let deg = 2 * (m - 1);
    let mut coeffs = vec![0.0; deg as usize + 1];
    for k in 0..m {
        let t = chebyshev_dense(2 * k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        for (i, c) in t.iter().enumerate() {
            coeffs[i] += sign * c;
        }
    }
    for c in coeffs.iter_mut() {
        *c /= m as f64;
    }
    let basis = std::sync::Arc::new(crate::basis::PolyBasis::monomial(1, deg));
    Ok(Polynomial::new(basis, coeffs).expect("length"))
}

/// Stable evaluation of H_m through the Chebyshev recurrence (the
/// monomial coefficients of high orders are too ill-conditioned to sum).
pub fn helper_eval(m: u32, x: f64) -> f64 {
    debug_assert!(m >= 2 && m % 2 == 0);
    // running T_j(x) by the three-term recurrence, summing even orders
    let mut acc = 1.0; // k = 0 term: T_0 = 1
    let mut t_prev = 1.0;
    let mut t_cur = x;
    let mut sign = 1.0;
    for j in 2..=(2 * (m - 1)) {
        let t_next = 2.0 * x * t_cur - t_prev;
        t_prev = t_cur;
        t_cur = t_next;
        if j % 2 == 0 {
            sign = -sign;
            acc += sign * t_cur;
        }
    }
    acc / m as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessKind {
    SosGenerators,
    ChebyshevHelper { m: u32 },
}

/// A grid-checked quadratic isolation witness for a support set.
#[derive(Debug, Clone)]
pub struct QicWitness {
    pub kind: WitnessKind,
    /// Expanded monomial form of P (exact for desk-scale orders).
    pub poly: MonoPoly,
    /// Normalized ideal generators f_i used in the construction.
    pub generators: Vec<MonoPoly>,
    /// Sup-norm estimates: per generator for the Chebyshev witness, the
    /// single sup of H = sum f_i^2 for the SOS witness.
    pub sup_norms: Vec<f64>,
    pub c_a: f64,
    pub c_b: f64,
    /// c0 = sqrt(C_b / C_a), the internally consistent localization radius.
    pub c0: f64,
    /// The published radius (1/m) sqrt(3!/D); differs by sqrt(2).
    pub c0_published: f64,
    pub s: usize,
    pub d_const: f64,
    pub d1_const: f64,
    pub eta: f64,
    /// Grid checks: ||P||_inf <= 1, P = 1 on X, and the full QIC shape
    /// inequality P <= max(1 - C_a d^2, 1 - C_b).
    pub sup_norm_ok: bool,
    pub one_on_x_ok: bool,
    pub qic_ok: bool,
}

impl QicWitness {
    /// Stable evaluation through the composite representation.
    pub fn eval(&self, z: &[f64]) -> f64 {
        match self.kind {
            WitnessKind::SosGenerators => {
                let h: f64 = self.generators.iter().map(|f| f.eval(z).powi(2)).sum();
                1.0 - h / self.sup_norms[0]
            }
            WitnessKind::ChebyshevHelper { m } => {
                let s = self.generators.len() as f64;
                self.generators
                    .iter()
                    .zip(&self.sup_norms)
                    .map(|(f, mi)| helper_eval(m, f.eval(z) / mi))
                    .sum::<f64>()
                    / s
            }
        }
    }
}

/// Grid resolution for sup norms and witness verification.
#[derive(Debug, Clone, Copy)]
pub struct CertifyOptions {
    pub grid_per_axis: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self { grid_per_axis: 200 }
    }
}

fn grid_points(bounds: &[(f64, f64)], per_axis: usize) -> Vec<Vec<f64>> {
    let n = bounds.len();
    let mut g = per_axis.max(2);
    // cap the total grid size at 1e6 points
    while (g as f64).powi(n as i32) > 1e6 {
        g = g * 9 / 10;
    }
    let total = g.pow(n as u32);
    let mut out = Vec::with_capacity(total);
    for flat in 0..total {
        let mut p = vec![0.0; n];
        let mut rem = flat;
        for c in 0..n {
            let (lo, hi) = bounds[c];
            p[c] = lo + (hi - lo) * (rem % g) as f64 / (g - 1) as f64;
            rem /= g;
        }
        out.push(p);
    }
    out
}

/// Sup of |f| over the box: dense grid plus projected gradient ascent
/// refinement from the best grid point.
pub fn sup_norm_on_box(f: &MonoPoly, bounds: &[(f64, f64)], opts: &CertifyOptions) -> f64 {
    let n = bounds.len();
    let pts = grid_points(bounds, opts.grid_per_axis);
    let mut best = 0.0f64;
    let mut arg = pts[0].clone();
    for p in &pts {
        let v = f.eval(p).abs();
        if v > best {
            best = v;
            arg = p.clone();
        }
    }
    // ascent on f^2 with backtracking
    let mut x = arg;
    let mut step = bounds
        .iter()
        .map(|&(lo, hi)| hi - lo)
        .fold(f64::INFINITY, f64::min)
        / opts.grid_per_axis as f64;
    for _ in 0..100 {
        let v0 = f.eval(&x);
        let g: Vec<f64> = f.eval_gradient(&x).iter().map(|gi| 2.0 * v0 * gi).collect();
        let gn = g.iter().map(|a| a * a).sum::<f64>().sqrt();
        if gn < 1e-14 {
            break;
        }
        let mut trial = x.clone();
        for c in 0..n {
            trial[c] = (x[c] + step * g[c] / gn).clamp(bounds[c].0, bounds[c].1);
        }
        if f.eval(&trial).abs() > v0.abs() {
            x = trial;
            best = best.max(f.eval(&x).abs());
        } else {
            step *= 0.5;
            if step < 1e-14 {
                break;
            }
        }
    }
    best
}

/// Curvature and floor constants of the normalized generator map.
#[derive(Debug, Clone, Serialize)]
pub struct DEstimate {
    /// Isolation radius: half the smallest pairwise or boundary distance.
    pub eta: f64,
    /// h(z) >= D d(z, X)^2 on the eta-neighborhood of X.
    pub d_const: f64,
    /// Floor of max_j |f_j / M_j| outside the eta-neighborhood.
    pub d1_const: f64,
    /// Sup norms M_i of the generators used for normalization.
    pub sup_norms: Vec<f64>,
}

/// Estimate eta, D, D1 of the quadratic growth bound
/// h(z) = sum (f_i / M_i)^2 >= D d(z, X)^2 near X.
pub fn estimate_d(
    x: &PointSet,
    bounds: &[(f64, f64)],
    generators: &[MonoPoly],
    opts: &CertifyOptions,
) -> Result<DEstimate, CertifyError> {
    let n = x.dimension();
    let sup_norms: Vec<f64> = generators
        .iter()
        .map(|f| sup_norm_on_box(f, bounds, opts))
        .collect();
    if sup_norms.iter().any(|&m| m <= 0.0) {
        return Err(CertifyError::DegenerateSup);
    }
    // eta: half the min of pairwise separation and boundary distances
    let mut candidates: Vec<f64> = Vec::new();
    let sep = x.separation();
    if sep.is_finite() {
        candidates.push(sep);
    }
    for p in x.points() {
        for (c, &(lo, hi)) in bounds.iter().enumerate() {
            let d = (p[c] - lo).min(hi - p[c]);
            if d > 0.0 {
                candidates.push(d);
            }
        }
    }
    let diam: f64 = bounds
        .iter()
        .map(|&(lo, hi)| (hi - lo) * (hi - lo))
        .sum::<f64>()
        .sqrt();
    let base = candidates
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
        .min(diam);
    let eta = 0.5 * if base.is_finite() { base } else { 0.1 * diam };

    // Jacobian bound: min over support of lambda_min(J'J) / 2
    let mut d_jac = f64::INFINITY;
    for (pi, p) in x.points().iter().enumerate() {
        let mut jac = nalgebra::DMatrix::zeros(generators.len(), n);
        for (i, f) in generators.iter().enumerate() {
            let g = f.eval_gradient(p);
            for c in 0..n {
                jac[(i, c)] = g[c] / sup_norms[i];
            }
        }
        let jtj = jac.transpose() * &jac;
        let lmin = crate::linalg::min_eigenvalue(&jtj);
        if lmin <= 1e-12 {
            return Err(CertifyError::SingularJacobian(pi));
        }
        d_jac = d_jac.min(0.5 * lmin);
    }

    let h = |z: &[f64]| -> f64 {
        generators
            .iter()
            .zip(&sup_norms)
            .map(|(f, m)| (f.eval(z) / m).powi(2))
            .sum()
    };

    // grid verification over the near region: radial samples around each
    // support point
    let mut d_grid = f64::INFINITY;
    let dirs = radial_directions(n);
    for p in x.points() {
        for r_step in 1..=12 {
            let r = eta * r_step as f64 / 12.0;
            for dir in &dirs {
                let z: Vec<f64> = (0..n)
                    .map(|c| (p[c] + r * dir[c]).clamp(bounds[c].0, bounds[c].1))
                    .collect();
                let d = x.distance(&z);
                if d > 1e-9 && d <= eta {
                    d_grid = d_grid.min(h(&z) / (d * d));
                }
            }
        }
    }
    let d_const = d_jac.min(d_grid);
    if !(d_const > 0.0) {
        return Err(CertifyError::NonPositiveD);
    }

    // far-region floor, scanned on the box grid plus the eta-ring itself
    let mut far_pts = grid_points(bounds, opts.grid_per_axis.min(60));
    for p in x.points() {
        for dir in &dirs {
            let z: Vec<f64> = (0..n)
                .map(|c| (p[c] + eta * dir[c]).clamp(bounds[c].0, bounds[c].1))
                .collect();
            far_pts.push(z);
        }
    }
    let mut d1 = f64::INFINITY;
    for z in far_pts {
        if x.distance(&z) >= eta * (1.0 - 1e-12) {
            let worst = generators
                .iter()
                .zip(&sup_norms)
                .map(|(f, m)| (f.eval(&z) / m).abs())
                .fold(0.0, f64::max);
            d1 = d1.min(worst);
        }
    }
    if !d1.is_finite() {
        d1 = 0.0;
    }
    Ok(DEstimate {
        eta,
        d_const,
        d1_const: d1,
        sup_norms,
    })
}

fn radial_directions(n: usize) -> Vec<Vec<f64>> {
    match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..16)
            .map(|i| {
                let th = std::f64::consts::TAU * i as f64 / 16.0;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        _ => {
            // deterministic quasi-random directions
            let mut out = Vec::new();
            let mut state = 0x9e3779b97f4a7c15u64;
            for _ in 0..24 {
                let mut v = Vec::with_capacity(n);
                for _ in 0..n {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    v.push(((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0);
                }
                let nn = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                if nn > 1e-9 {
                    out.push(v.into_iter().map(|a| a / nn).collect());
                }
            }
            out
        }
    }
}

/// Explicit curvature constant for product grids in [0,1]^n:
/// D = (d_min / 2)^{2(s-1)} with d_min the smallest gap including the
/// endpoints 0 and 1.
pub fn grid_constant_d(grids: &[Vec<f64>]) -> Result<f64, CertifyError> {
    let s = grids.first().map(|g| g.len()).unwrap_or(0);
    if s <= 1 || grids.iter().any(|g| g.len() != s) {
        return Err(CertifyError::BadGridSize(s));
    }
    let mut d_min = f64::INFINITY;
    for g in grids {
        let mut pts = g.clone();
        pts.push(0.0);
        pts.push(1.0);
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        for w in pts.windows(2) {
            d_min = d_min.min(w[1] - w[0]);
        }
    }
    Ok((d_min / 2.0).powi(2 * (s as i32 - 1)))
}

fn verify_witness(w: &mut QicWitness, x: &PointSet, bounds: &[(f64, f64)], opts: &CertifyOptions) {
    let pts = grid_points(bounds, opts.grid_per_axis);
    let mut sup_ok = true;
    let mut qic_ok = true;
    for z in &pts {
        let p = w.eval(z);
        if p.abs() > 1.0 + 1e-8 {
            sup_ok = false;
        }
        let d = x.distance(z);
        let bound = (1.0 - w.c_a * d * d).max(1.0 - w.c_b);
        if p > bound + 1e-7 {
            qic_ok = false;
        }
    }
    let mut on_x_ok = true;
    for p in x.points() {
        if w.eval(p) < 1.0 - 1e-8 {
            on_x_ok = false;
        }
    }
    w.sup_norm_ok = sup_ok;
    w.one_on_x_ok = on_x_ok;
    w.qic_ok = qic_ok;
}

/// SOS-of-generators witness P = 1 - H/M with H = sum f_i^2 and
/// M = sup_K H; constants are grid estimates.
pub fn sos_witness(
    x: &PointSet,
    bounds: &[(f64, f64)],
    generators: &[MonoPoly],
    opts: &CertifyOptions,
) -> Result<QicWitness, CertifyError> {
    assert!(!generators.is_empty(), "need generators from pointalg");
    let n = x.dimension();
    let mut h = MonoPoly::zero(n);
    for f in generators {
        h = h.add(&f.mul(f));
    }
    let est = estimate_d(x, bounds, generators, opts)?;
    // sup of H itself (H >= 0 so |H| = H)
    let m_sup = sup_norm_on_box(&h, bounds, opts);
    if m_sup <= 0.0 {
        return Err(CertifyError::DegenerateSup);
    }
    let mut poly = MonoPoly::constant(n, 1.0);
    poly = poly.sub(&h.scale(1.0 / m_sup));
    // grid estimates of the isolation constants for this witness
    let pts = grid_points(bounds, opts.grid_per_axis);
    let mut c_a = f64::INFINITY;
    let mut c_b = f64::INFINITY;
    for z in &pts {
        let d = x.distance(z);
        let defect = h.eval(z) / m_sup;
        if d >= est.eta {
            c_b = c_b.min(defect);
        } else if d > 1e-9 {
            c_a = c_a.min(defect / (d * d));
        }
    }
    if !c_b.is_finite() {
        c_b = 0.5;
    }
    let c_b = c_b.clamp(1e-12, 1.0 - 1e-12);
    let c_a = if c_a.is_finite() { c_a } else { est.d_const / m_sup };
    let c0 = (c_b / c_a).sqrt();
    let mut w = QicWitness {
        kind: WitnessKind::SosGenerators,
        poly,
        generators: generators.to_vec(),
        sup_norms: vec![m_sup],
        c_a,
        c_b,
        c0,
        c0_published: c0,
        s: generators.len(),
        d_const: est.d_const,
        d1_const: est.d1_const,
        eta: est.eta,
        sup_norm_ok: false,
        one_on_x_ok: false,
        qic_ok: false,
    };
    verify_witness(&mut w, x, bounds, opts);
    Ok(w)
}

/// Chebyshev-helper witness P_m = (1/s) sum H_m(f_i / M_i) with the
/// quantitative constants C_a = m^2 D / (12 s), C_b = 1/(4s).
pub fn chebyshev_witness(
    x: &PointSet,
    bounds: &[(f64, f64)],
    generators: &[MonoPoly],
    m: u32,
    degree_budget: u32,
    opts: &CertifyOptions,
) -> Result<QicWitness, CertifyError> {
    if m < 2 || m % 2 != 0 {
        return Err(CertifyError::BadHelperOrder(m));
    }
    let g_max = generators.iter().map(|f| f.degree()).max().unwrap_or(0);
    let needed = 2 * (m - 1) * g_max;
    if degree_budget < needed {
        return Err(CertifyError::DegreeBudget {
            budget: degree_budget,
            needed,
        });
    }
    let est = estimate_d(x, bounds, generators, opts)?;
    let s = generators.len();
    let c_a = (m as f64).powi(2) * est.d_const / (12.0 * s as f64);
    let c_b = 1.0 / (4.0 * s as f64);
    let c0 = (c_b / c_a).sqrt(); // = sqrt(3/D)/m
    let c0_published = (6.0 / est.d_const).sqrt() / m as f64;

    // expanded monomial form via composition with the helper polynomial
    let helper = helper_poly(m)?;
    let helper_mono = MonoPoly::from_terms(
        1,
        helper
            .coeffs()
            .iter()
            .enumerate()
            .map(|(i, &c)| (vec![i as u32], c)),
    );
    let n = x.dimension();
    let mut poly = MonoPoly::zero(n);
    for (f, mi) in generators.iter().zip(&est.sup_norms) {
        let inner = f.scale(1.0 / mi);
        poly = poly.add(&helper_mono.compose_univariate(&inner));
    }
    poly = poly.scale(1.0 / s as f64);

    let mut w = QicWitness {
        kind: WitnessKind::ChebyshevHelper { m },
        poly,
        generators: generators.to_vec(),
        sup_norms: est.sup_norms.clone(),
        c_a,
        c_b,
        c0,
        c0_published,
        s,
        d_const: est.d_const,
        d1_const: est.d1_const,
        eta: est.eta,
        sup_norm_ok: false,
        one_on_x_ok: false,
        qic_ok: false,
    };
    verify_witness(&mut w, x, bounds, opts);
    Ok(w)
}

/// One inequality of the quantitative theorems: value, bound, verdict.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundCheck {
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl BoundCheck {
    fn new(value: f64, bound: f64, slack: f64) -> Self {
        Self {
            value,
            bound,
            pass: value <= bound + slack,
        }
    }
}

/// Quantitative diagnostics of a recovered measure against ground truth.
#[derive(Debug, Clone, Serialize)]
pub struct RecoveryDiagnostics {
    pub c0: f64,
    /// Distance from each recovered atom to the true support.
    pub atom_distances: Vec<f64>,
    pub near_mass: f64,
    pub far_mass: f64,
    pub negative_mass: f64,
    /// Every atom heavier than 2 delta / C_b lies within c0 of the truth.
    pub tall_spikes_localized: bool,
    /// sum of w * d(X,z)^2 over near positive atoms vs 2 delta / C_a.
    pub near_energy: BoundCheck,
    /// far positive mass vs 2 delta / C_b.
    pub far_bound: BoundCheck,
    /// negative mass vs 2 delta.
    pub negative_bound: BoundCheck,
    /// per-true-atom |mu(x*) - sum_{d <= c0} w| vs the helper-witness
    /// aggregation bound (only for Chebyshev witnesses).
    pub weight_errors: Vec<f64>,
    pub weight_bound: Option<BoundCheck>,
    /// |int P d(recovered) - int P d(mu)| vs 2 delta.
    pub key_bound: BoundCheck,
    /// near + far + |negative| must equal the total variation.
    pub mass_split_consistent: bool,
}

/// Evaluate the localization inequalities for a recovered (possibly
/// signed) atom list against the true measure.
pub fn diagnose(
    recovered: &[(Vec<f64>, f64)],
    mu: &DiscreteMeasure,
    delta: f64,
    witness: &QicWitness,
    bounds: &[(f64, f64)],
) -> RecoveryDiagnostics {
    let truth = PointSet::new(
        mu.n,
        mu.atoms.iter().map(|(p, _)| p.clone()).collect(),
    )
    .expect("true support is a valid point set");
    let c0 = witness.c0;
    let slack = 1e-6;

    let mut near_mass = 0.0;
    let mut far_mass = 0.0;
    let mut neg_mass = 0.0;
    let mut near_energy = 0.0;
    let mut tall_ok = true;
    let mut distances = Vec::with_capacity(recovered.len());
    for (z, wgt) in recovered {
        let d = truth.distance(z);
        distances.push(d);
        if *wgt < 0.0 {
            neg_mass += wgt.abs();
            continue;
        }
        if d <= c0 {
            near_mass += wgt;
            near_energy += wgt * d * d;
        } else {
            far_mass += wgt;
        }
        if *wgt > 2.0 * delta / witness.c_b && d > c0 {
            tall_ok = false;
        }
    }
    let tv: f64 = recovered.iter().map(|(_, w)| w.abs()).sum();
    let mass_split_consistent = ((near_mass + far_mass + neg_mass) - tv).abs() <= 1e-10 * (1.0 + tv);

    // per-true-atom aggregation error
    let mut weight_errors = Vec::with_capacity(mu.atoms.len());
    for (p, w_true) in &mu.atoms {
        let mut agg = 0.0;
        for (z, w) in recovered {
            let d: f64 = p
                .iter()
                .zip(z)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if d <= c0 {
                agg += w;
            }
        }
        weight_errors.push((w_true - agg).abs());
    }
    let weight_bound = match witness.kind {
        WitnessKind::ChebyshevHelper { m } => {
            let diam: f64 = bounds
                .iter()
                .map(|&(lo, hi)| (hi - lo) * (hi - lo))
                .sum::<f64>()
                .sqrt();
            let s = witness.s as f64;
            let bound = mu.tv() / m as f64
                + (2.0 * (s + 1.0)
                    + 12.0 * s * std::f64::consts::PI.powi(2) / (diam * diam * witness.d_const))
                    * delta;
            let worst = weight_errors.iter().cloned().fold(0.0, f64::max);
            Some(BoundCheck::new(worst, bound, slack))
        }
        WitnessKind::SosGenerators => None,
    };

    // Lemma "key": |int P dDelta - int P dmu| <= 2 delta
    let int_rec: f64 = recovered
        .iter()
        .map(|(z, w)| w * witness.eval(z))
        .sum();
    let int_mu: f64 = mu.atoms.iter().map(|(z, w)| w * witness.eval(z)).sum();
    let key_bound = BoundCheck::new((int_rec - int_mu).abs(), 2.0 * delta, slack);

    RecoveryDiagnostics {
        c0,
        atom_distances: distances,
        near_mass,
        far_mass,
        negative_mass: neg_mass,
        tall_spikes_localized: tall_ok,
        near_energy: BoundCheck::new(near_energy, 2.0 * delta / witness.c_a, slack),
        far_bound: BoundCheck::new(far_mass, 2.0 * delta / witness.c_b, slack),
        negative_bound: BoundCheck::new(neg_mass, 2.0 * delta, slack),
        weight_errors,
        weight_bound,
        key_bound,
        mass_split_consistent,
    }
}
