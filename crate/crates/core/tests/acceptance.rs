//! Acceptance suite: every release-gating behavior of the crate, one
//! test per criterion, each printing a PASS line with its runtime.
//!
//! Run with `cargo test --release --test acceptance -- --nocapture`.

use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spikesolve::basis::{PolyBasis, Weight};
use spikesolve::blasso::{self, SemialgebraicDomain};
use spikesolve::certify::{self, CertifyOptions};
use spikesolve::harness::{self, ExperimentPlan};
use spikesolve::linalg::binomial;
use spikesolve::points;
use spikesolve::recovery::{self, DiscreteMeasure, MomentData, Provenance, RecoveryOptions};
use spikesolve::summarize::{summarize, SummarySource, SummarySpec};

fn report(name: &str, pass: bool, t0: Instant) {
    println!(
        "criterion {name}: {} ({:.2}s)",
        if pass { "PASS" } else { "FAIL" },
        t0.elapsed().as_secs_f64()
    );
    assert!(pass, "criterion {name} failed");
}

/// Independent Gauss-Legendre oracle: eigenvalues of the Jacobi matrix,
/// computed directly here rather than through any crate quadrature path.
fn gauss_legendre_oracle(n: usize) -> Vec<f64> {
    let mut jac = nalgebra::DMatrix::<f64>::zeros(n, n);
    for j in 1..n {
        let b = j as f64 / ((4 * j * j - 1) as f64).sqrt();
        jac[(j - 1, j)] = b;
        jac[(j, j - 1)] = b;
    }
    let mut ev: Vec<f64> = nalgebra::SymmetricEigen::new(jac)
        .eigenvalues
        .iter()
        .cloned()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[test]
fn criterion_01_helper_polynomial_suite() {
    let t0 = Instant::now();
    let grid: Vec<f64> = (0..10_000)
        .map(|i| -1.0 + 2.0 * i as f64 / 9_999.0)
        .collect();
    let zgrid: Vec<f64> = (0..10_000)
        .map(|i| -std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * i as f64 / 9_999.0)
        .collect();
    let mut pass = true;
    for m in (2..=40u32).step_by(2) {
        let mf = m as f64;
        // evenness of the coefficient vector
        let coeffs = certify::helper_poly(m).unwrap();
        for (i, c) in coeffs.coeffs().iter().enumerate() {
            if i % 2 == 1 && c.abs() > 1e-12 {
                pass = false;
            }
        }
        for &x in &grid {
            let h = certify::helper_eval(m, x);
            if h.abs() > 1.0 + 1e-9 {
                pass = false; // boundedness
            }
            if h > (0.75f64).max(1.0 - mf * mf * x * x / 12.0) + 1e-9 {
                pass = false; // part 4b
            }
            if h < 1.0 - std::f64::consts::PI.powi(2) / 2.0 * mf * mf * x * x - 1e-9 {
                pass = false; // part 4c
            }
        }
        for &z in &zgrid {
            if z.abs() >= 2.0 / mf {
                let h = certify::helper_eval(m, z.sin());
                if h.abs() > 0.75 + 1e-9 {
                    pass = false; // part 4a
                }
            }
        }
    }
    pass &= t0.elapsed().as_secs_f64() < 5.0;
    report("01 helper-polynomial suite", pass, t0);
}

fn match_atoms(rec: &DiscreteMeasure, truth: &DiscreteMeasure, pos_tol: f64, w_tol: Option<f64>) -> bool {
    if rec.atoms.len() != truth.atoms.len() {
        return false;
    }
    let mut used = vec![false; rec.atoms.len()];
    for (p, w) in &truth.atoms {
        let mut found = false;
        for (j, (q, v)) in rec.atoms.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d: f64 = p
                .iter()
                .zip(q)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if d <= pos_tol && w_tol.map_or(true, |wt| (w - v).abs() <= wt) {
                used[j] = true;
                found = true;
                break;
            }
        }
        if !found {
            return false;
        }
    }
    true
}

#[test]
fn criterion_02_exact_recovery_1d() {
    let t0 = Instant::now();
    let opts = RecoveryOptions::default();
    let bounds = vec![(-1.0, 1.0)];
    let mut ok = 0;
    let trials = 20;
    for trial in 0..trials {
        let mu = harness::random_measure(1, 4, &bounds, 20_000 + trial);
        let basis = Arc::new(PolyBasis::monomial_on(1, 8, bounds.clone()).unwrap());
        let y = MomentData::new(basis.clone(), mu.moments(&basis).unwrap(), 0.0, Provenance::Exact)
            .unwrap();
        if let Ok(rep) = recovery::recover_exact(&y, 4, &opts) {
            if rep.success && match_atoms(&rep.measure, &mu, 1e-3, Some(1e-3)) {
                ok += 1;
            }
        }
    }
    let pass = ok * 100 >= trials * 95 && t0.elapsed().as_secs_f64() < 120.0;
    report(
        &format!("02 exact recovery 1-D ({ok}/{trials} trials)"),
        pass,
        t0,
    );
}

#[test]
fn criterion_03_exact_recovery_2d() {
    let t0 = Instant::now();
    let opts = RecoveryOptions::default();
    let bounds = vec![(0.0, 1.0), (0.0, 1.0)];
    let mut ok = 0;
    let trials = 10;
    for trial in 0..trials {
        let mu = harness::random_measure(2, 4, &bounds, 30_000 + trial);
        let basis = Arc::new(PolyBasis::monomial_on(2, 12, bounds.clone()).unwrap());
        let y = MomentData::new(basis.clone(), mu.moments(&basis).unwrap(), 0.0, Provenance::Exact)
            .unwrap();
        if let Ok(rep) = recovery::recover_exact(&y, 6, &opts) {
            if rep.success && match_atoms(&rep.measure, &mu, 5e-3, None) {
                ok += 1;
            }
        }
    }
    let pass = ok * 100 >= trials * 90 && t0.elapsed().as_secs_f64() < 600.0;
    report(
        &format!("03 exact recovery 2-D ({ok}/{trials} trials)"),
        pass,
        t0,
    );
}

#[test]
fn criterion_04_uniqueness_degree_algebra() {
    let t0 = Instant::now();
    let mut pass = true;
    // Hilbert functions of 50 random generic sets match the closed form
    for seed in 0..50u64 {
        let n = 1 + (seed % 3) as usize;
        let k = 1 + (seed as usize * 7) % 15;
        let mut rng = ChaCha8Rng::seed_from_u64(40_000 + seed);
        let pts: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let x = points::PointSet::new(n, pts).unwrap();
        let mut t = 0u32;
        loop {
            let want = binomial(n + t as usize, t as usize).min(k);
            if points::hilbert_function(&x, t) != want {
                pass = false;
                break;
            }
            if want == k {
                break;
            }
            t += 1;
        }
    }
    // generic bounds in dimension one
    for k in 1..=15usize {
        if points::generic_bounds(1, k) != (2 * k as u32, 2 * k as u32 - 1) {
            pass = false;
        }
    }
    // singular degree of k interval points is exactly 2k
    for k in 1..=5usize {
        let mut rng = ChaCha8Rng::seed_from_u64(41_000 + k as u64);
        let pts: Vec<Vec<f64>> = (0..k).map(|_| vec![rng.gen_range(-0.9..0.9)]).collect();
        let x = points::PointSet::new(1, pts).unwrap();
        if points::singular_degree(&x) != 2 * k as u32 {
            pass = false;
        }
    }
    pass &= t0.elapsed().as_secs_f64() < 60.0;
    report("04 uniqueness-degree algebra", pass, t0);
}

#[test]
fn criterion_05_sharpness_below_generic_bound() {
    let t0 = Instant::now();
    let opts = RecoveryOptions::default();
    let bounds = vec![(-1.0, 1.0), (-1.0, 1.0)];
    let mut failures = 0;
    let trials = 10;
    for trial in 0..trials {
        let mu = harness::random_measure(2, 3, &bounds, 50_000 + trial);
        let basis = Arc::new(PolyBasis::monomial_on(2, 2, bounds.clone()).unwrap());
        let y = MomentData::new(basis.clone(), mu.moments(&basis).unwrap(), 0.0, Provenance::Exact)
            .unwrap();
        match recovery::recover_exact(&y, 1, &opts) {
            Ok(rep) if rep.success => {}
            _ => failures += 1,
        }
    }
    let pass = failures >= 9;
    report(
        &format!("05 sharpness below generic bound ({failures}/{trials} failed)"),
        pass,
        t0,
    );
}

/// Deterministic well-separated random spikes: reject draws whose
/// separation would make the desk-scale instance ill-posed.
fn separated_measure(n: usize, k: usize, bounds: &[(f64, f64)], seed: u64, min_sep: f64) -> DiscreteMeasure {
    let mut s = seed;
    loop {
        let mu = harness::random_measure(n, k, bounds, s);
        let pts = points::PointSet::new(n, mu.atoms.iter().map(|(p, _)| p.clone()).collect()).unwrap();
        if pts.separation() >= min_sep {
            return mu;
        }
        s = s.wrapping_add(1);
    }
}

fn noisy_instance(
    trial: u64,
    delta: f64,
) -> (DiscreteMeasure, MomentData, SemialgebraicDomain) {
    let bounds = vec![(-1.0, 1.0)];
    let mu = separated_measure(1, 3, &bounds, 60_000 + trial, 0.2);
    let clean = blasso::orthonormal_moments(&mu, 8, bounds.clone()).unwrap();
    // noise direction sampled, rescaled to 0.8 * delta so the truth is
    // strictly inside the mismatch ball
    let mut rng = ChaCha8Rng::seed_from_u64(61_000 + trial);
    let mut noise: Vec<f64> = (0..clean.values.len())
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    let nn = noise.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in noise.iter_mut() {
        *v *= 0.8 * delta / nn;
    }
    let values: Vec<f64> = clean
        .values
        .iter()
        .zip(&noise)
        .map(|(a, b)| a + b)
        .collect();
    let y = MomentData::new(clean.basis.clone(), values, delta, Provenance::Noisy).unwrap();
    (mu, y, SemialgebraicDomain::box_domain(bounds))
}

#[test]
fn criterion_06_duality_gap() {
    let t0 = Instant::now();
    let opts = RecoveryOptions::default();
    let delta = 1e-4;
    let mut pass = true;
    for trial in 0..10u64 {
        let (_mu, y, domain) = noisy_instance(trial, delta);
        match blasso::recover_noisy(&y, delta, &domain, 4, 8, &opts) {
            Ok(rep) => {
                let gap_ok = (rep.dual.alpha - rep.tv).abs() <= 1e-3 * (1.0 + rep.dual.alpha);
                let feas_ok = rep.feasibility_residual <= delta + 1e-6;
                if !gap_ok || !feas_ok {
                    eprintln!(
                        "trial {trial}: alpha {} tv {} feas {}",
                        rep.dual.alpha, rep.tv, rep.feasibility_residual
                    );
                    pass = false;
                }
            }
            Err(e) => {
                eprintln!("trial {trial}: {e}");
                pass = false;
            }
        }
    }
    pass &= t0.elapsed().as_secs_f64() < 300.0;
    report("06 duality gap at level 8", pass, t0);
}

#[test]
fn criterion_07_hierarchy_monotonicity() {
    let t0 = Instant::now();
    let opts = RecoveryOptions::default();
    let mut pass = true;
    for trial in 0..20u64 {
        let bounds = vec![(-1.0, 1.0)];
        let k = 2 + (trial % 2) as usize;
        let mu = separated_measure(1, k, &bounds, 70_000 + trial, 0.1);
        let d = 4 + 2 * (trial % 2) as u32;
        let clean = blasso::orthonormal_moments(&mu, d, bounds.clone()).unwrap();
        let delta = 1e-3;
        let y = MomentData::new(clean.basis.clone(), clean.values.clone(), delta, Provenance::Noisy)
            .unwrap();
        let domain = SemialgebraicDomain::box_domain(bounds);
        match blasso::solve_hierarchy(&y, delta, &domain, &[d, d + 2, d + 4], &opts.solver) {
            Ok(duals) => {
                for w in duals.windows(2) {
                    if w[1].alpha < w[0].alpha - 1e-6 {
                        eprintln!(
                            "trial {trial}: alpha decreased {} -> {}",
                            w[0].alpha, w[1].alpha
                        );
                        pass = false;
                    }
                }
            }
            Err(e) => {
                eprintln!("trial {trial}: {e}");
                pass = false;
            }
        }
    }
    report("07 hierarchy monotonicity", pass, t0);
}

#[test]
fn criterion_08_quantitative_bounds() {
    let t0 = Instant::now();
    let opts = RecoveryOptions::default();
    let delta = 1e-4;
    let bounds = vec![(-1.0, 1.0)];
    let mut pass = true;
    for trial in 0..10u64 {
        let (mu, y, domain) = noisy_instance(trial, delta);
        let rep = match blasso::recover_noisy(&y, delta, &domain, 4, 8, &opts) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("trial {trial}: {e}");
                pass = false;
                continue;
            }
        };
        let truth =
            points::PointSet::new(1, mu.atoms.iter().map(|(p, _)| p.clone()).collect()).unwrap();
        let (_, gens, _) = points::generator_degrees(&truth);
        let gen_polys: Vec<_> = gens.into_iter().map(|g| g.poly).collect();
        let witness = match certify::chebyshev_witness(
            &truth,
            &bounds,
            &gen_polys,
            2,
            8,
            &CertifyOptions::default(),
        ) {
            Ok(w) => w,
            Err(e) => {
                eprintln!("trial {trial}: witness: {e}");
                pass = false;
                continue;
            }
        };
        // the witness must be grid-verified before its bounds mean anything
        if !witness.sup_norm_ok || !witness.one_on_x_ok {
            eprintln!("trial {trial}: witness failed grid verification");
            pass = false;
            continue;
        }
        let diag = certify::diagnose(&rep.report.measure.atoms, &mu, delta, &witness, &bounds);
        if diag.negative_mass > 2.0 * delta + 1e-6 {
            eprintln!("trial {trial}: negative mass {}", diag.negative_mass);
            pass = false;
        }
        if diag.far_mass > 2.0 * delta / witness.c_b + 1e-6 {
            eprintln!("trial {trial}: far mass {}", diag.far_mass);
            pass = false;
        }
        if diag.key_bound.value > 2.0 * delta + 1e-6 {
            eprintln!("trial {trial}: key value {}", diag.key_bound.value);
            pass = false;
        }
    }
    // qualitative: localization shrinks as the noise level drops
    let mut med_errors = Vec::new();
    for (li, eps) in [1e-1, 1e-3, 1e-5].into_iter().enumerate() {
        let mut errs = Vec::new();
        for trial in 0..3u64 {
            let mu = separated_measure(1, 3, &bounds, 80_000 + trial, 0.25);
            let rec = harness::run_noisy_trial(&mu, 8, eps, 81_000 + 17 * li as u64 + trial, trial as usize, &opts);
            if rec.localization_error.is_finite() {
                errs.push(rec.localization_error);
            }
        }
        errs.sort_by(f64::total_cmp);
        med_errors.push(errs.get(errs.len() / 2).copied().unwrap_or(f64::INFINITY));
    }
    if !(med_errors[2] <= med_errors[0] + 1e-9) {
        eprintln!("localization did not shrink: {med_errors:?}");
        pass = false;
    }
    report("08 quantitative approximation bounds", pass, t0);
}

#[test]
fn criterion_09_summarization_quadrature() {
    let t0 = Instant::now();
    let opts = RecoveryOptions::default();
    let domain = SemialgebraicDomain::box_domain(vec![(-1.0, 1.0)]);
    let mut pass = true;
    for d in [2u32, 6, 10] {
        let spec = SummarySpec {
            source: SummarySource::Density(Weight::Uniform),
            degree: d,
            k: d as usize,
            delta: None,
        };
        match summarize(&spec, &domain, &opts) {
            Ok(rep) => {
                let mut nodes: Vec<f64> = rep
                    .outcome
                    .summary
                    .atoms
                    .iter()
                    .map(|(p, _)| p[0])
                    .collect();
                nodes.sort_by(f64::total_cmp);
                let oracle = gauss_legendre_oracle(d as usize);
                if nodes.len() != oracle.len()
                    || nodes
                        .iter()
                        .zip(&oracle)
                        .any(|(a, b)| (a - b).abs() > 1e-2)
                {
                    eprintln!("uniform d={d}: nodes {nodes:?} vs oracle {oracle:?}");
                    pass = false;
                }
            }
            Err(e) => {
                eprintln!("uniform d={d}: {e}");
                pass = false;
            }
        }
    }
    // cheb2 density at d = 5: Chebyshev roots cos((2i-1) pi / 10)
    let spec = SummarySpec {
        source: SummarySource::Density(Weight::Cheb2),
        degree: 5,
        k: 5,
        delta: None,
    };
    match summarize(&spec, &domain, &opts) {
        Ok(rep) => {
            let mut nodes: Vec<f64> = rep
                .outcome
                .summary
                .atoms
                .iter()
                .map(|(p, _)| p[0])
                .collect();
            nodes.sort_by(f64::total_cmp);
            let mut want: Vec<f64> = (1..=5)
                .map(|i| ((2 * i - 1) as f64 * std::f64::consts::PI / 10.0).cos())
                .collect();
            want.sort_by(f64::total_cmp);
            if nodes.len() != 5
                || nodes
                    .iter()
                    .zip(&want)
                    .any(|(a, b)| (a - b).abs() > 1e-2)
            {
                eprintln!("cheb2 d=5: nodes {nodes:?} vs {want:?}");
                pass = false;
            }
        }
        Err(e) => {
            eprintln!("cheb2 d=5: {e}");
            pass = false;
        }
    }
    pass &= t0.elapsed().as_secs_f64() < 300.0;
    report("09 summarization = quadrature", pass, t0);
}

#[test]
fn criterion_10_reproducibility() {
    let t0 = Instant::now();
    let opts = RecoveryOptions::default();
    let heat = ExperimentPlan::desk_scale(7);
    let sweep = ExperimentPlan::noisy_sweep(1, 2, 6, vec![1e-2, 1e-4], 2, 7);
    let out1 = (
        harness::run_experiment(&heat, &opts),
        harness::run_experiment(&sweep, &opts),
    );
    let out2 = (
        harness::run_experiment(&heat, &opts),
        harness::run_experiment(&sweep, &opts),
    );
    let pass = out1.0.files == out2.0.files && out1.1.files == out2.1.files;
    report("10 reproducibility of the desk-scale plan", pass, t0);
}
