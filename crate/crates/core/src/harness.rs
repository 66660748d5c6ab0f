//! Reproducible randomized experiment sweeps: exact-recovery heatmaps,
//! noisy-recovery sweeps over noise levels, and summarization galleries.
//!
//! Every sampled instance is keyed by (master seed, cell, trial) through
//! a fixed mixing function, so a plan plus a seed fully determines every
//! byte of the emitted CSV and JSONL.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{PolyBasis, Weight};
use crate::blasso::{self, SemialgebraicDomain};
use crate::certify::{self, CertifyOptions};
use crate::points::{generator_degrees, PointSet};
use crate::recovery::{
    recover_exact, DiscreteMeasure, MomentData, Provenance, RecoveryOptions,
};
use crate::summarize::{summarize, SummarySource, SummarySpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    ExactHeatmap,
    NoisySweep,
    SummaryGallery,
}

/// A fully-specified experiment: (plan, seed) determines every byte of
/// the outputs.
#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub kind: ExperimentKind,
    pub n: usize,
    pub k_range: (usize, usize),
    pub d_range: (u32, u32),
    pub trials: usize,
    pub noise_levels: Vec<f64>,
    pub seed: u64,
    /// Relative threshold under which H* counts as vanishing at a true
    /// support point.
    pub theta_success: f64,
}

impl ExperimentPlan {
    pub fn exact_heatmap(n: usize, k: (usize, usize), d: (u32, u32), trials: usize, seed: u64) -> Self {
        Self {
            kind: ExperimentKind::ExactHeatmap,
            n,
            k_range: k,
            d_range: d,
            trials,
            noise_levels: Vec::new(),
            seed,
            theta_success: 1e-3,
        }
    }

    pub fn noisy_sweep(n: usize, k: usize, d: u32, noise: Vec<f64>, trials: usize, seed: u64) -> Self {
        Self {
            kind: ExperimentKind::NoisySweep,
            n,
            k_range: (k, k),
            d_range: (d, d),
            trials,
            noise_levels: noise,
            seed,
            theta_success: 1e-3,
        }
    }

    /// The desk-scale reference plan used by the reproducibility check.
    pub fn desk_scale(seed: u64) -> Self {
        Self::exact_heatmap(1, (1, 3), (2, 4), 3, seed)
    }
}

/// Stream key: mixes the master seed with cell coordinates.
fn instance_seed(master: u64, a: u64, b: u64, c: u64) -> u64 {
    let mut z = master
        .wrapping_add(a.wrapping_mul(0x9E3779B97F4A7C15))
        .wrapping_add(b.wrapping_mul(0xBF58476D1CE4E5B9))
        .wrapping_add(c.wrapping_mul(0x94D049BB133111EB));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// k i.i.d. uniform points in the box, each carrying weight 1/k.
pub fn random_measure(n: usize, k: usize, bounds: &[(f64, f64)], seed: u64) -> DiscreteMeasure {
    assert!(k >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let atoms = (0..k)
        .map(|_| {
            let p = (0..n)
                .map(|c| rng.gen_range(bounds[c].0..bounds[c].1))
                .collect();
            (p, 1.0 / k as f64)
        })
        .collect();
    DiscreteMeasure::new(n, atoms)
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// One heatmap trial record.
#[derive(Debug, Clone, Serialize)]
pub struct HeatmapTrial {
    pub k: usize,
    pub d: u32,
    pub trial: usize,
    pub seed: u64,
    pub success_fraction: f64,
    pub recovered_atoms: usize,
    pub sdp_objective: f64,
    pub status: String,
}

/// Files produced by an experiment, as (name, contents) pairs.
#[derive(Debug, Clone, Default)]
pub struct ExperimentOutput {
    pub files: Vec<(String, String)>,
}

fn run_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let threads = std::env::var("SPIKESOLVE_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&t| t >= 1);
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

/// Exact-recovery success proportions over a (k, d) grid; returns the
/// CSV matrix and per-trial JSONL lines.
pub fn recovery_rate(plan: &ExperimentPlan, opts: &RecoveryOptions) -> ExperimentOutput {
    assert_eq!(plan.kind, ExperimentKind::ExactHeatmap);
    let bounds = vec![(-1.0, 1.0); plan.n];
    let mut cells: Vec<(usize, u32, usize)> = Vec::new();
    for k in plan.k_range.0..=plan.k_range.1 {
        for d in plan.d_range.0..=plan.d_range.1 {
            for trial in 0..plan.trials {
                cells.push((k, d, trial));
            }
        }
    }
    let trials: Vec<HeatmapTrial> = run_pool(|| {
        cells
            .par_iter()
            .map(|&(k, d, trial)| {
                let seed = instance_seed(plan.seed, k as u64, d as u64, trial as u64);
                let mu = random_measure(plan.n, k, &bounds, seed);
                let basis = Arc::new(
                    PolyBasis::monomial_on(plan.n, 2 * d, bounds.clone()).expect("box"),
                );
                let values = mu.moments(&basis).expect("dims");
                let y = MomentData::new(basis, values, 0.0, Provenance::Exact).expect("len");
                match recover_exact(&y, d, opts) {
                    Ok(rep) => {
                        // fraction of true atoms where H* nearly vanishes
                        let scale = rep.grid_max.max(1e-300);
                        let hits = mu
                            .atoms
                            .iter()
                            .filter(|(p, _)| rep.hstar.eval(p) <= plan.theta_success * scale)
                            .count();
                        HeatmapTrial {
                            k,
                            d,
                            trial,
                            seed,
                            success_fraction: hits as f64 / k as f64,
                            recovered_atoms: rep.measure.atoms.len(),
                            sdp_objective: rep.sdp_objective,
                            status: if rep.success { "ok".into() } else { "failed".into() },
                        }
                    }
                    Err(e) => HeatmapTrial {
                        k,
                        d,
                        trial,
                        seed,
                        success_fraction: 0.0,
                        recovered_atoms: 0,
                        sdp_objective: f64::NAN,
                        status: format!("error: {e}"),
                    },
                }
            })
            .collect()
    });
    let mut trials = trials;
    trials.sort_by_key(|t| (t.k, t.d, t.trial));

    // CSV matrix: header row of d values, header column of k values
    let mut csv = String::from("k\\d");
    for d in plan.d_range.0..=plan.d_range.1 {
        csv.push(',');
        csv.push_str(&d.to_string());
    }
    csv.push('\n');
    for k in plan.k_range.0..=plan.k_range.1 {
        csv.push_str(&k.to_string());
        for d in plan.d_range.0..=plan.d_range.1 {
            let vals: Vec<f64> = trials
                .iter()
                .filter(|t| t.k == k && t.d == d)
                .map(|t| t.success_fraction)
                .collect();
            let mean = vals.iter().sum::<f64>() / vals.len().max(1) as f64;
            csv.push(',');
            csv.push_str(&fmt(mean));
        }
        csv.push('\n');
    }
    let jsonl: String = trials
        .iter()
        .map(|t| serde_json::to_string(t).expect("serializable") + "\n")
        .collect();
    ExperimentOutput {
        files: vec![
            ("exact_heatmap.csv".into(), csv),
            ("exact_heatmap.jsonl".into(), jsonl),
        ],
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NoisyTrial {
    pub epsilon: f64,
    pub trial: usize,
    pub seed: u64,
    pub delta: f64,
    pub alpha: f64,
    pub tv: f64,
    pub feasibility_residual: f64,
    pub localization_error: f64,
    pub negative_mass: f64,
    pub far_mass: f64,
    pub far_bound: f64,
    pub key_value: f64,
    pub bounds_pass: bool,
    pub status: String,
}

/// Noisy-recovery sweep over noise levels with quantitative diagnostics
/// against the sampled ground truth.
pub fn noisy_sweep(plan: &ExperimentPlan, opts: &RecoveryOptions) -> ExperimentOutput {
    assert_eq!(plan.kind, ExperimentKind::NoisySweep);
    assert_eq!(plan.n, 1, "noisy sweeps are univariate");
    let bounds = vec![(-1.0, 1.0)];
    let d = plan.d_range.0;
    let k = plan.k_range.0;
    let mut cases: Vec<(usize, usize)> = Vec::new();
    for (li, _) in plan.noise_levels.iter().enumerate() {
        for trial in 0..plan.trials {
            cases.push((li, trial));
        }
    }
    let results: Vec<NoisyTrial> = run_pool(|| {
        cases
            .par_iter()
            .map(|&(li, trial)| {
                let eps = plan.noise_levels[li];
                let seed = instance_seed(plan.seed, li as u64, trial as u64, 1);
                let mu = random_measure(1, k, &bounds, seed);
                run_noisy_trial(&mu, d, eps, seed, trial, opts)
            })
            .collect()
    });
    let mut results = results;
    results.sort_by(|a, b| {
        a.epsilon
            .total_cmp(&b.epsilon)
            .then(a.trial.cmp(&b.trial))
    });
    let mut csv = String::from("epsilon,trial,delta,alpha,tv,localization_error,negative_mass,far_mass,key_value\n");
    for r in &results {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt(r.epsilon),
            r.trial,
            fmt(r.delta),
            fmt(r.alpha),
            fmt(r.tv),
            fmt(r.localization_error),
            fmt(r.negative_mass),
            fmt(r.far_mass),
            fmt(r.key_value),
        ));
    }
    let jsonl: String = results
        .iter()
        .map(|t| serde_json::to_string(t).expect("serializable") + "\n")
        .collect();
    ExperimentOutput {
        files: vec![
            ("noisy_sweep.csv".into(), csv),
            ("noisy_sweep.jsonl".into(), jsonl),
        ],
    }
}

/// One noisy trial: sample Gaussian noise on orthonormal moments, set
/// delta to the realized noise norm, recover, and diagnose.
pub fn run_noisy_trial(
    mu: &DiscreteMeasure,
    d: u32,
    eps: f64,
    seed: u64,
    trial: usize,
    opts: &RecoveryOptions,
) -> NoisyTrial {
    let bounds = vec![(-1.0, 1.0)];
    let clean = blasso::orthonormal_moments(mu, d, bounds.clone()).expect("moments");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA5A5_5A5A_D00D_F00D);
    let normal = Normal::new(0.0, eps.max(1e-300)).expect("sigma");
    let noise: Vec<f64> = (0..clean.values.len())
        .map(|_| normal.sample(&mut rng))
        .collect();
    let delta = noise.iter().map(|v| v * v).sum::<f64>().sqrt();
    let values: Vec<f64> = clean
        .values
        .iter()
        .zip(&noise)
        .map(|(a, b)| a + b)
        .collect();
    let y = MomentData::new(clean.basis.clone(), values, delta, Provenance::Noisy).expect("len");
    let domain = SemialgebraicDomain::box_domain(bounds.clone());
    let level = blasso::default_level(d);
    match blasso::recover_noisy(&y, delta, &domain, d / 2, level, opts) {
        Ok(rep) => {
            let loc = rep.report.measure.support_distance(mu);
            // diagnostics with the order-2 helper witness on the truth
            let truth_points =
                PointSet::new(1, mu.atoms.iter().map(|(p, _)| p.clone()).collect()).expect("distinct");
            let (_, gens, gmax) = generator_degrees(&truth_points);
            let diag = if 2 * gmax <= d {
                let gen_polys: Vec<_> = gens.into_iter().map(|g| g.poly).collect();
                certify::chebyshev_witness(
                    &truth_points,
                    &bounds,
                    &gen_polys,
                    2,
                    d,
                    &CertifyOptions::default(),
                )
                .ok()
                .map(|w| certify::diagnose(&rep.report.measure.atoms, mu, delta, &w, &bounds))
            } else {
                None
            };
            let (neg, far, far_bound, key, pass) = match &diag {
                Some(di) => (
                    di.negative_mass,
                    di.far_mass,
                    di.far_bound.bound,
                    di.key_bound.value,
                    di.negative_bound.pass && di.far_bound.pass && di.key_bound.pass,
                ),
                None => (0.0, f64::NAN, f64::NAN, f64::NAN, false),
            };
            NoisyTrial {
                epsilon: eps,
                trial,
                seed,
                delta,
                alpha: rep.dual.alpha,
                tv: rep.tv,
                feasibility_residual: rep.feasibility_residual,
                localization_error: loc,
                negative_mass: neg,
                far_mass: far,
                far_bound,
                key_value: key,
                bounds_pass: pass,
                status: if rep.report.success {
                    "ok".into()
                } else {
                    "failed".into()
                },
            }
        }
        Err(e) => NoisyTrial {
            epsilon: eps,
            trial,
            seed,
            delta: f64::NAN,
            alpha: f64::NAN,
            tv: f64::NAN,
            feasibility_residual: f64::NAN,
            localization_error: f64::NAN,
            negative_mass: f64::NAN,
            far_mass: f64::NAN,
            far_bound: f64::NAN,
            key_value: f64::NAN,
            bounds_pass: false,
            status: format!("error: {e}"),
        },
    }
}

/// Quadrature-style summaries of the classical densities.
pub fn summary_gallery(plan: &ExperimentPlan, opts: &RecoveryOptions) -> ExperimentOutput {
    assert_eq!(plan.kind, ExperimentKind::SummaryGallery);
    let domain = SemialgebraicDomain::box_domain(vec![(-1.0, 1.0)]);
    let mut csv = String::from("density,degree,k,node,weight\n");
    let cases: &[(Weight, u32)] = &[
        (Weight::Uniform, 2),
        (Weight::Uniform, 6),
        (Weight::Uniform, 10),
        (Weight::Cheb1, 5),
        (Weight::Cheb2, 5),
    ];
    for &(w, d) in cases {
        let spec = SummarySpec {
            source: SummarySource::Density(w),
            degree: d,
            k: d as usize,
            delta: None,
        };
        match summarize(&spec, &domain, opts) {
            Ok(rep) => {
                let mut atoms = rep.outcome.summary.atoms.clone();
                atoms.sort_by(|a, b| a.0[0].total_cmp(&b.0[0]));
                for (p, wt) in atoms {
                    csv.push_str(&format!(
                        "{:?},{},{},{},{}\n",
                        w,
                        d,
                        spec.k,
                        fmt(p[0]),
                        fmt(wt)
                    ));
                }
            }
            Err(e) => {
                csv.push_str(&format!("{w:?},{d},{},error: {e}\n", spec.k));
            }
        }
    }
    ExperimentOutput {
        files: vec![("summary_gallery.csv".into(), csv)],
    }
}

/// Dispatch on the plan kind.
pub fn run_experiment(plan: &ExperimentPlan, opts: &RecoveryOptions) -> ExperimentOutput {
    match plan.kind {
        ExperimentKind::ExactHeatmap => recovery_rate(plan, opts),
        ExperimentKind::NoisySweep => noisy_sweep(plan, opts),
        ExperimentKind::SummaryGallery => summary_gallery(plan, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_measure_is_uniform_counting() {
        let bounds = vec![(-1.0, 1.0); 2];
        let mu = random_measure(2, 5, &bounds, 99);
        assert_eq!(mu.atoms.len(), 5);
        for (p, w) in &mu.atoms {
            assert_eq!(*w, 0.2);
            assert!(p.iter().all(|x| (-1.0..1.0).contains(x)));
        }
        assert!((mu.tv() - 1.0).abs() < 1e-15);
        let mu2 = random_measure(2, 5, &bounds, 99);
        assert_eq!(format!("{:?}", mu.atoms), format!("{:?}", mu2.atoms));
        let one = random_measure(1, 1, &bounds[..1], 7);
        assert_eq!(one.atoms[0].1, 1.0);
    }

    #[test]
    fn heatmap_is_reproducible_and_sane() {
        let plan = ExperimentPlan::exact_heatmap(1, (1, 2), (2, 3), 2, 7);
        let opts = RecoveryOptions::default();
        let out1 = recovery_rate(&plan, &opts);
        let out2 = recovery_rate(&plan, &opts);
        assert_eq!(out1.files, out2.files);
        let csv = &out1.files[0].1;
        assert!(csv.starts_with("k\\d,2,3\n"));
        // k = 1, d >= 2: recovery is certified, proportion 1
        let row1: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row1[0], "1");
        assert!(row1[1].starts_with("1.0000000000000000e0"));
    }

    #[test]
    fn noisy_sweep_runs_and_orders_output() {
        let plan = ExperimentPlan::noisy_sweep(1, 2, 6, vec![1e-1, 1e-4], 2, 5);
        let opts = RecoveryOptions::default();
        let out = noisy_sweep(&plan, &opts);
        let csv = &out.files[0].1;
        assert!(csv.lines().count() == 5);
        // all trials carry a delta and a status line in the jsonl
        let jsonl = &out.files[1].1;
        assert_eq!(jsonl.lines().count(), 4);
        for line in jsonl.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert!(v.get("delta").is_some());
        }
    }

    #[test]
    fn sweep_failures_are_data_not_panics() {
        // a degree too small to express anything still completes
        let plan = ExperimentPlan::exact_heatmap(1, (4, 4), (1, 1), 2, 3);
        let out = recovery_rate(&plan, &RecoveryOptions::default());
        assert!(out.files[0].1.lines().count() >= 2);
    }
}
