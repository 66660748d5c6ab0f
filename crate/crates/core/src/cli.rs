//! Command-line surface: moments, recover, analyze, certify, summarize
//! and experiment subcommands over the JSON/CSV file formats.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::basis::{box_moments, PolyBasis, Weight};
use crate::blasso::{self, SemialgebraicDomain};
use crate::certify::{self, CertifyOptions};
use crate::conic::SolveOptions;
use crate::formats::{self, MeasureFile, MomentFile};
use crate::harness::{self, ExperimentKind, ExperimentPlan};
use crate::points::{self, PointSet};
use crate::recovery::{self, MomentData, Provenance, RecoveryOptions};
use crate::summarize::{summarize, SummarySource, SummarySpec};

/// Exit codes: 0 success, 2 solver failure, 3 extraction failure,
/// 4 duplicate points, 1 anything else.
pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_EXTRACTION: i32 = 3;
pub const EXIT_DUPLICATE: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "spikesolve",
    about = "Recover positive atomic measures from polynomial moments",
    version
)]
pub struct Cli {
    /// Master seed for anything randomized.
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    /// Conic solver tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Conic solver iteration cap.
    #[arg(long, global = true, default_value_t = 200_000)]
    pub max_iter: usize,
    /// Grid points per axis for support extraction and certification.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BasisArg {
    Monomial,
    Orthonormal,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DensityArg {
    Uniform,
    Cheb1,
    Cheb2,
}

impl From<DensityArg> for Weight {
    fn from(d: DensityArg) -> Weight {
        match d {
            DensityArg::Uniform => Weight::Uniform,
            DensityArg::Cheb1 => Weight::Cheb1,
            DensityArg::Cheb2 => Weight::Cheb2,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Exact,
    Noisy,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    ExactHeatmap,
    NoisySweep,
    SummaryGallery,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute exact (optionally noise-corrupted) moments of a measure
    /// file or named density.
    Moments(MomentsArgs),
    /// Recover an atomic measure from a moment file.
    Recover(RecoverArgs),
    /// Ideal invariants and uniqueness-degree bounds of a point set.
    Analyze(AnalyzeArgs),
    /// Construct and grid-check a quadratic-isolation witness.
    Certify(CertifyArgs),
    /// Compress a density or moment vector into a k-atom summary.
    Summarize(SummarizeArgs),
    /// Run a reproducible randomized experiment sweep.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    /// Measure file to integrate.
    #[arg(long, conflicts_with = "density")]
    pub measure: Option<PathBuf>,
    /// Named density instead of a measure file.
    #[arg(long)]
    pub density: Option<DensityArg>,
    #[arg(long, value_enum, default_value_t = BasisArg::Monomial)]
    pub basis: BasisArg,
    #[arg(long)]
    pub degree: u32,
    /// Box as `lo,hi` pairs separated by `;` (default [-1,1]^n).
    #[arg(long, value_name = "BOX")]
    pub bounds: Option<String>,
    /// Gaussian noise level sigma; delta becomes the realized noise norm.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    /// Moment file produced by `moments`.
    #[arg(long)]
    pub moments: PathBuf,
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    /// Gram half-degree (default: half the file degree).
    #[arg(long)]
    pub degree: Option<u32>,
    /// Hierarchy level for noisy mode (default: file degree rounded even).
    #[arg(long)]
    pub level: Option<u32>,
    /// Ground-truth measure file; adds quantitative diagnostics.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Output measure file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output report file.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Points file (a measure file; weights are ignored).
    #[arg(long)]
    pub points: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub points: PathBuf,
    /// Helper order m (even); omit for the plain SOS witness.
    #[arg(long)]
    pub m: Option<u32>,
    /// Degree budget for the witness.
    #[arg(long)]
    pub degree: Option<u32>,
    #[arg(long, value_name = "BOX")]
    pub bounds: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SummarizeArgs {
    #[arg(long, conflicts_with = "moments")]
    pub density: Option<DensityArg>,
    /// Moment file covering degree 2 * degree.
    #[arg(long)]
    pub moments: Option<PathBuf>,
    /// Half-degree d: moments up to degree 2d are used.
    #[arg(long)]
    pub degree: u32,
    /// Target atom count (default: degree).
    #[arg(long)]
    pub k: Option<usize>,
    /// Moment tolerance (default: auto-calibrated).
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, value_name = "BOX")]
    pub bounds: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Atom-count range `lo..hi`.
    #[arg(long, default_value = "1..4")]
    pub k: String,
    /// Degree range `lo..hi`.
    #[arg(long, default_value = "2..5")]
    pub d: String,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Noise levels, comma separated (noisy-sweep only).
    #[arg(long, default_value = "1e-1,1e-3,1e-5")]
    pub noise: String,
    /// Directory for CSV/JSONL outputs.
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn parse_bounds(spec: &Option<String>, n: usize) -> Result<Vec<(f64, f64)>, String> {
    match spec {
        None => Ok(vec![(-1.0, 1.0); n]),
        Some(s) => {
            let mut out = Vec::new();
            for part in s.split(';') {
                let nums: Vec<&str> = part.split(',').collect();
                if nums.len() != 2 {
                    return Err(format!("bad box segment {part:?}, want lo,hi"));
                }
                let lo: f64 = nums[0].trim().parse().map_err(|e| format!("{e}"))?;
                let hi: f64 = nums[1].trim().parse().map_err(|e| format!("{e}"))?;
                out.push((lo, hi));
            }
            if out.len() == 1 && n > 1 {
                return Ok(vec![out[0]; n]);
            }
            if out.len() != n {
                return Err(format!("box has {} segments, need {n}", out.len()));
            }
            Ok(out)
        }
    }
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let parts: Vec<&str> = s.split("..").collect();
    if parts.len() != 2 {
        return Err(format!("bad range {s:?}, want lo..hi"));
    }
    let lo = parts[0].parse().map_err(|e| format!("{e}"))?;
    let hi = parts[1].parse().map_err(|e| format!("{e}"))?;
    Ok((lo, hi))
}

fn emit<T: Serialize>(value: &T, out: &Option<PathBuf>) -> Result<(), (i32, String)> {
    let text = formats::to_json_string(value).map_err(|e| (EXIT_ERROR, e.to_string()))?;
    match out {
        Some(path) => std::fs::write(path, text + "\n").map_err(|e| (EXIT_ERROR, e.to_string())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn read_points(path: &Path) -> Result<PointSet, (i32, String)> {
    let file: MeasureFile = formats::read_json(path).map_err(|e| (EXIT_ERROR, e.to_string()))?;
    let pts: Vec<Vec<f64>> = file.atoms.iter().map(|a| a.point.clone()).collect();
    PointSet::new(file.n, pts).map_err(|e| match e {
        points::PointSetError::Duplicate(_, _) => (EXIT_DUPLICATE, e.to_string()),
        _ => (EXIT_ERROR, e.to_string()),
    })
}

/// Run a parsed command line; returns the exit code.
pub fn run(cli: Cli) -> i32 {
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), (i32, String)> {
    let mut opts = RecoveryOptions {
        solver: SolveOptions {
            tol: cli.tol,
            max_iter: cli.max_iter,
            ..Default::default()
        },
        ..Default::default()
    };
    opts.grid_per_axis = cli.grid;
    match cli.command {
        Command::Moments(args) => cmd_moments(args, cli.seed),
        Command::Recover(args) => cmd_recover(args, &opts),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Certify(args) => cmd_certify(args, cli.grid),
        Command::Summarize(args) => cmd_summarize(args, &opts),
        Command::Experiment(args) => cmd_experiment(args, cli.seed, &opts),
    }
}

fn cmd_moments(args: MomentsArgs, seed: u64) -> Result<(), (i32, String)> {
    let build_basis = |n: usize, bounds: Vec<(f64, f64)>| -> Result<PolyBasis, (i32, String)> {
        let r = match args.basis {
            BasisArg::Monomial => PolyBasis::monomial_on(n, args.degree, bounds),
            BasisArg::Orthonormal => PolyBasis::orthonormalize(n, args.degree, bounds),
        };
        r.map_err(|e| (EXIT_ERROR, e.to_string()))
    };
    let (basis, mut values) = if let Some(path) = &args.measure {
        let file: MeasureFile =
            formats::read_json(path).map_err(|e| (EXIT_ERROR, e.to_string()))?;
        let mu = file.to_measure().map_err(|e| (EXIT_ERROR, e.to_string()))?;
        let bounds = parse_bounds(&args.bounds, mu.n).map_err(|e| (EXIT_ERROR, e))?;
        let basis = build_basis(mu.n, bounds)?;
        let values = mu
            .moments(&basis)
            .map_err(|e| (EXIT_ERROR, e.to_string()))?;
        (basis, values)
    } else if let Some(density) = args.density {
        let bounds = parse_bounds(&args.bounds, 1).map_err(|e| (EXIT_ERROR, e))?;
        let n = bounds.len();
        let basis = build_basis(n, bounds)?;
        let values =
            box_moments(&basis, density.into()).map_err(|e| (EXIT_ERROR, e.to_string()))?;
        (basis, values)
    } else {
        return Err((
            EXIT_ERROR,
            "one of --measure or --density is required".into(),
        ));
    };
    let mut delta = 0.0;
    if let Some(sigma) = args.noise {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, sigma.max(1e-300)).map_err(|e| (EXIT_ERROR, e.to_string()))?;
        let noise: Vec<f64> = (0..values.len()).map(|_| normal.sample(&mut rng)).collect();
        delta = noise.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (v, e) in values.iter_mut().zip(&noise) {
            *v += e;
        }
    }
    let data = MomentData::new(
        Arc::new(basis),
        values,
        delta,
        if delta == 0.0 {
            Provenance::Exact
        } else {
            Provenance::Noisy
        },
    )
    .map_err(|e| (EXIT_ERROR, e.to_string()))?;
    emit(&MomentFile::from_data(&data), &args.out)
}

#[derive(Serialize)]
struct RecoverJsonReport {
    mode: String,
    success: bool,
    sdp_status: crate::conic::SolveStatus,
    sdp_objective: f64,
    moment_residual: f64,
    weight_residual: f64,
    grid_min: f64,
    grid_max: f64,
    hstar: Vec<(Vec<u32>, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    level: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    feasibility_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagnostics: Option<certify::RecoveryDiagnostics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    failure: Option<String>,
}

fn cmd_recover(args: RecoverArgs, opts: &RecoveryOptions) -> Result<(), (i32, String)> {
    let file: MomentFile =
        formats::read_json(&args.moments).map_err(|e| (EXIT_ERROR, e.to_string()))?;
    let y = file.to_data().map_err(|e| (EXIT_ERROR, e.to_string()))?;
    let truth = match &args.truth {
        Some(path) => {
            let f: MeasureFile =
                formats::read_json(path).map_err(|e| (EXIT_ERROR, e.to_string()))?;
            Some(f.to_measure().map_err(|e| (EXIT_ERROR, e.to_string()))?)
        }
        None => None,
    };
    let half = args.degree.unwrap_or(file.degree / 2);
    let bounds: Vec<(f64, f64)> = file.bounds.iter().map(|&[a, b]| (a, b)).collect();

    let (report, level_alpha, feas) = match args.mode {
        ModeArg::Exact => {
            if file.delta != 0.0 {
                return Err((
                    EXIT_ERROR,
                    format!("exact mode requires delta = 0, file has {}", file.delta),
                ));
            }
            let rep = recovery::recover_exact(&y, half, opts).map_err(map_recovery_err)?;
            (rep, None, None)
        }
        ModeArg::Noisy => {
            let domain = SemialgebraicDomain::box_domain(bounds.clone());
            let level = args.level.unwrap_or_else(|| blasso::default_level(file.degree));
            let rep = blasso::recover_noisy(&y, file.delta, &domain, half, level, opts)
                .map_err(map_blasso_err)?;
            (
                rep.report,
                Some((level, rep.dual.alpha)),
                Some(rep.feasibility_residual),
            )
        }
    };

    let diagnostics = truth.as_ref().and_then(|mu| {
        let pts = PointSet::new(mu.n, mu.atoms.iter().map(|(p, _)| p.clone()).collect()).ok()?;
        let (_, gens, gmax) = points::generator_degrees(&pts);
        if 2 * gmax > file.degree {
            return None;
        }
        let gen_polys: Vec<_> = gens.into_iter().map(|g| g.poly).collect();
        let w = certify::chebyshev_witness(
            &pts,
            &bounds,
            &gen_polys,
            2,
            file.degree,
            &CertifyOptions::default(),
        )
        .ok()?;
        Some(certify::diagnose(
            &report.measure.atoms,
            mu,
            file.delta,
            &w,
            &bounds,
        ))
    });

    let json = RecoverJsonReport {
        mode: format!("{:?}", args.mode).to_lowercase(),
        success: report.success,
        sdp_status: report.sdp_status,
        sdp_objective: report.sdp_objective,
        moment_residual: report.moment_residual,
        weight_residual: report.weight_residual,
        grid_min: report.grid_min,
        grid_max: report.grid_max,
        hstar: report
            .hstar
            .terms()
            .map(|(e, c)| (e.clone(), *c))
            .collect(),
        level: level_alpha.map(|(l, _)| l),
        alpha: level_alpha.map(|(_, a)| a),
        feasibility_residual: feas,
        diagnostics,
        failure: report.failure.clone(),
    };
    if let Some(path) = &args.report {
        formats::write_json(path, &json).map_err(|e| (EXIT_ERROR, e.to_string()))?;
    }
    emit(&MeasureFile::from_measure(&report.measure), &args.out)?;
    if !report.success {
        return Err((
            EXIT_EXTRACTION,
            report
                .failure
                .unwrap_or_else(|| "recovery reported failure".into()),
        ));
    }
    Ok(())
}

fn map_recovery_err(e: recovery::RecoveryError) -> (i32, String) {
    use recovery::RecoveryError::*;
    let code = match &e {
        Solver(_) | Conic(_) => EXIT_SOLVER,
        NoSupport | AllPruned => EXIT_EXTRACTION,
        _ => EXIT_ERROR,
    };
    (code, e.to_string())
}

fn map_blasso_err(e: blasso::BlassoError) -> (i32, String) {
    use blasso::BlassoError::*;
    let code = match &e {
        Solver(_) | Conic(_) => EXIT_SOLVER,
        ZeroCertificate => EXIT_EXTRACTION,
        Recovery(inner) => return map_recovery_err_ref(inner),
        _ => EXIT_ERROR,
    };
    (code, e.to_string())
}

fn map_recovery_err_ref(e: &recovery::RecoveryError) -> (i32, String) {
    use recovery::RecoveryError::*;
    let code = match e {
        Solver(_) | Conic(_) => EXIT_SOLVER,
        NoSupport | AllPruned => EXIT_EXTRACTION,
        _ => EXIT_ERROR,
    };
    (code, e.to_string())
}

#[derive(Serialize)]
struct AnalyzeJson {
    n: usize,
    k: usize,
    hilbert: Vec<usize>,
    interpolation_degree: u32,
    regularity: u32,
    generator_degrees: Vec<(u32, usize)>,
    max_generator_degree: u32,
    singular_degree: u32,
    safe_degree: u32,
    theorem_degree: u32,
    generic_upper: u32,
    generic_lower: u32,
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), (i32, String)> {
    let pts = read_points(&args.points)?;
    let profile = points::analyze(&pts);
    let (upper, lower) = points::generic_bounds(pts.dimension(), pts.len());
    let json = AnalyzeJson {
        n: pts.dimension(),
        k: profile.k,
        hilbert: profile.hilbert,
        interpolation_degree: profile.interpolation_degree,
        regularity: profile.regularity,
        generator_degrees: profile.generator_degrees,
        max_generator_degree: profile.max_generator_degree,
        singular_degree: profile.singular_degree,
        safe_degree: profile.safe_degree,
        theorem_degree: profile.theorem_degree,
        generic_upper: upper,
        generic_lower: lower,
    };
    emit(&json, &args.out)
}

#[derive(Serialize)]
struct CertifyJson {
    kind: certify::WitnessKind,
    c_a: f64,
    c_b: f64,
    c0: f64,
    c0_published: f64,
    s: usize,
    d_const: f64,
    d1_const: f64,
    eta: f64,
    sup_norms: Vec<f64>,
    sup_norm_ok: bool,
    one_on_x_ok: bool,
    qic_ok: bool,
    witness: Vec<(Vec<u32>, f64)>,
}

fn cmd_certify(args: CertifyArgs, grid: Option<usize>) -> Result<(), (i32, String)> {
    let pts = read_points(&args.points)?;
    let bounds = parse_bounds(&args.bounds, pts.dimension()).map_err(|e| (EXIT_ERROR, e))?;
    let (_, gens, gmax) = points::generator_degrees(&pts);
    let gen_polys: Vec<_> = gens.into_iter().map(|g| g.poly).collect();
    let copts = CertifyOptions {
        grid_per_axis: grid.unwrap_or(200),
    };
    let witness = match args.m {
        Some(m) => {
            let budget = args.degree.unwrap_or(2 * (m - 1) * gmax);
            certify::chebyshev_witness(&pts, &bounds, &gen_polys, m, budget, &copts)
        }
        None => certify::sos_witness(&pts, &bounds, &gen_polys, &copts),
    }
    .map_err(|e| (EXIT_ERROR, e.to_string()))?;
    let json = CertifyJson {
        kind: witness.kind,
        c_a: witness.c_a,
        c_b: witness.c_b,
        c0: witness.c0,
        c0_published: witness.c0_published,
        s: witness.s,
        d_const: witness.d_const,
        d1_const: witness.d1_const,
        eta: witness.eta,
        sup_norms: witness.sup_norms.clone(),
        sup_norm_ok: witness.sup_norm_ok,
        one_on_x_ok: witness.one_on_x_ok,
        qic_ok: witness.qic_ok,
        witness: witness.poly.terms().map(|(e, c)| (e.clone(), *c)).collect(),
    };
    emit(&json, &args.out)
}

#[derive(Serialize)]
struct SummaryJson {
    atoms: Vec<formats::AtomRecord>,
    requested_delta: f64,
    achieved_delta: f64,
    truncated_mass: f64,
    untruncated_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    flag: Option<String>,
}

fn cmd_summarize(args: SummarizeArgs, opts: &RecoveryOptions) -> Result<(), (i32, String)> {
    let source = if let Some(d) = args.density {
        SummarySource::Density(d.into())
    } else if let Some(path) = &args.moments {
        let file: MomentFile =
            formats::read_json(path).map_err(|e| (EXIT_ERROR, e.to_string()))?;
        if file.degree < 2 * args.degree {
            return Err((
                EXIT_ERROR,
                format!(
                    "moment file degree {} cannot support half-degree {}",
                    file.degree, args.degree
                ),
            ));
        }
        SummarySource::Moments(file.to_data().map_err(|e| (EXIT_ERROR, e.to_string()))?)
    } else {
        return Err((
            EXIT_ERROR,
            "one of --density or --moments is required".into(),
        ));
    };
    let n = match &source {
        SummarySource::Density(_) => parse_bounds(&args.bounds, 1)
            .map_err(|e| (EXIT_ERROR, e))?
            .len(),
        SummarySource::Moments(m) => m.basis.dimension(),
    };
    let bounds = match &source {
        SummarySource::Moments(m) => m.basis.bounds().to_vec(),
        _ => parse_bounds(&args.bounds, n).map_err(|e| (EXIT_ERROR, e))?,
    };
    let domain = SemialgebraicDomain::box_domain(bounds);
    let spec = SummarySpec {
        source,
        degree: args.degree,
        k: args.k.unwrap_or(args.degree as usize),
        delta: args.delta,
    };
    let rep = summarize(&spec, &domain, opts).map_err(|e| (EXIT_ERROR, e.to_string()))?;
    let json = SummaryJson {
        atoms: rep
            .outcome
            .summary
            .atoms
            .iter()
            .map(|(p, w)| formats::AtomRecord {
                point: p.clone(),
                weight: *w,
            })
            .collect(),
        requested_delta: rep.outcome.requested_delta,
        achieved_delta: rep.outcome.achieved_delta,
        truncated_mass: rep.outcome.truncated_mass,
        untruncated_residual: rep.outcome.untruncated_residual,
        alpha: rep.alpha,
        flag: rep.outcome.flag.clone(),
    };
    emit(&json, &args.out)?;
    if rep
        .outcome
        .flag
        .as_deref()
        .map(|f| f.contains(crate::summarize::NON_DISCRETE_FLAG))
        .unwrap_or(false)
    {
        return Err((
            EXIT_EXTRACTION,
            rep.outcome.flag.unwrap_or_default(),
        ));
    }
    Ok(())
}

fn cmd_experiment(
    args: ExperimentArgs,
    seed: u64,
    opts: &RecoveryOptions,
) -> Result<(), (i32, String)> {
    let (k_lo, k_hi) = parse_range(&args.k).map_err(|e| (EXIT_ERROR, e))?;
    let (d_lo, d_hi) = parse_range(&args.d).map_err(|e| (EXIT_ERROR, e))?;
    let noise: Vec<f64> = args
        .noise
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| (EXIT_ERROR, e.to_string()))?;
    let kind = match args.kind {
        KindArg::ExactHeatmap => ExperimentKind::ExactHeatmap,
        KindArg::NoisySweep => ExperimentKind::NoisySweep,
        KindArg::SummaryGallery => ExperimentKind::SummaryGallery,
    };
    let plan = ExperimentPlan {
        kind,
        n: args.n,
        k_range: (k_lo, k_hi),
        d_range: (d_lo as u32, d_hi as u32),
        trials: args.trials,
        noise_levels: noise,
        seed,
        theta_success: 1e-3,
    };
    let out = harness::run_experiment(&plan, opts);
    std::fs::create_dir_all(&args.out_dir).map_err(|e| (EXIT_ERROR, e.to_string()))?;
    for (name, contents) in &out.files {
        std::fs::write(args.out_dir.join(name), contents)
            .map_err(|e| (EXIT_ERROR, e.to_string()))?;
        eprintln!("wrote {}", args.out_dir.join(name).display());
    }
    Ok(())
}
