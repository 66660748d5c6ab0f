use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spikesolve::blasso::*;
use spikesolve::recovery::*;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mu = DiscreteMeasure::new(
        1,
        vec![(vec![-0.55], 0.4), (vec![0.1], 0.3), (vec![0.7], 0.3)],
    );
    let d = 8u32;
    let clean = orthonormal_moments(&mu, d, vec![(-1.0, 1.0)]).unwrap();
    let noise: Vec<f64> = (0..clean.values.len())
        .map(|_| 1e-5 * rng.gen_range(-1.0..1.0))
        .collect();
    let delta = noise.iter().map(|v| v * v).sum::<f64>().sqrt();
    let values: Vec<f64> = clean.values.iter().zip(&noise).map(|(a, b)| a + b).collect();
    let y = MomentData::new(clean.basis.clone(), values, delta, Provenance::Noisy).unwrap();
    let dom = SemialgebraicDomain::box_domain(vec![(-1.0, 1.0)]);
    let opts = RecoveryOptions::default();
    let duals = solve_hierarchy(&y, delta, &dom, &[8], &opts.solver).unwrap();
    let dual = &duals[0];
    println!("alpha = {:.9}, b = {:.6}, residuals {:?}", dual.alpha, dual.b, dual.residuals);
    println!("mu tv = {}", mu.tv());
    // where does P* touch +-1?
    for i in 0..=200 {
        let x = -1.0 + 2.0 * i as f64 / 200.0;
        let v = dual.certificate.eval(&[x]).unwrap();
        if v > 0.9995 {
            println!("  P*({x:.3}) = {v:.7}");
        }
    }
    let rep = extract_measure(dual, &y, delta, 4, &opts).unwrap();
    println!("atoms:");
    for (p, w) in &rep.report.measure.atoms {
        println!("  {:.6} w={:.6}", p[0], w);
    }
    println!("candidates={} resid_vs_lstar={:.3e} feas={:.3e} tv={:.6}",
        rep.report.candidates, rep.report.moment_residual, rep.feasibility_residual, rep.tv);
    println!("grid_min={:.3e} grid_max={:.3e} sdp_obj={:.3e}", rep.report.grid_min, rep.report.grid_max, rep.report.sdp_objective);
}
