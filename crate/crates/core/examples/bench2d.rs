use std::sync::Arc;
use std::time::Instant;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spikesolve::basis::PolyBasis;
use spikesolve::recovery::*;

fn main() {
    let mut total = 0.0;
    for seed in 0..3u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Vec<f64>> = (0..4)
            .map(|_| vec![rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95)])
            .collect();
        let mu = DiscreteMeasure::new(2, pts.into_iter().map(|p| (p, 0.25)).collect());
        let basis = Arc::new(PolyBasis::monomial_on(2, 12, vec![(0.0, 1.0), (0.0, 1.0)]).unwrap());
        let vals = mu.moments(&basis).unwrap();
        let y = MomentData::new(basis, vals, 0.0, Provenance::Exact).unwrap();
        let t0 = Instant::now();
        let rep = recover_exact(&y, 6, &RecoveryOptions::default()).unwrap();
        let dt = t0.elapsed().as_secs_f64();
        total += dt;
        println!(
            "seed {seed}: {:.2}s success={} atoms={} maxdist={:.2e} obj={:.2e}",
            dt,
            rep.success,
            rep.measure.atoms.len(),
            rep.measure.support_distance(&mu).max(mu.support_distance(&rep.measure)),
            rep.sdp_objective
        );
    }
    println!("total {:.2}s", total);
}
