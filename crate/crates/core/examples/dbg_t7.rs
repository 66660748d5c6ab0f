use std::sync::Arc;
use spikesolve::basis::PolyBasis;
use spikesolve::conic::SolveOptions;
use spikesolve::harness;
use spikesolve::recovery::*;

fn main() {
    let bounds = vec![(-1.0, 1.0)];
    for seed in [20_007u64, 20_017] {
        let mu = harness::random_measure(1, 4, &bounds, seed);
        let basis = Arc::new(PolyBasis::monomial_on(1, 8, bounds.clone()).unwrap());
        let y = MomentData::new(basis.clone(), mu.moments(&basis).unwrap(), 0.0, Provenance::Exact).unwrap();
        for tol in [1e-9, 1e-11, 1e-12] {
            let opts = RecoveryOptions {
                grid_per_axis: Some(1600),
                solver: SolveOptions { tol, ..Default::default() },
                ..Default::default()
            };
            let rep = recover_exact(&y, 4, &opts).unwrap();
            println!(
                "seed {seed} tol {tol:.0e}: atoms={} cand={} resid={:.2e} obj={:.2e} dist={:.2e}",
                rep.measure.atoms.len(), rep.candidates, rep.moment_residual, rep.sdp_objective,
                rep.measure.support_distance(&mu).max(mu.support_distance(&rep.measure)),
            );
        }
    }
}
