use std::sync::Arc;
use spikesolve::basis::PolyBasis;
use spikesolve::harness;
use spikesolve::recovery::*;

fn main() {
    let opts = RecoveryOptions::default();
    let bounds = vec![(-1.0, 1.0)];
    for trial in 0..20u64 {
        let mu = harness::random_measure(1, 4, &bounds, 20_000 + trial);
        let basis = Arc::new(PolyBasis::monomial_on(1, 8, bounds.clone()).unwrap());
        let y = MomentData::new(basis.clone(), mu.moments(&basis).unwrap(), 0.0, Provenance::Exact).unwrap();
        let rep = recover_exact(&y, 4, &opts).unwrap();
        let mut pts: Vec<f64> = mu.atoms.iter().map(|(p, _)| p[0]).collect();
        pts.sort_by(f64::total_cmp);
        let sep = pts.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        let dist = rep.measure.support_distance(&mu).max(mu.support_distance(&rep.measure));
        let wmatch = rep.measure.atoms.len() == 4;
        println!(
            "trial {trial}: sep={sep:.4} atoms={} dist={:.2e} resid={:.2e} success={} obj={:.2e}",
            rep.measure.atoms.len(), dist, rep.moment_residual, rep.success, rep.sdp_objective
        );
        if !wmatch || dist > 1e-3 {
            println!("   truth: {pts:?}");
            println!("   rec:   {:?}", rep.measure.atoms);
        }
    }
}
