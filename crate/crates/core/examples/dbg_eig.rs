use std::sync::Arc;
use nalgebra::DMatrix;
use spikesolve::basis::PolyBasis;
use spikesolve::conic::{self, SolveOptions};
use spikesolve::harness;
use spikesolve::recovery::*;

fn main() {
    let bounds = vec![(-1.0, 1.0)];
    let mu = harness::random_measure(1, 4, &bounds, 20_007);
    let basis = Arc::new(PolyBasis::monomial_on(1, 8, bounds.clone()).unwrap());
    let y = MomentData::new(basis.clone(), mu.moments(&basis).unwrap(), 0.0, Provenance::Exact).unwrap();
    let m = DMatrix::from_fn(5, 5, |i, j| y.values[i + j]);
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let mut ev: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    ev.sort_by(f64::total_cmp);
    println!("eigenvalues of M(y): {ev:?}");
    let p = assemble_moment_sdp(&y, 4).unwrap();
    for tol in [1e-9, 1e-12] {
        let sol = conic::solve(&p, &SolveOptions { tol, ..Default::default() }).unwrap();
        println!(
            "tol {tol:.0e}: obj={:.3e} dual={:.3e} status={:?} iters={} res=({:.1e},{:.1e},{:.1e})",
            sol.primal_obj, sol.dual_obj, sol.status, sol.iterations,
            sol.residuals.primal, sol.residuals.dual, sol.residuals.gap
        );
    }
}
