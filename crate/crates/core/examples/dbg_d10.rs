use std::time::Instant;
use spikesolve::basis::Weight;
use spikesolve::blasso::SemialgebraicDomain;
use spikesolve::recovery::RecoveryOptions;
use spikesolve::summarize::*;
use spikesolve::linalg::gauss_legendre;

fn main() {
    for d in [6u32, 10] {
        let domain = SemialgebraicDomain::box_domain(vec![(-1.0, 1.0)]);
        let spec = SummarySpec {
            source: SummarySource::Density(Weight::Uniform),
            degree: d,
            k: d as usize,
            delta: None,
        };
        let t0 = Instant::now();
        let rep = summarize(&spec, &domain, &RecoveryOptions::default()).unwrap();
        let mut nodes: Vec<f64> = rep.outcome.summary.atoms.iter().map(|(p, _)| p[0]).collect();
        nodes.sort_by(f64::total_cmp);
        let (gl, _) = gauss_legendre(d as usize);
        let err = nodes.iter().zip(&gl).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
        println!("d={d}: {:.1}s, {} nodes, max GL error {:.2e}", t0.elapsed().as_secs_f64(), nodes.len(), err);
    }
}
