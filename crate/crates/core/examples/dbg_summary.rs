use spikesolve::basis::Weight;
use spikesolve::blasso::SemialgebraicDomain;
use spikesolve::recovery::RecoveryOptions;
use spikesolve::summarize::*;

fn main() {
    let domain = SemialgebraicDomain::box_domain(vec![(-1.0, 1.0)]);
    let spec = SummarySpec {
        source: SummarySource::Density(Weight::Uniform),
        degree: 2,
        k: 2,
        delta: None,
    };
    let rep = summarize(&spec, &domain, &RecoveryOptions::default()).unwrap();
    println!("atoms: {:?}", rep.outcome.summary.atoms);
    println!("achieved={:.4e} untrunc={:.4e} flag={:?}",
        rep.outcome.achieved_delta, rep.outcome.untruncated_residual, rep.outcome.flag);
    if let Some(r) = &rep.recovery {
        println!("candidates={} atoms_inner={:?} success={} fail={:?}",
            r.candidates, r.measure.atoms, r.success, r.failure);
    }
    println!("alpha={:?}", rep.alpha);
}
