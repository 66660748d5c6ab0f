use std::sync::Arc;
use spikesolve::basis::PolyBasis;
use spikesolve::harness;
use spikesolve::recovery::*;

fn main() {
    let bounds = vec![(-1.0, 1.0)];
    let mu = harness::random_measure(1, 4, &bounds, 20_017);
    let basis = Arc::new(PolyBasis::monomial_on(1, 8, bounds.clone()).unwrap());
    let y = MomentData::new(basis.clone(), mu.moments(&basis).unwrap(), 0.0, Provenance::Exact).unwrap();
    println!("truth: {:?}", mu.atoms);
    // start from the merged 3-atom configuration seen in the pipeline
    let mut atoms = vec![
        (vec![-0.09169109241011356], 0.4693534021334249),
        (vec![-0.2511860549969117], 0.26594166203990566),
        (vec![-0.17741397326471664], 0.26470493582653887),
    ];
    let r0 = moment_polish(&mut atoms, &y, &bounds, 40);
    println!("3-atom polished residual {r0:.3e}");
    // split atom 0
    let mut trial = atoms.clone();
    let (p, w) = trial[0].clone();
    trial[0] = (vec![p[0] - 0.01], w / 2.0);
    trial.push((vec![p[0] + 0.01], w / 2.0));
    for iters in [40, 200] {
        let mut t = trial.clone();
        let r = moment_polish(&mut t, &y, &bounds, iters);
        println!("split polish iters={iters}: residual {r:.3e}");
        if iters == 200 { for a in &t { println!("  atom {:?} w={:.4}", a.0, a.1); } }
    }
}
