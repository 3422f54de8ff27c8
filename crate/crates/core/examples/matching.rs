//! Success rate of the quantum-classical and classical matching protocols
//! on random promise instances.
//!
//! cargo run --release --example matching -- [n] [trials]

use smp_lab::protocols::{
    default_classical_subset, matching_classical, matching_qc, matching_value, random_promise_instance,
    MatchingQcParams,
};
use smp_lab::rng::stream_rng;
use smp_lab::smp::{protocol_cost, sampled_success, SmpError, SmpProtocol};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(64);
    let trials: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(2000);

    let mut rng = stream_rng(2024, 0);
    let instances = (0..20).map(|i| random_promise_instance(n, i % 2 == 0, &mut rng)).collect::<Result<Vec<_>, _>>()?;
    let cases = instances
        .iter()
        .map(|inst| Ok((&inst.x, &inst.bob, matching_value(inst)?)))
        .collect::<Result<Vec<_>, SmpError>>()?;

    let qc = matching_qc(n, MatchingQcParams::defaults(n))?;
    let est = sampled_success(&qc, &cases, trials, 1)?;
    let (a, b, _) = protocol_cost(&qc);
    println!("{}: alice {a}, bob {b} bits", qc.name());
    println!("  success {:.4}  95% CI [{:.4}, {:.4}]", est.estimate, est.lower, est.upper);

    let cl = matching_classical(n, default_classical_subset(n))?;
    let est = sampled_success(&cl, &cases, trials, 1)?;
    let (a, b, _) = protocol_cost(&cl);
    println!("{}: alice {a}, bob {b} bits", cl.name());
    println!("  success {:.4}  95% CI [{:.4}, {:.4}]", est.estimate, est.lower, est.upper);
    Ok(())
}
