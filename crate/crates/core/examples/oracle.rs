//! Brute-force ground truth: deterministic complexity of Equality, the
//! census of zero-error Alice maps, and the relation-to-function chain.
//!
//! cargo run --release --example oracle -- [toy instances]

use smp_lab::oracle::{alice_map_census, det_complexity_function, det_complexity_function_exhaustive, run_chain};
use smp_lab::smp::FunctionTable;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let instances: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(10);
    for n in 1..=3 {
        let eq = FunctionTable::equality(n);
        let (ca, cb) = det_complexity_function(&eq)?;
        let exhaustive = if n <= 2 { det_complexity_function_exhaustive(&eq)?.to_string() } else { "-".into() };
        let census = alice_map_census(&eq, 1 << n)?;
        println!(
            "equality n={n}: ({ca}, {cb}), exhaustive {exhaustive}, {} of {} maps are zero-error, all injective: {}",
            census.zero_error,
            census.maps,
            census.zero_error_implies_injective()
        );
    }
    println!(
        "{:>4} {:>8} {:>4} {:>4} {:>8} {:>8} {:>8} {:>6}",
        "seed", "err_b", "cost", "R(f)", "solve", "compute", "valid", "decode"
    );
    for seed in 0..instances {
        let r = run_chain(seed)?;
        println!(
            "{seed:>4} {:>8.4} {:>4} {:>4} {:>8.4} {:>8.4} {:>8.4} {:>6}",
            r.extraction_error,
            r.model_b_cost,
            r.f_complexity,
            r.union.solve_error,
            r.union.compute_error,
            r.union.validity_error,
            r.decoded_exactly && r.decodes_after_flips
        );
    }
    Ok(())
}
