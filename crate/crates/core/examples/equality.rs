//! Exact acceptance of the two Equality protocols: the public-coin
//! inner-product protocol and the private-coin code protocol.
//!
//! cargo run --release --example equality -- [n] [k] [reps]

use smp_lab::codes::LinearCode;
use smp_lab::protocols::{equality_code, equality_public};
use smp_lab::smp::{protocol_cost, worst_case_error, FunctionTable};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(4);
    let k: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(2);
    let reps: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(6);

    let f = FunctionTable::equality(n as u32);
    let inputs: Vec<u64> = (0..1u64 << n).collect();
    let refs: Vec<&u64> = inputs.iter().collect();

    let public = equality_public(n, k)?;
    let (a, b, total) = protocol_cost(&public);
    println!("{}: alice {a}, bob {b} bits, total {total}", smp_lab::smp::SmpProtocol::name(&public));
    println!("  worst-case error {}", worst_case_error(&public, &f, &refs, &refs)?);

    for r in 1..=reps {
        let code = equality_code(n, LinearCode::hadamard(n), r)?;
        let (a, b, _) = protocol_cost(&code);
        println!(
            "eq-code reps={r}: alice {a}, bob {b} bits, worst-case error {}",
            worst_case_error(&code, &f, &refs, &refs)?
        );
    }
    Ok(())
}
