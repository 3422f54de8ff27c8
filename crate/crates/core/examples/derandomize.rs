//! Fix Alice's private randomness in the code-based Equality protocol by a
//! verified multiset of messages per input.
//!
//! cargo run --release --example derandomize -- [n] [s] [seed]

use smp_lab::codes::LinearCode;
use smp_lab::protocols::equality_code;
use smp_lab::smp::{exact_acceptance, SmpProtocol};
use smp_lab::transforms::{derandomize_alice, DerandomizeConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(2);
    let s: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(12);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);

    let p = equality_code(n, LinearCode::hadamard(n), 1)?;
    let original = equality_code(n, LinearCode::hadamard(n), 1)?;
    let inputs: Vec<u64> = (0..1u64 << n).collect();
    let d = derandomize_alice(p, s, &inputs, &DerandomizeConfig { seed, ..Default::default() })?;
    println!("alice: {} -> {}", original.cost().alice, d.cost().alice);
    for (x, (dev, attempt)) in d.table().deviations.iter().zip(&d.table().attempts).enumerate() {
        println!("  x={x}: max_b deviation {dev:.4} (attempt {attempt})");
    }
    let mut worst: f64 = 0.0;
    for x in &inputs {
        for y in &inputs {
            let v = (x == y) as u8 as f64;
            let inc = (v - exact_acceptance(&d, x, y)?).abs() - (v - exact_acceptance(&original, x, y)?).abs();
            worst = worst.max(inc);
        }
    }
    println!("worst error increase {worst:.4}");
    Ok(())
}
