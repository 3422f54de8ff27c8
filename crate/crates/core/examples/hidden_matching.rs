//! Exact output distribution of the hidden-matching protocol and the
//! probability that the referee's answer satisfies the relation.
//!
//! cargo run --release --example hidden_matching -- [n]

use smp_lab::protocols::HiddenMatching;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(4);
    let hm = HiddenMatching::new(n)?;
    println!("n={n}: {} qubits from Alice, {} bits from Bob", hm.index_bits(), hm.cost().bob_bits);
    let x = 0b0110u64 & ((1u64 << n) - 1);
    for (z, p) in hm.distribution(x, 1)? {
        println!("  x={x:0n$b} k=1: ({}, {}, {}) with probability {p:.4}", z.i, z.j, z.parity as u8);
    }
    let mut worst: f64 = 1.0;
    for x in 0..1u64 << n.min(16) {
        for k in 1..n {
            let ok: f64 = hm.distribution(x, k)?.iter().filter(|(z, _)| hm.is_valid(x, k, z)).map(|(_, p)| p).sum();
            worst = worst.min(ok);
        }
    }
    println!("minimum success over all inputs {worst}");
    Ok(())
}
