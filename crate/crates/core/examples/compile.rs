//! Replace the quantum message of small quantum-classical protocols by the
//! deterministic state-learning record and compare exact errors.
//!
//! cargo run --release --example compile -- [delta]

use smp_lab::protocols::fixtures::{random_qc_fixture, toy_qc_equality, toy_qc_equality_public, QcFixture};
use smp_lab::smp::{exact_acceptance, SmpProtocol};
use smp_lab::transforms::compile_qc_to_cc;

fn report(fx: &QcFixture, delta: f64) -> Result<(), Box<dyn std::error::Error>> {
    let compiled = compile_qc_to_cc(&fx.protocol, &fx.xs, delta, None)?;
    let mut worst_increase = f64::NEG_INFINITY;
    for (i, x) in fx.xs.iter().enumerate() {
        for (j, y) in fx.ys.iter().enumerate() {
            let v = fx.function.value(i, j)? as f64;
            let before = (v - exact_acceptance(&fx.protocol, x, y)?).abs();
            let after = (v - exact_acceptance(&compiled, x, y)?).abs();
            worst_increase = worst_increase.max(after - before);
        }
    }
    let bad = compiled.diagnostics().iter().map(|d| d.bad_count).max().unwrap_or(0);
    println!("{}", compiled.name());
    println!("  original worst-case error {:.6}", fx.worst_case_error()?);
    println!("  classical message {} bits, max bad steps {bad}", compiled.cost().alice.amount());
    println!("  worst error increase {worst_increase:.3e} (allowed {delta})");
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let delta: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0.1);
    report(&toy_qc_equality()?, delta)?;
    report(&toy_qc_equality_public()?, delta)?;
    report(&random_qc_fixture(3, 2, 2, 2)?, delta)?;
    Ok(())
}
