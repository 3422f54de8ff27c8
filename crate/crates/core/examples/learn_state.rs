//! Deterministic state-learning messages for random states and measurement
//! families: record length, the bad-count bound, and the worst estimate error.
//!
//! cargo run --release --example learn_state -- [instances] [delta]

use std::time::Instant;

use smp_lab::qcore::acceptance_probability;
use smp_lab::qcore::random::{random_density, random_measurement};
use smp_lab::rng::stream_rng;
use smp_lab::transforms::{bad_count_bound, default_copies, learn_state_message, reconstruct_estimates, LearnConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let instances: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(50);
    let delta: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.1);
    let budget = LearnConfig::default().qubit_budget;

    println!(
        "{:>4} {:>2} {:>2} {:>3} {:>3} {:>5} {:>6} {:>9} {:>9}",
        "inst", "q", "c", "r", "T", "bound", "bits", "max_err", "max_MB"
    );
    let start = Instant::now();
    for i in 0..instances {
        let mut rng = stream_rng(7, i);
        let q = 1 + (i % 2) as u32;
        let c = 2 + ((i / 2) % 2) as usize;
        let r = default_copies(q, delta, budget);
        let rho = random_density(q, &mut rng);
        let family: Vec<_> = (0..1usize << c).map(|_| random_measurement(q, &mut rng)).collect();

        let out = learn_state_message(&rho, &family, delta, r)?;
        let est = reconstruct_estimates(&out.record, &family, q)?;
        let mut max_err: f64 = 0.0;
        for (e, p_prime) in family.iter().zip(&est) {
            max_err = max_err.max((acceptance_probability(e, &rho)? - p_prime).abs());
        }
        println!(
            "{i:>4} {q:>2} {c:>2} {r:>3} {:>3} {:>5} {:>6} {max_err:>9.2e} {:>9.4}",
            out.bad_count(),
            bad_count_bound(q * r as u32, delta),
            out.record.payload_bits(),
            out.max_band_weight().unwrap_or(0.0),
        );
    }
    println!("elapsed {:.2?}", start.elapsed());
    Ok(())
}
