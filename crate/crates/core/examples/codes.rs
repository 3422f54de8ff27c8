//! Hadamard, repetition, random and Booleanizing codes with their
//! brute-force minimum distances and the grid view of a codeword.
//!
//! cargo run --release --example codes

use smp_lab::codes::LinearCode;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for n in 1..=6 {
        let h = LinearCode::hadamard(n);
        println!("hadamard n={n}: m={} d={} grid {:?}", h.m(), h.min_distance_bruteforce()?, h.grid());
    }
    let rand = LinearCode::random(4, 12, 9);
    println!("random 4->12: d={}", rand.min_distance_bruteforce()?);
    for k in 1..=6 {
        let g = LinearCode::booleanizer(k, 1)?;
        println!("booleanizer k={k}: m={} relative distance {:.3}", g.m(), g.relative_distance()?);
    }
    let h = LinearCode::hadamard(2);
    let word = h.encode_u64(0b01);
    let (rows, cols) = h.grid();
    for r in 0..rows {
        let row: Vec<u8> = (0..cols).map(|c| h.grid_cell(&word, r, c).map(|b| b as u8)).collect::<Result<_, _>>()?;
        println!("  {row:?}");
    }
    Ok(())
}
