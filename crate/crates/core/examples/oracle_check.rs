//! Checks the permanent formula against a brute-force Fock-space simulation
//! on random circuits and random internal states, then prints the full
//! output distribution of a small instance.
//!
//! Run with `cargo run --example oracle_check [instances]`.

use bunchlab::cli::random_oracle_instance;
use bunchlab::distinguishability::bunching_probability;
use bunchlab::interferometry::h_matrix;
use bunchlab::oracle::{fock_bunching_oracle, output_distribution};

fn main() -> bunchlab::Result<()> {
    let count: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let mut worst = 0.0f64;
    for seed in 0..count {
        let n = 1 + (seed % 3) as usize;
        let m = n + 1 + (seed % 2) as usize;
        let (u, subset, states) = random_oracle_instance(n, m, seed)?;
        let fock = fock_bunching_oracle(&u, &subset, &states)?;
        let setup = h_matrix(&u, &subset, n)?;
        let formula = bunching_probability(&setup.h, &states.gram()?)?;
        worst = worst.max((fock - formula).abs());
    }
    println!("{count} random instances, largest disagreement {worst:.2e}");

    let (u, _, states) = random_oracle_instance(3, 3, 42)?;
    println!("output distribution, 3 photons in 3 modes:");
    let mut total = 0.0;
    for (occupation, p) in output_distribution(&u, &states)? {
        println!("  {occupation:?} {p:.6}");
        total += p;
    }
    println!("  total {total:.12}");
    Ok(())
}
