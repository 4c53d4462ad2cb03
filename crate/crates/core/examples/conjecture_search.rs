//! Random search for violations of the permanental eigenvalue conjecture
//! among low-rank p.s.d. matrices A = G†G.
//!
//! Random instances essentially never violate it; the known counterexample
//! is injected to show what a hit looks like.
//!
//! Run with `cargo run --release --example conjecture_search [n] [trials] [seed]`.

use bunchlab::conjectures::ViolationSearch;
use bunchlab::interferometry::drury_gram;

fn main() -> bunchlab::Result<()> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<u64>().ok());
    let n = args.next().flatten().unwrap_or(6) as usize;
    let trials = args.next().flatten().unwrap_or(200) as usize;
    let seed = args.next().flatten().unwrap_or(0);

    let plain = ViolationSearch::new(n, trials, seed)?.run()?;
    println!(
        "n = {n}: {} trials, {} violations, largest ratio {:.9}",
        plain.trials, plain.violations, plain.max_ratio
    );

    let seeded = ViolationSearch::new(8, 20, seed)?.inject(drury_gram()).run()?;
    println!("n = 8 with the injected matrix: {} violation(s)", seeded.violations);
    for v in seeded.verdicts.iter().take(3) {
        println!("  {:<12} ratio {:.6} violated {}", v.witness, v.ratio, v.violated);
    }
    Ok(())
}
