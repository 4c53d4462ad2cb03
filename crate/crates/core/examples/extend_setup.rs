//! Feeds the bunching outputs of the Drury circuit into a second random
//! interferometer together with fresh vacuum modes. H for the enlarged
//! output set is unchanged, so the enhancement survives.
//!
//! Run with `cargo run --release --example extend_setup [second_modes]`.

use bunchlab::distinguishability::{default_grid, epsilon_scan, optimal_directions};
use bunchlab::interferometry::{drury_setup, extend_counterexample, Interferometer};
use bunchlab::GramMatrix;

fn main() -> bunchlab::Result<()> {
    let m2: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(6);
    let base = drury_setup(0)?.setup;
    let second = Interferometer::random(m2, 7);
    let big = extend_counterexample(&base, &second, 0)?;
    println!(
        "composite circuit: {} modes, {} bunching outputs",
        big.interferometer.modes(),
        big.subset.len()
    );
    println!("|H' - H|_max = {:.2e}", big.h.max_abs_diff(&base.h));

    let v = optimal_directions(&base.h)?.v_max;
    let ones = GramMatrix::ones(base.n);
    let a = epsilon_scan(&base.h, &v, &ones, &default_grid())?;
    let b = epsilon_scan(&big.h, &v, &ones, &default_grid())?;
    println!("peak ratio: base {:.6}, composite {:.6}", a.peak().ratio, b.peak().ratio);
    Ok(())
}
