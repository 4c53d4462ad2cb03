//! Builds the 8-photon, 10-mode circuit from Drury's 8×8 matrix and shows
//! that perm(H) is not the top eigenvalue of the cofactor matrix F.
//!
//! Run with `cargo run --example drury_counterexample [seed]`.

use bunchlab::conjectures::check_m2;
use bunchlab::distinguishability::optimal_directions;
use bunchlab::interferometry::{drury_gram, drury_setup};

fn main() -> bunchlab::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let drury = drury_setup(seed)?;
    let setup = &drury.setup;
    println!(
        "modes {}, photons {}, outputs {:?}, alpha {:.6e}",
        setup.interferometer.modes(),
        setup.n,
        setup.subset,
        drury.alpha
    );
    println!("unitarity defect {:.2e}", setup.interferometer.unitary().unitarity_defect());

    let scaled = drury_gram().scale(drury.alpha.into());
    println!("|H - alpha A|_max = {:.2e}", setup.h.max_abs_diff(&scaled));

    let dirs = optimal_directions(&setup.h)?;
    println!("perm(H)        = {:.6e}", dirs.perm_h);
    println!("lambda_max(F)  = {:.6e}", dirs.lambda_max);
    println!("lambda_min(F)  = {:.6e}", dirs.lambda_min);
    println!("ratio          = {:.6}", dirs.lambda_max / dirs.perm_h);

    let verdict = check_m2(&drury_gram())?;
    println!("M2 on the unscaled matrix: ratio {:.6}, violated {}", verdict.ratio, verdict.violated);

    println!("v_max:");
    for (i, z) in dirs.v_max.iter().enumerate() {
        println!("  {i}: {:+.6} {:+.6}i", z.re, z.im);
    }
    Ok(())
}
