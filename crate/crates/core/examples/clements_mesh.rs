//! Decomposes a unitary into a rectangular mesh of two-mode couplers and
//! rebuilds it.
//!
//! Run with `cargo run --example clements_mesh [modes] [seed]`.

use bunchlab::interferometry::{clements_decompose, clements_reconstruct, drury_setup, Interferometer};

fn report(label: &str, u: &Interferometer) -> bunchlab::Result<()> {
    let mesh = clements_decompose(u)?;
    let back = clements_reconstruct(&mesh)?;
    let m = u.modes();
    println!(
        "{label}: {} couplers ({} non-trivial, at most {}), round-trip error {:.2e}",
        mesh.couplers.len(),
        mesh.nontrivial_count(1e-12),
        m * (m - 1) / 2,
        back.unitary().max_abs_diff(u.unitary())
    );
    Ok(())
}

fn main() -> bunchlab::Result<()> {
    let mut args = std::env::args().skip(1);
    let modes = args.next().and_then(|s| s.parse().ok()).unwrap_or(6);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);

    let u = Interferometer::random(modes, seed);
    report(&format!("random {modes}-mode"), &u)?;
    report("drury 10-mode", &drury_setup(0)?.setup.interferometer)?;

    let mesh = clements_decompose(&Interferometer::random(4, seed))?;
    println!("first couplers of a 4-mode mesh:");
    for c in mesh.couplers.iter().take(4) {
        println!("  modes ({}, {}) theta {:+.4} phi {:+.4}", c.mode, c.mode + 1, c.theta, c.phi);
    }
    Ok(())
}
