//! Hong–Ou–Mandel interference on a balanced beamsplitter.
//!
//! Two photons enter a 50:50 coupler; the probability that both leave
//! through the first output is ½ for identical photons and ¼ for orthogonal
//! ones. Intermediate overlaps interpolate linearly in |⟨φ₁|φ₂⟩|².
//!
//! Run with `cargo run --example hom_dip`.

use bunchlab::distinguishability::{bunching_probability, indistinguishability, InternalStateFamily};
use bunchlab::interferometry::{h_matrix, Interferometer};
use bunchlab::oracle::fock_bunching_oracle;
use bunchlab::CVector;
use num_complex::Complex64;

fn main() -> bunchlab::Result<()> {
    let u = Interferometer::balanced_coupler();
    let setup = h_matrix(&u, &[0], 2)?;

    println!("{:>8} {:>12} {:>12} {:>8}", "overlap", "formula", "fock", "d(S)");
    for k in 0..=10 {
        let theta = std::f64::consts::FRAC_PI_2 * k as f64 / 10.0;
        let a = CVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        let b = CVector::from_vec(vec![
            Complex64::new(theta.cos(), 0.0),
            Complex64::new(0.0, theta.sin()),
        ]);
        let states = InternalStateFamily::new(vec![a, b])?;
        let s = states.gram()?;
        let p = bunching_probability(&setup.h, &s)?;
        let q = fock_bunching_oracle(&u, &[0], &states)?;
        println!(
            "{:>8.3} {:>12.8} {:>12.8} {:>8.4}",
            s.matrix()[(0, 1)].norm_sqr(),
            p,
            q,
            indistinguishability(&s)?
        );
    }
    Ok(())
}
