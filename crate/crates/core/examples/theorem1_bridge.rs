//! Turns a counterexample to the permanental eigenvalue conjecture into one
//! for perm(A⊙B) ≤ perm(A)∏B_ii.
//!
//! The correlation matrix B(ε) has columns (1, ε v_i)/√(1 + ε²|v_i|²), so
//! perm(A⊙B(ε)) = perm(A) + ε²(v†Fv − perm(A)) + O(ε⁴). Choosing v as the
//! top eigenvector of F makes the ε² term positive.
//!
//! Run with `cargo run --release --example theorem1_bridge`.

use bunchlab::conjectures::{bridge_m2_to_m1, check_m2, verify_theorem1};
use bunchlab::distinguishability::linear_grid;
use bunchlab::interferometry::drury_gram;

fn main() -> bunchlab::Result<()> {
    let a = drury_gram();
    let m2 = check_m2(&a)?;
    let v = m2.witness_vector.clone().expect("M2 verdicts carry the top eigenvector");

    let eps: Vec<f64> = [0.1, 0.05, 0.025, 0.0125, 0.00625].to_vec();
    let report = verify_theorem1(&a, &v, &eps)?;
    println!("perm(A) = {:.6e}, v†Fv = {:.6e}", report.perm_a, report.quadratic_form);
    println!("{:>9} {:>16} {:>16} {:>11}", "eps", "perm(A⊙B)", "prediction", "residual");
    for r in &report.rows {
        println!("{:>9.5} {:>16.9e} {:>16.9e} {:>11.3e}", r.epsilon, r.measured, r.predicted, r.residual);
    }
    if let Some(slope) = report.residual_slope {
        println!("log-log residual slope {slope:.3}");
    }

    match bridge_m2_to_m1(&a, &linear_grid(0.05, 1.0, 20))? {
        Some(w) => println!(
            "M1 broken at eps = {:.2}: perm(A⊙B)/(perm(A)∏B_ii) = {:.6}",
            w.epsilon, w.m1.ratio
        ),
        None => println!("no M1 violation on the grid"),
    }
    Ok(())
}
