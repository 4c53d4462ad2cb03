//! Verdicts for the two permanental conjectures on p.s.d. matrices.
//!
//! * M1: `perm(A ⊙ B) ≤ perm(A) ∏ B_ii` for p.s.d. `A`, `B`.
//! * M2: `perm(A)` is the largest eigenvalue of `F_ij = A_ij perm(A(i,j))`.
//!
//! A violation of M2 yields a violation of M1 through the correlation
//! matrices `B(ε)` built in [`theorem1_b`].

use std::cmp::Ordering;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{BunchError, Result};
use crate::interferometry::gaussian_vector;
use crate::matcore::{check_psd, hadamard, hermitian_eig, CVector, ComplexMatrix, Tolerances};
use crate::permanent::{f_matrix_with, permanent};

pub const MAX_M1_ORDER: usize = 12;
pub const MAX_M2_ORDER: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Conjecture {
    M1,
    M2,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConjectureVerdict {
    pub conjecture: Conjecture,
    /// `ratio − 1`; positive when the inequality is broken.
    pub margin: f64,
    pub ratio: f64,
    pub violated: bool,
    pub witness: String,
    /// Top eigenvector of `F` for M2 verdicts.
    #[serde(
        serialize_with = "crate::io::serialize_opt_cvector",
        skip_serializing_if = "Option::is_none"
    )]
    pub witness_vector: Option<CVector>,
    pub tolerance_used: f64,
}

impl ConjectureVerdict {
    fn new(conjecture: Conjecture, ratio: f64, tol: f64, witness: String) -> Self {
        Self {
            conjecture,
            margin: ratio - 1.0,
            ratio,
            violated: ratio > 1.0 + tol,
            witness,
            witness_vector: None,
            tolerance_used: tol,
        }
    }
}

fn square_order(a: &ComplexMatrix, cap: usize, what: &str) -> Result<usize> {
    if !a.is_square() {
        return Err(BunchError::Dimension(format!("{what} needs a square matrix")));
    }
    let n = a.rows();
    if n > cap {
        return Err(BunchError::Size(format!("{what} limited to n <= {cap}, got {n}")));
    }
    Ok(n)
}

pub fn check_m1(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ConjectureVerdict> {
    check_m1_with(a, b, &Tolerances::default())
}

pub fn check_m1_with(a: &ComplexMatrix, b: &ComplexMatrix, tol: &Tolerances) -> Result<ConjectureVerdict> {
    let n = square_order(a, MAX_M1_ORDER, "M1 check")?;
    if b.shape() != a.shape() {
        return Err(BunchError::Dimension(format!(
            "M1 check needs equal orders, got {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    check_psd(a, tol)?;
    check_psd(b, tol)?;
    let perm_a = permanent(a)?.re;
    let diag: f64 = b.diagonal().iter().map(|z| z.re).product();
    let bound = perm_a * diag;
    if bound.abs() < 1e-300 {
        return Err(BunchError::Degenerate(
            "perm(A) ∏ B_ii vanishes; M1 ratio undefined".into(),
        ));
    }
    let lhs = permanent(&hadamard(a, b)?)?.re;
    Ok(ConjectureVerdict::new(
        Conjecture::M1,
        lhs / bound,
        tol.violation,
        format!("n = {n}, perm(A⊙B) = {lhs:.12e}, perm(A)∏B_ii = {bound:.12e}"),
    ))
}

pub fn check_m2(a: &ComplexMatrix) -> Result<ConjectureVerdict> {
    check_m2_with(a, &Tolerances::default())
}

pub fn check_m2_with(a: &ComplexMatrix, tol: &Tolerances) -> Result<ConjectureVerdict> {
    let n = square_order(a, MAX_M2_ORDER, "M2 check")?;
    let f = f_matrix_with(a, tol)?;
    let perm_a = f.source_perm.re;
    if perm_a.abs() < 1e-300 {
        return Err(BunchError::Degenerate("perm(A) vanishes; M2 ratio undefined".into()));
    }
    let eig = hermitian_eig(&f.matrix)?;
    let top = eig.max();
    let mut verdict = ConjectureVerdict::new(
        Conjecture::M2,
        top / perm_a,
        tol.violation,
        format!("n = {n}, λ_max(F) = {top:.12e}, perm(A) = {perm_a:.12e}"),
    );
    verdict.witness_vector = Some(eig.vector(n - 1));
    Ok(verdict)
}

/// Correlation matrix `B(ε) = M(ε)†M(ε)` where column `i` of the 2×n matrix
/// `M(ε)` is `(1, ε v_i) / √(1 + ε²|v_i|²)`. `B(0)` is all ones and every
/// `B(ε)` has unit diagonal.
pub fn theorem1_b(v: &CVector, eps: f64) -> ComplexMatrix {
    let n = v.len();
    let m = ComplexMatrix::from_fn(2, n, |r, i| {
        let scale = 1.0 / (1.0 + eps * eps * v[i].norm_sqr()).sqrt();
        if r == 0 {
            Complex64::new(scale, 0.0)
        } else {
            v[i] * (eps * scale)
        }
    });
    m.adjoint().matmul(&m).expect("2xn shapes agree")
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Theorem1Row {
    pub epsilon: f64,
    /// `perm(A ⊙ B(ε))`.
    pub measured: f64,
    /// `perm(A) + ε² (v†Fv − perm(A))`.
    pub predicted: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Theorem1Report {
    pub perm_a: f64,
    /// `v†Fv`.
    pub quadratic_form: f64,
    pub rows: Vec<Theorem1Row>,
    /// Least-squares slope of `log|residual|` against `log ε`.
    pub residual_slope: Option<f64>,
}

/// Compares `perm(A ⊙ B(ε))` with its quadratic expansion around `ε = 0`.
pub fn verify_theorem1(a: &ComplexMatrix, v: &CVector, epsilons: &[f64]) -> Result<Theorem1Report> {
    let tol = Tolerances::default();
    if (v.norm() - 1.0).abs() > tol.unit_norm {
        return Err(BunchError::Validation(format!(
            "direction must have unit norm, got {}",
            v.norm()
        )));
    }
    if v.len() != a.rows() {
        return Err(BunchError::Dimension("direction and matrix orders differ".into()));
    }
    if let Some(e) = epsilons.iter().find(|e| !(0.0..=1.0).contains(*e)) {
        return Err(BunchError::Range(format!("epsilon {e} outside [0, 1]")));
    }
    let f = f_matrix_with(a, &tol)?;
    let perm_a = f.source_perm.re;
    let fv = f.matrix.mul_vec(v)?;
    let quadratic_form = v.dotc(&fv).re;

    let mut rows = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let measured = permanent(&hadamard(a, &theorem1_b(v, eps))?)?.re;
        let predicted = perm_a + eps * eps * (quadratic_form - perm_a);
        rows.push(Theorem1Row { epsilon: eps, measured, predicted, residual: measured - predicted });
    }
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.epsilon > 0.0 && r.residual != 0.0)
        .map(|r| (r.epsilon.ln(), r.residual.abs().ln()))
        .collect();
    Ok(Theorem1Report {
        perm_a,
        quadratic_form,
        rows,
        residual_slope: log_slope(&points),
    })
}

/// Least-squares slope through `(x, y)` points; `None` below two points.
pub fn log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// An M1 counterexample built from an M2 violation.
#[derive(Debug, Clone, Serialize)]
pub struct BridgeWitness {
    pub epsilon: f64,
    pub m2: ConjectureVerdict,
    pub m1: ConjectureVerdict,
}

/// If `A` violates M2, scans `B(ε)` along the top eigenvector of `F` for an
/// `ε ∈ grid` at which `(A, B(ε))` violates M1.
pub fn bridge_m2_to_m1(a: &ComplexMatrix, grid: &[f64]) -> Result<Option<BridgeWitness>> {
    let m2 = check_m2(a)?;
    if !m2.violated {
        return Ok(None);
    }
    let v = m2.witness_vector.clone().expect("M2 verdicts carry a vector");
    for &eps in grid.iter().filter(|&&e| e > 0.0) {
        let m1 = check_m1(a, &theorem1_b(&v, eps))?;
        if m1.violated {
            return Ok(Some(BridgeWitness { epsilon: eps, m2, m1 }));
        }
    }
    Ok(None)
}

/// Seeded search for M2 violations among random low-rank p.s.d. matrices.
#[derive(Debug, Clone)]
pub struct ViolationSearch {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    injected: Vec<ComplexMatrix>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchReport {
    /// Verdicts with ratio above `1 − 10⁻⁶`, largest ratio first.
    pub verdicts: Vec<ConjectureVerdict>,
    pub max_ratio: f64,
    pub violations: usize,
    pub trials: usize,
}

impl ViolationSearch {
    pub fn new(n: usize, trials: usize, seed: u64) -> Result<Self> {
        if !(2..=10).contains(&n) {
            return Err(BunchError::Range(format!("search order must be in 2..=10, got {n}")));
        }
        Ok(Self { n, trials, seed, injected: Vec::new() })
    }

    /// Adds a fixed candidate evaluated ahead of the random trials.
    pub fn inject(mut self, a: ComplexMatrix) -> Self {
        self.injected.push(a);
        self
    }

    /// `A = G†G` with `G` a `k × n` complex Gaussian matrix, `k` uniform in
    /// `2..=n`, drawn from the stream `(seed, trial)`.
    pub fn sample(&self, trial: u64) -> (usize, ComplexMatrix) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial);
        let k = rng.random_range(2..=self.n);
        let rows: Vec<CVector> = (0..k).map(|_| gaussian_vector(self.n, &mut rng)).collect();
        let g = ComplexMatrix::from_fn(k, self.n, |i, j| rows[i][j]);
        (k, g.adjoint().matmul(&g).expect("shapes agree"))
    }

    pub fn run(&self) -> Result<SearchReport> {
        let mut candidates: Vec<(String, ComplexMatrix)> = self
            .injected
            .iter()
            .enumerate()
            .map(|(i, a)| (format!("injected #{i}"), a.clone()))
            .collect();
        let offset = candidates.len();
        candidates.extend((0..self.trials).map(|t| {
            let (k, a) = self.sample(t as u64);
            (format!("trial {} (seed {}, rank {k})", t + offset, self.seed), a)
        }));

        let verdicts = candidates
            .par_iter()
            .map(|(label, a)| {
                let mut v = check_m2(a)?;
                v.witness = format!("{label}: {}", v.witness);
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()?;

        let max_ratio = verdicts.iter().map(|v| v.ratio).fold(f64::NEG_INFINITY, f64::max);
        let violations = verdicts.iter().filter(|v| v.violated).count();
        let mut kept: Vec<(usize, ConjectureVerdict)> = verdicts
            .into_iter()
            .enumerate()
            .filter(|(_, v)| v.ratio > 1.0 - 1e-6)
            .collect();
        kept.sort_by(|(i, a), (j, b)| {
            b.ratio.partial_cmp(&a.ratio).unwrap_or(Ordering::Equal).then(i.cmp(j))
        });
        Ok(SearchReport {
            verdicts: kept.into_iter().map(|(_, v)| v).collect(),
            max_ratio,
            violations,
            trials: candidates.len(),
        })
    }
}

/// Shorthand for a search without injected candidates.
pub fn random_violation_search(n: usize, trials: usize, seed: u64) -> Result<SearchReport> {
    ViolationSearch::new(n, trials, seed)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::GramMatrix;

    #[test]
    fn m2_equality_cases() {
        for n in 1..=6 {
            let v = check_m2(&ComplexMatrix::identity(n)).unwrap();
            assert!((v.ratio - 1.0).abs() < 1e-9 && !v.violated);
            let v = check_m2(&ComplexMatrix::ones(n)).unwrap();
            assert!((v.ratio - 1.0).abs() < 1e-9 && !v.violated);
        }
    }

    #[test]
    fn m1_with_all_ones_a_is_indistinguishability() {
        let s = crate::distinguishability::interpolation_gram(4, 1.0).unwrap();
        let v = check_m1(&ComplexMatrix::ones(4), s.matrix()).unwrap();
        let d = crate::distinguishability::indistinguishability(&s).unwrap();
        assert!((v.ratio - d).abs() < 1e-12);
        assert!(!v.violated);
        let v = check_m1(&ComplexMatrix::identity(3), &ComplexMatrix::identity(3)).unwrap();
        assert!((v.ratio - 1.0).abs() < 1e-15);
    }

    #[test]
    fn m1_rejects_bad_input() {
        let bad = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 1.0]]).unwrap();
        assert!(matches!(check_m1(&bad, &ComplexMatrix::ones(2)), Err(BunchError::Validation(_))));
        assert!(matches!(
            check_m1(&ComplexMatrix::zeros(2, 2), &ComplexMatrix::ones(2)),
            Err(BunchError::Degenerate(_))
        ));
        assert!(check_m2(&ComplexMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn theorem1_b_is_a_correlation_matrix() {
        let v = CVector::from_vec(vec![
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.48),
            Complex64::new(0.64, 0.0),
        ]);
        assert_eq!(theorem1_b(&v, 0.0), ComplexMatrix::ones(3));
        let b = theorem1_b(&v, 0.7);
        assert!(GramMatrix::new(b).is_ok());
    }

    #[test]
    fn theorem1_at_zero_is_exact() {
        let a = ComplexMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 3.0]]).unwrap();
        let v = CVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        let r = verify_theorem1(&a, &v, &[0.0]).unwrap();
        assert_eq!(r.rows[0].measured, r.perm_a);
        assert!(verify_theorem1(&a, &v, &[1.5]).is_err());
        let bad = CVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]);
        assert!(matches!(verify_theorem1(&a, &bad, &[0.1]), Err(BunchError::Validation(_))));
    }

    #[test]
    fn two_by_two_never_violates_m2() {
        let report = random_violation_search(2, 40, 11).unwrap();
        assert_eq!(report.violations, 0);
        assert!(report.max_ratio <= 1.0 + 1e-10);
    }

    #[test]
    fn search_is_reproducible() {
        let a = random_violation_search(4, 30, 5).unwrap();
        let b = random_violation_search(4, 30, 5).unwrap();
        assert_eq!(a.max_ratio, b.max_ratio);
        assert_eq!(a.verdicts.len(), b.verdicts.len());
        assert!(ViolationSearch::new(11, 1, 0).is_err());
    }
}
