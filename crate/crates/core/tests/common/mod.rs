//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the library's numerical kernels.

#![allow(dead_code)]

use bunchlab::ComplexMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type Dense = Vec<Vec<Complex64>>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gauss<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

pub fn random_dense<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Dense {
    (0..rows).map(|_| (0..cols).map(|_| gauss(rng)).collect()).collect()
}

pub fn unit_vector<R: Rng>(len: usize, rng: &mut R) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..len).map(|_| gauss(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

pub fn to_dense(m: &ComplexMatrix) -> Dense {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m[(i, j)]).collect()).collect()
}

pub fn to_matrix(d: &Dense) -> ComplexMatrix {
    ComplexMatrix::from_rows(d).expect("rectangular")
}

/// `G†G` for a random `k × n` Gaussian `G`.
pub fn random_psd<R: Rng>(n: usize, k: usize, rng: &mut R) -> Dense {
    let g = random_dense(k, n, rng);
    (0..n)
        .map(|i| (0..n).map(|j| (0..k).map(|r| g[r][i].conj() * g[r][j]).sum()).collect())
        .collect()
}

/// Permanent by expansion along the first row.
pub fn perm(a: &Dense) -> Complex64 {
    fn rec(a: &Dense, row: usize, used: &mut Vec<bool>) -> Complex64 {
        if row == a.len() {
            return c(1.0, 0.0);
        }
        let mut total = c(0.0, 0.0);
        for j in 0..a.len() {
            if !used[j] && a[row][j] != c(0.0, 0.0) {
                used[j] = true;
                total += a[row][j] * rec(a, row + 1, used);
                used[j] = false;
            }
        }
        total
    }
    rec(a, 0, &mut vec![false; a.len()])
}

pub fn minor(a: &Dense, i: usize, j: usize) -> Dense {
    a.iter()
        .enumerate()
        .filter(|(r, _)| *r != i)
        .map(|(_, row)| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, z)| *z).collect())
        .collect()
}

pub fn hadamard(a: &Dense, b: &Dense) -> Dense {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).collect()).collect()
}

pub fn gram(vectors: &[Vec<Complex64>]) -> Dense {
    vectors
        .iter()
        .map(|a| vectors.iter().map(|b| a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()).collect())
        .collect()
}

pub fn normalize(v: Vec<Complex64>) -> Vec<Complex64> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

pub fn mat_vec(a: &Dense, v: &[Complex64]) -> Vec<Complex64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

/// Largest eigenvalue of a Hermitian p.s.d. matrix by power iteration.
pub fn power_iteration(a: &Dense) -> f64 {
    let n = a.len();
    let mut v: Vec<Complex64> = (0..n).map(|i| c(1.0 + 0.1 * i as f64, 0.05 * i as f64)).collect();
    v = normalize(v);
    let mut lambda = 0.0;
    for _ in 0..5000 {
        let w = mat_vec(a, &v);
        let next: f64 = v.iter().zip(&w).map(|(x, y)| (x.conj() * y).re).sum();
        v = normalize(w);
        if (next - lambda).abs() <= 1e-15 * next.abs() {
            return next;
        }
        lambda = next;
    }
    lambda
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
