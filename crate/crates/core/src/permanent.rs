//! Exact matrix permanents.
//!
//! Ryser's inclusion–exclusion formula over Gray-code ordered column subsets
//! is the production path; the factorial definition is kept as an oracle.
//! Also provides permanental minors, the cofactor matrix
//! `F_ij = A_ij · perm(A(i,j))` and Minc's expansion of `perm(A + B)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{BunchError, Result};
use crate::matcore::{check_psd, ComplexMatrix, Tolerances, ONE, ZERO};

pub const MAX_NAIVE_ORDER: usize = 9;
pub const MAX_RYSER_ORDER: usize = 30;
pub const MAX_F_ORDER: usize = 16;
pub const MAX_MINC_ORDER: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Algorithm {
    Naive,
    Ryser,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PermanentValue {
    pub value: Complex64,
    pub algorithm: Algorithm,
    pub n: usize,
}

/// Compensated complex summation.
#[derive(Debug, Default, Clone, Copy)]
struct KahanSum {
    sum: Complex64,
    carry: Complex64,
}

impl KahanSum {
    fn add(&mut self, x: Complex64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

fn require_square(a: &ComplexMatrix, what: &str) -> Result<usize> {
    if !a.is_square() {
        return Err(BunchError::Dimension(format!(
            "{what} needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    Ok(a.rows())
}

/// Permanent by direct summation over all `n!` permutations.
pub fn permanent_naive(a: &ComplexMatrix) -> Result<PermanentValue> {
    let n = require_square(a, "permanent")?;
    if n > MAX_NAIVE_ORDER {
        return Err(BunchError::Size(format!(
            "naive permanent limited to n <= {MAX_NAIVE_ORDER}, got {n}"
        )));
    }
    Ok(PermanentValue {
        value: naive_dense(&a.to_row_major(), n),
        algorithm: Algorithm::Naive,
        n,
    })
}

fn naive_dense(data: &[Complex64], n: usize) -> Complex64 {
    fn expand(data: &[Complex64], n: usize, row: usize, used: u32, acc: Complex64) -> Complex64 {
        if row == n {
            return acc;
        }
        let mut total = ZERO;
        for col in 0..n {
            if used & (1 << col) == 0 {
                let entry = data[row * n + col];
                if entry != ZERO {
                    total += expand(data, n, row + 1, used | (1 << col), acc * entry);
                }
            }
        }
        total
    }
    expand(data, n, 0, 0, ONE)
}

/// Permanent by Ryser's formula, `O(2ⁿ n)` operations.
pub fn permanent_ryser(a: &ComplexMatrix) -> Result<PermanentValue> {
    let n = require_square(a, "permanent")?;
    if n > MAX_RYSER_ORDER {
        return Err(BunchError::Size(format!(
            "Ryser permanent limited to n <= {MAX_RYSER_ORDER}, got {n}"
        )));
    }
    Ok(PermanentValue {
        value: ryser_dense(&a.to_row_major(), n),
        algorithm: Algorithm::Ryser,
        n,
    })
}

/// Shorthand for the Ryser value.
pub fn permanent(a: &ComplexMatrix) -> Result<Complex64> {
    permanent_ryser(a).map(|p| p.value)
}

/// Ryser's formula on a row-major `n × n` buffer; `n = 0` gives 1.
pub(crate) fn ryser_dense(data: &[Complex64], n: usize) -> Complex64 {
    if n == 0 {
        return ONE;
    }
    let mut row_sums = vec![ZERO; n];
    let mut total = KahanSum::default();
    let mut gray: u64 = 0;
    for k in 1..(1u64 << n) {
        let col = k.trailing_zeros() as usize;
        gray ^= 1 << col;
        if gray & (1 << col) != 0 {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s += data[i * n + col];
            }
        } else {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s -= data[i * n + col];
            }
        }
        let prod = row_sums.iter().fold(ONE, |p, s| p * s);
        if gray.count_ones() % 2 == 1 {
            total.add(-prod);
        } else {
            total.add(prod);
        }
    }
    if n % 2 == 1 {
        -total.sum
    } else {
        total.sum
    }
}

/// Row-major copy of `a` with row `i` and column `j` removed.
fn minor_data(a: &ComplexMatrix, i: usize, j: usize) -> Vec<Complex64> {
    let n = a.rows();
    let mut out = Vec::with_capacity((n - 1) * (n - 1));
    for r in (0..n).filter(|&r| r != i) {
        for c in (0..n).filter(|&c| c != j) {
            out.push(a[(r, c)]);
        }
    }
    out
}

/// Permanent of `a` with row `i` and column `j` deleted (0-based indices).
/// The empty minor of a 1×1 matrix has permanent 1.
pub fn permanent_minor(a: &ComplexMatrix, i: usize, j: usize) -> Result<Complex64> {
    let n = require_square(a, "permanental minor")?;
    if i >= n || j >= n {
        return Err(BunchError::Index(format!(
            "minor ({i}, {j}) of a {n}x{n} matrix"
        )));
    }
    if n - 1 > MAX_RYSER_ORDER {
        return Err(BunchError::Size(format!("minor order {} too large", n - 1)));
    }
    Ok(ryser_dense(&minor_data(a, i, j), n - 1))
}

/// Cofactor matrix `F_ij = A_ij · perm(A(i,j))` of a p.s.d. matrix.
#[derive(Debug, Clone)]
pub struct FMatrix {
    pub matrix: ComplexMatrix,
    /// `perm(A)` of the source matrix.
    pub source_perm: Complex64,
}

impl FMatrix {
    pub fn order(&self) -> usize {
        self.matrix.rows()
    }

    pub fn row_sums(&self) -> Vec<Complex64> {
        (0..self.order())
            .map(|i| (0..self.order()).map(|j| self.matrix[(i, j)]).sum())
            .collect()
    }

    pub fn column_sums(&self) -> Vec<Complex64> {
        (0..self.order())
            .map(|j| (0..self.order()).map(|i| self.matrix[(i, j)]).sum())
            .collect()
    }
}

pub fn f_matrix(a: &ComplexMatrix) -> Result<FMatrix> {
    f_matrix_with(a, &Tolerances::default())
}

pub fn f_matrix_with(a: &ComplexMatrix, tol: &Tolerances) -> Result<FMatrix> {
    let n = require_square(a, "F matrix")?;
    if n > MAX_F_ORDER {
        return Err(BunchError::Size(format!(
            "F matrix limited to n <= {MAX_F_ORDER}, got {n}"
        )));
    }
    check_psd(a, tol)?;
    let entries: Vec<Complex64> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            a[(i, j)] * ryser_dense(&minor_data(a, i, j), n - 1)
        })
        .collect();
    Ok(FMatrix {
        matrix: ComplexMatrix::from_row_major(n, n, &entries)?,
        source_perm: ryser_dense(&a.to_row_major(), n),
    })
}

/// `perm(A + B)` through Minc's expansion over pairs of equal-size index
/// sets: `Σ_r Σ_{α,β} perm(A[α,β]) · perm(B(α,β))`, where `B(α,β)` is the
/// complementary submatrix.
pub fn minc_sum_expansion(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    let n = require_square(a, "Minc expansion")?;
    if b.shape() != a.shape() {
        return Err(BunchError::Dimension(format!(
            "Minc expansion needs equal shapes, got {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    if n > MAX_MINC_ORDER {
        return Err(BunchError::Size(format!(
            "Minc expansion limited to n <= {MAX_MINC_ORDER}, got {n}"
        )));
    }
    let full: u32 = (1 << n) - 1;
    let mut by_size: Vec<Vec<u32>> = vec![Vec::new(); n + 1];
    for mask in 0..=full {
        by_size[mask.count_ones() as usize].push(mask);
    }
    let pick = |m: &ComplexMatrix, rows: u32, cols: u32| -> Complex64 {
        let ri: Vec<usize> = (0..n).filter(|&i| rows & (1 << i) != 0).collect();
        let ci: Vec<usize> = (0..n).filter(|&j| cols & (1 << j) != 0).collect();
        let data: Vec<Complex64> = ri
            .iter()
            .flat_map(|&i| ci.iter().map(move |&j| m[(i, j)]))
            .collect();
        naive_dense(&data, ri.len())
    };
    let mut total = KahanSum::default();
    for sets in &by_size {
        for &alpha in sets {
            for &beta in sets {
                let pa = pick(a, alpha, beta);
                if pa == ZERO {
                    continue;
                }
                total.add(pa * pick(b, full ^ alpha, full ^ beta));
            }
        }
    }
    Ok(total.sum)
}
