//! Dense complex linear algebra used throughout the crate.
//!
//! [`ComplexMatrix`] is a thin wrapper over a `nalgebra` dense matrix that
//! guarantees finite entries. Gram matrices, Hermitian eigenproblems and
//! pivoted Cholesky factorizations of semidefinite matrices live here.

use std::fmt;
use std::ops::Index;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{BunchError, Result};

pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest order accepted by [`hermitian_eig`].
pub const MAX_EIG_ORDER: usize = 64;

const EIG_MAX_ITER: usize = 10_000;

/// Numerical slack used by the validators.
///
/// All values are relative unless noted. The defaults are the ones every
/// public function uses; the `*_with` variants accept overrides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Hermitian check for Gram matrices, relative to the largest entry.
    pub hermitian: f64,
    /// Hermitian check on eigensolver input, relative to the largest entry.
    pub eig_hermitian: f64,
    /// Allowed negative eigenvalue, relative to `max(1, λ_max)`.
    pub psd: f64,
    /// Absolute deviation of Gram diagonals from one.
    pub unit_diagonal: f64,
    /// Absolute deviation of vector norms from one.
    pub unit_norm: f64,
    /// Pivot threshold of the pivoted Cholesky, relative to the largest diagonal.
    pub rank: f64,
    /// Absolute slack on `‖U†U − I‖_max`.
    pub unitary: f64,
    /// Relative margin above one before a conjecture counts as violated.
    pub violation: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-12,
            eig_hermitian: 1e-8,
            psd: 1e-10,
            unit_diagonal: 1e-12,
            unit_norm: 1e-10,
            rank: 1e-10,
            unitary: 1e-9,
            violation: 1e-8,
        }
    }
}

/// Dense rectangular complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: &[Complex64]) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(BunchError::Dimension(format!(
                "matrix must have positive shape, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(BunchError::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Self::from_dmatrix(DMatrix::from_row_slice(rows, cols, data))
    }

    /// Builds a matrix from nested rows of complex entries.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(BunchError::Dimension("ragged rows".into()));
        }
        let flat: Vec<Complex64> = rows.iter().flatten().copied().collect();
        Self::from_row_major(r, c, &flat)
    }

    /// Builds a matrix of real entries given as nested rows.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_dmatrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(BunchError::Validation("matrix has non-finite entries".into()));
        }
        Ok(Self(m))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// The all-ones matrix.
    pub fn ones(n: usize) -> Self {
        Self(DMatrix::from_element(n, n, ONE))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { ZERO })
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.0
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn conjugate(&self) -> Self {
        Self(self.0.conjugate())
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols() != rhs.rows() {
            return Err(BunchError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(Self(&self.0 * &rhs.0))
    }

    pub fn mul_vec(&self, v: &CVector) -> Result<CVector> {
        if self.cols() != v.len() {
            return Err(BunchError::Dimension(format!(
                "cannot apply {}x{} matrix to vector of length {}",
                self.rows(),
                self.cols(),
                v.len()
            )));
        }
        Ok(&self.0 * v)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self(&self.0 * c)
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        same_shape(self, rhs)?;
        Ok(Self(&self.0 + &rhs.0))
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        same_shape(self, rhs)?;
        Ok(Self(&self.0 - &rhs.0))
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.rows().min(self.cols())).map(|i| self.0[(i, i)]).collect()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self − rhs`.
    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch in max_abs_diff");
        self.0
            .iter()
            .zip(rhs.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest deviation from Hermitian symmetry, `max |A_ij − conj(A_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `‖A†A − I‖_max`; infinite for non-square input.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let g = self.0.adjoint() * &self.0;
        let id = DMatrix::<Complex64>::identity(self.rows(), self.rows());
        g.iter()
            .zip(id.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Copy of the block `rows × cols` at the given offsets.
    pub fn block(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> Self {
        Self(self.0.view((row0, col0), (rows, cols)).into_owned())
    }

    /// Submatrix on the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self.0[(rows[i], cols[j])])
    }

    pub fn column(&self, j: usize) -> CVector {
        self.0.column(j).into_owned()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.0[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

fn same_shape(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(BunchError::Dimension(format!(
            "shapes {:?} and {:?} differ",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

/// Entrywise product `A ⊙ B`.
pub fn hadamard(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    same_shape(a, b)?;
    Ok(ComplexMatrix(a.0.component_mul(&b.0)))
}

/// Spectrum of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the unit eigenvector of `eigenvalues[k]`, with its
    /// largest-modulus component made real and positive.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEig {
    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn vector(&self, k: usize) -> CVector {
        self.eigenvectors.column(k)
    }
}

pub fn hermitian_eig(a: &ComplexMatrix) -> Result<HermitianEig> {
    hermitian_eig_with(a, &Tolerances::default())
}

pub fn hermitian_eig_with(a: &ComplexMatrix, tol: &Tolerances) -> Result<HermitianEig> {
    if !a.is_square() {
        return Err(BunchError::Dimension(format!(
            "eigenproblem needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    if n > MAX_EIG_ORDER {
        return Err(BunchError::Size(format!(
            "eigensolver order {n} exceeds {MAX_EIG_ORDER}"
        )));
    }
    let scale = a.max_abs();
    if a.hermitian_defect() > tol.eig_hermitian * scale {
        return Err(BunchError::Validation(format!(
            "matrix is not Hermitian (defect {:.3e})",
            a.hermitian_defect()
        )));
    }
    let sym = (&a.0 + a.0.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, EIG_MAX_ITER).ok_or_else(|| {
        BunchError::Numeric(format!(
            "Hermitian eigensolver did not converge in {EIG_MAX_ITER} iterations"
        ))
    })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = DMatrix::<Complex64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(src).into_owned();
        let norm = v.norm();
        v /= Complex64::new(norm, 0.0);
        fix_phase(&mut v);
        vecs.set_column(dst, &v);
    }
    Ok(HermitianEig {
        eigenvalues,
        eigenvectors: ComplexMatrix(vecs),
    })
}

/// Rotates `v` so its largest-modulus component is real and positive.
/// Near-ties (within 1e-12 relative) go to the lowest index.
pub fn fix_phase(v: &mut CVector) {
    let biggest = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if biggest == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .position(|z| z.norm() >= biggest * (1.0 - 1e-12))
        .expect("maximum exists");
    let phase = v[pivot] / v[pivot].norm();
    let rot = phase.conj();
    for z in v.iter_mut() {
        *z *= rot;
    }
    v[pivot] = Complex64::new(v[pivot].re, 0.0);
}

/// Largest singular value.
pub fn spectral_norm(a: &ComplexMatrix) -> Result<f64> {
    let gram = if a.rows() <= a.cols() {
        ComplexMatrix(&a.0 * a.0.adjoint())
    } else {
        ComplexMatrix(a.0.adjoint() * &a.0)
    };
    let eig = hermitian_eig(&gram)?;
    Ok(eig.max().max(0.0).sqrt())
}

/// Hermitian positive semidefinite matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix(ComplexMatrix);

impl GramMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::with_tolerances(m, &Tolerances::default())
    }

    pub fn with_tolerances(m: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if !m.is_square() {
            return Err(BunchError::Dimension(format!(
                "Gram matrix must be square, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let scale = m.max_abs();
        if m.hermitian_defect() > tol.hermitian * scale {
            return Err(BunchError::Validation(format!(
                "Gram matrix is not Hermitian (defect {:.3e})",
                m.hermitian_defect()
            )));
        }
        for (i, d) in m.diagonal().into_iter().enumerate() {
            if (d - ONE).norm() > tol.unit_diagonal {
                return Err(BunchError::Validation(format!(
                    "Gram diagonal entry {i} is {d}, expected 1"
                )));
            }
        }
        check_psd(&m, tol)?;
        Ok(Self(m))
    }

    /// The all-ones Gram matrix of identical internal states.
    pub fn ones(n: usize) -> Self {
        Self(ComplexMatrix::ones(n))
    }

    /// The Gram matrix of mutually orthogonal internal states.
    pub fn identity(n: usize) -> Self {
        Self(ComplexMatrix::identity(n))
    }

    pub fn order(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }
}

impl AsRef<ComplexMatrix> for GramMatrix {
    fn as_ref(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// Fails unless `m` is Hermitian (at the eigensolver tolerance) and
/// positive semidefinite within `tol.psd`.
pub fn check_psd(m: &ComplexMatrix, tol: &Tolerances) -> Result<HermitianEig> {
    let eig = hermitian_eig_with(m, tol)?;
    let floor = -tol.psd * eig.max().max(1.0);
    if eig.min() < floor {
        return Err(BunchError::Validation(format!(
            "matrix is not positive semidefinite (min eigenvalue {:.3e})",
            eig.min()
        )));
    }
    Ok(eig)
}

/// Pivoted Cholesky factor `C` (rank × n) of a Hermitian p.s.d. matrix with
/// `C†C = A`.
///
/// Pivots are taken greedily on the largest remaining diagonal, lowest index
/// on ties, and the factorization stops once that diagonal falls below
/// `rank_tol · max_i A_ii`. Each row's pivot entry is real and positive.
#[derive(Debug, Clone)]
pub struct PivotedCholesky {
    pub factor: ComplexMatrix,
    /// Column index chosen as pivot for each row of `factor`.
    pub pivots: Vec<usize>,
}

impl PivotedCholesky {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

pub fn pivoted_cholesky(a: &ComplexMatrix, rank_tol: f64) -> Result<PivotedCholesky> {
    if !a.is_square() {
        return Err(BunchError::Dimension("Cholesky needs a square matrix".into()));
    }
    let n = a.rows();
    let scale = a.diagonal().iter().map(|z| z.re).fold(0.0, f64::max);
    if scale <= 0.0 {
        if a.max_abs() > 0.0 {
            return Err(BunchError::Validation(
                "matrix is indefinite (non-positive diagonal)".into(),
            ));
        }
        return Ok(PivotedCholesky {
            factor: ComplexMatrix::zeros(1, n),
            pivots: Vec::new(),
        });
    }
    let threshold = rank_tol * scale;
    let mut work = a.0.clone();
    let mut used = vec![false; n];
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    let mut pivots = Vec::new();

    loop {
        let mut best: Option<(usize, f64)> = None;
        for i in (0..n).filter(|&i| !used[i]) {
            let d = work[(i, i)].re;
            if best.is_none_or(|(_, b)| d > b) {
                best = Some((i, d));
            }
        }
        let Some((p, d)) = best else { break };
        if d <= threshold {
            break;
        }
        let root = d.sqrt();
        let mut row = vec![ZERO; n];
        row[p] = Complex64::new(root, 0.0);
        for j in (0..n).filter(|&j| !used[j] && j != p) {
            row[j] = work[(p, j)] / root;
        }
        used[p] = true;
        for i in (0..n).filter(|&i| !used[i]) {
            for j in (0..n).filter(|&j| !used[j]) {
                work[(i, j)] -= row[i].conj() * row[j];
            }
        }
        rows.push(row);
        pivots.push(p);
    }

    // Remaining Schur complement must be negligible for a p.s.d. input.
    let mut residual: f64 = 0.0;
    for i in (0..n).filter(|&i| !used[i]) {
        for j in (0..n).filter(|&j| !used[j]) {
            residual = residual.max(work[(i, j)].norm());
        }
    }
    if residual > 1e-8 * scale {
        return Err(BunchError::Validation(format!(
            "matrix is indefinite (Schur residual {residual:.3e})"
        )));
    }

    let factor = if rows.is_empty() {
        ComplexMatrix::zeros(1, n)
    } else {
        ComplexMatrix::from_rows(&rows)?
    };
    Ok(PivotedCholesky { factor, pivots })
}

/// Rank-revealing Cholesky factor of a Gram matrix; rows of the result are
/// the vectors `u^k` with `S_ij = Σ_k conj(u^k_i) u^k_j`.
pub fn cholesky_gram(s: &GramMatrix) -> Result<ComplexMatrix> {
    cholesky_gram_with(s, &Tolerances::default())
}

pub fn cholesky_gram_with(s: &GramMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    Ok(pivoted_cholesky(s.matrix(), tol.rank)?.factor)
}

/// Gram matrix `S_ij = ⟨v_i|v_j⟩` of unit vectors.
pub fn gram_from_vectors(vectors: &[CVector]) -> Result<GramMatrix> {
    gram_from_vectors_with(vectors, &Tolerances::default())
}

pub fn gram_from_vectors_with(vectors: &[CVector], tol: &Tolerances) -> Result<GramMatrix> {
    let Some(first) = vectors.first() else {
        return Err(BunchError::Dimension("no vectors supplied".into()));
    };
    let dim = first.len();
    for (i, v) in vectors.iter().enumerate() {
        if v.len() != dim {
            return Err(BunchError::Dimension(format!(
                "vector {i} has dimension {}, expected {dim}",
                v.len()
            )));
        }
        if (v.norm() - 1.0).abs() > tol.unit_norm {
            return Err(BunchError::Validation(format!(
                "vector {i} has norm {}, expected 1",
                v.norm()
            )));
        }
    }
    let n = vectors.len();
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = ONE;
        for j in (i + 1)..n {
            let overlap = vectors[i].dotc(&vectors[j]);
            m[(i, j)] = overlap;
            m[(j, i)] = overlap.conj();
        }
    }
    GramMatrix::with_tolerances(ComplexMatrix(m), tol)
}
