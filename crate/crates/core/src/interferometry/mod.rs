//! Linear interferometers and the bunching setups built on them.
//!
//! Modes and photons are indexed from zero. Column `a` of a unitary is the
//! image of input mode `a`; row `l` is output mode `l`.

mod clements;

pub use clements::{clements_decompose, clements_reconstruct, BeamsplitterMesh, Coupler};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{BunchError, Result};
use crate::matcore::{
    fix_phase, hermitian_eig, pivoted_cholesky, spectral_norm, CVector, ComplexMatrix, Tolerances,
    ZERO,
};

/// Square unitary matrix describing an `m`-mode lossless interferometer.
#[derive(Debug, Clone, PartialEq)]
pub struct Interferometer {
    unitary: ComplexMatrix,
}

impl Interferometer {
    pub fn new(unitary: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(unitary, Tolerances::default().unitary)
    }

    pub fn with_tolerance(unitary: ComplexMatrix, tol: f64) -> Result<Self> {
        if !unitary.is_square() {
            return Err(BunchError::Dimension(format!(
                "interferometer must be square, got {}x{}",
                unitary.rows(),
                unitary.cols()
            )));
        }
        let defect = unitary.unitarity_defect();
        if defect > tol {
            return Err(BunchError::Validation(format!(
                "matrix is not unitary (‖U†U − I‖ = {defect:.3e})"
            )));
        }
        Ok(Self { unitary })
    }

    pub fn identity(m: usize) -> Self {
        Self {
            unitary: ComplexMatrix::identity(m),
        }
    }

    /// Balanced two-mode coupler `[[1, 1], [1, −1]] / √2`.
    pub fn balanced_coupler() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            unitary: ComplexMatrix::from_real_rows(&[&[h, h], &[h, -h]]).expect("finite"),
        }
    }

    /// Haar-random unitary from a seeded complex Gaussian matrix.
    pub fn random(m: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(m, &mut rng)
    }

    pub fn random_with<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        let mut rows: Vec<CVector> = Vec::with_capacity(m);
        while rows.len() < m {
            let v = gaussian_vector(m, rng);
            if let Some(q) = orthonormalize_against(&v, &rows) {
                rows.push(q);
            }
        }
        Self {
            unitary: rows_to_matrix(&rows),
        }
    }

    pub fn modes(&self) -> usize {
        self.unitary.rows()
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.unitary
    }

    pub fn into_unitary(self) -> ComplexMatrix {
        self.unitary
    }
}

pub(crate) fn gaussian_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> CVector {
    CVector::from_fn(len, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Projects `v` off the span of the orthonormal `basis` (two passes) and
/// normalizes it. `None` if too little of `v` survives.
fn orthonormalize_against(v: &CVector, basis: &[CVector]) -> Option<CVector> {
    let start = v.norm();
    let mut w = v.clone();
    for _ in 0..2 {
        for b in basis {
            let overlap = b.dotc(&w);
            w -= b * overlap;
        }
    }
    let norm = w.norm();
    if norm < 1e-6 * start.max(f64::MIN_POSITIVE) {
        return None;
    }
    w /= Complex64::new(norm, 0.0);
    Some(w)
}

fn rows_to_matrix(rows: &[CVector]) -> ComplexMatrix {
    let cols = rows[0].len();
    ComplexMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j])
}

/// The 2×8 complex matrix `M` whose Gram matrix `M†M` is Drury's
/// counterexample to the permanental eigenvalue conjecture.
pub fn drury_matrix() -> ComplexMatrix {
    const RE: [[f64; 8]; 2] = [
        [-7.0, 9.0, -6.0, 3.0, 7.0, 4.0, 0.0, 5.0],
        [4.0, 1.0, -8.0, -7.0, 1.0, 1.0, 8.0, 1.0],
    ];
    const IM: [[f64; 8]; 2] = [
        [4.0, -3.0, 2.0, 4.0, 6.0, -4.0, 1.0, -8.0],
        [-5.0, 4.0, -2.0, 4.0, -4.0, -8.0, -6.0, -3.0],
    ];
    ComplexMatrix::from_fn(2, 8, |i, j| Complex64::new(RE[i][j], IM[i][j]))
}

/// `A = M†M` for the Drury matrix: 8×8, p.s.d., rank 2.
pub fn drury_gram() -> ComplexMatrix {
    let m = drury_matrix();
    m.adjoint().matmul(&m).expect("2x8 shapes agree")
}

/// Rescales `M` (k×m, k ≤ m) to `B = √α·M` with `α = 1/‖M†M‖₂`, so that
/// `‖B B†‖₂ = 1`.
pub fn rescale_to_contraction(m: &ComplexMatrix) -> Result<(ComplexMatrix, f64)> {
    if m.rows() > m.cols() {
        return Err(BunchError::Dimension(format!(
            "expected a wide matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let gram = m.adjoint().matmul(m)?;
    let norm = spectral_norm(&gram)?;
    if norm == 0.0 {
        return Err(BunchError::Degenerate("cannot rescale the zero matrix".into()));
    }
    let alpha = 1.0 / norm;
    Ok((m.scale(Complex64::new(alpha.sqrt(), 0.0)), alpha))
}

/// Extends the contraction `B` (k×m) to an `m_total`-mode unitary whose
/// top-left k×m block is `B`.
///
/// The first k rows are `[B | L | 0]` where `L L† = I − B B†` comes from the
/// pivoted Cholesky factor. The remaining rows are seeded Gaussian vectors
/// orthonormalized against everything above them, each with its
/// largest-modulus entry made real and positive.
pub fn complete_to_unitary(b: &ComplexMatrix, m_total: usize, seed: u64) -> Result<Interferometer> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    complete_to_unitary_with(b, m_total, &mut rng)
}

pub fn complete_to_unitary_with<R: Rng + ?Sized>(
    b: &ComplexMatrix,
    m_total: usize,
    rng: &mut R,
) -> Result<Interferometer> {
    let (k, m) = b.shape();
    let bbt = b.matmul(&b.adjoint())?;
    let top = hermitian_eig(&bbt)?.max();
    if top > 1.0 + 1e-9 {
        return Err(BunchError::NotContraction(format!(
            "largest eigenvalue of B B† is {top}"
        )));
    }

    // Only rank(I − B B†) extra columns are needed; an isometric B needs none.
    let defect = ComplexMatrix::identity(k).sub(&bbt)?;
    let largest_diag = defect.diagonal().iter().map(|z| z.re).fold(0.0, f64::max);
    let extension = if largest_diag > 1e-12 {
        pivoted_cholesky(&defect, 1e-10)?.factor.adjoint()
    } else {
        ComplexMatrix::zeros(k, 0)
    };
    let r = extension.cols();
    if m_total < m + r {
        return Err(BunchError::Dimension(format!(
            "completing a {k}x{m} block of defect rank {r} needs at least {} modes, got {m_total}",
            m + r
        )));
    }

    let mut rows: Vec<CVector> = (0..k)
        .map(|i| {
            CVector::from_fn(m_total, |j, _| {
                if j < m {
                    b[(i, j)]
                } else if j < m + r {
                    extension[(i, j - m)]
                } else {
                    ZERO
                }
            })
        })
        .collect();
    while rows.len() < m_total {
        let v = gaussian_vector(m_total, rng);
        if let Some(mut q) = orthonormalize_against(&v, &rows) {
            fix_phase(&mut q);
            rows.push(q);
        }
    }
    Interferometer::new(rows_to_matrix(&rows))
}

/// An interferometer, the photon count `n` (photons enter modes `0..n`),
/// the output subset `K`, and `H_ab = Σ_{l∈K} conj(U_la) U_lb`.
#[derive(Debug, Clone)]
pub struct BunchingSetup {
    pub interferometer: Interferometer,
    pub n: usize,
    /// Sorted, distinct output modes.
    pub subset: Vec<usize>,
    pub h: ComplexMatrix,
}

pub fn h_matrix(u: &Interferometer, subset: &[usize], n: usize) -> Result<BunchingSetup> {
    let m = u.modes();
    if subset.is_empty() {
        return Err(BunchError::Validation("output subset is empty".into()));
    }
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(BunchError::Validation(format!(
            "output subset {subset:?} has repeated modes"
        )));
    }
    if let Some(&bad) = sorted.iter().find(|&&l| l >= m) {
        return Err(BunchError::Validation(format!(
            "output mode {bad} outside 0..{m}"
        )));
    }
    if n == 0 || n > m {
        return Err(BunchError::Validation(format!(
            "photon count {n} must lie in 1..={m}"
        )));
    }
    let uu = u.unitary();
    let h = ComplexMatrix::from_fn(n, n, |a, b| {
        sorted.iter().map(|&l| uu[(l, a)].conj() * uu[(l, b)]).sum()
    });
    Ok(BunchingSetup {
        interferometer: u.clone(),
        n,
        subset: sorted,
        h,
    })
}

/// Drury's counterexample as a bunching setup: `√α·M` embedded in the top
/// rows of a seeded 10-mode unitary, eight photons, `K = {0, 1}`.
#[derive(Debug, Clone)]
pub struct DrurySetup {
    pub setup: BunchingSetup,
    pub alpha: f64,
    pub seed: u64,
}

pub fn drury_setup(seed: u64) -> Result<DrurySetup> {
    let (b, alpha) = rescale_to_contraction(&drury_matrix())?;
    let u = complete_to_unitary(&b, 10, seed)?;
    let setup = h_matrix(&u, &[0, 1], 8)?;
    Ok(DrurySetup { setup, alpha, seed })
}

/// Routes the `K₁` outputs of `setup1` into the first `|K₁|` inputs of `u2`;
/// the other `m₂ − |K₁|` inputs of `u2` are fresh vacuum modes. The composite
/// subset is every output of `u2`, so the composite `H` equals `setup1.h`.
///
/// Only vacuum is supported on the extra inputs, so `n_extra` must be zero.
pub fn extend_counterexample(
    setup1: &BunchingSetup,
    u2: &Interferometer,
    n_extra: usize,
) -> Result<BunchingSetup> {
    if n_extra != 0 {
        return Err(BunchError::Validation(
            "extra photons in the second stage are not supported; use vacuum (n_extra = 0)".into(),
        ));
    }
    let k1 = setup1.subset.len();
    let m2 = u2.modes();
    if m2 < k1 {
        return Err(BunchError::Dimension(format!(
            "second stage has {m2} modes but must receive {k1}"
        )));
    }
    let m1 = setup1.interferometer.modes();
    let total = m1 + m2 - k1;
    let routed: Vec<usize> = setup1
        .subset
        .iter()
        .copied()
        .chain(m1..total)
        .collect();

    let u1 = setup1.interferometer.unitary().as_dmatrix();
    let mut first = DMatrix::<Complex64>::identity(total, total);
    first.view_mut((0, 0), (m1, m1)).copy_from(u1);

    let u2m = u2.unitary();
    let mut second = DMatrix::<Complex64>::identity(total, total);
    for &l in &routed {
        second[(l, l)] = ZERO;
    }
    for (r, &lr) in routed.iter().enumerate() {
        for (c, &lc) in routed.iter().enumerate() {
            second[(lr, lc)] = u2m[(r, c)];
        }
    }
    let composite = Interferometer::new(ComplexMatrix::from_dmatrix(second * first)?)?;
    h_matrix(&composite, &routed, setup1.n)
}
