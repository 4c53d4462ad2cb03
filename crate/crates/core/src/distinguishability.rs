//! Partially distinguishable photons: internal states, their Gram matrices,
//! bunching probabilities and the perturbative analysis around perfectly
//! indistinguishable photons.
//!
//! Photon `i` carries the internal state `|φ_i⟩`; the Gram matrix is
//! `S_ij = ⟨φ_i|φ_j⟩` and the probability that all photons leave through the
//! output subset encoded in `H` is `perm(H ⊙ S)`, which equals
//! `perm(Hᵀ ⊙ Sᵀ)` since the permanent is transpose invariant.
//!
//! A perturbation `|φ₀⟩ + ε v_i |η_i⟩` with `⟨η_i|φ₀⟩ = 0` changes that
//! probability by `ε² Σ_ij (conj(v_i) v_j Δ_ij − |v_i|²/2 − |v_j|²/2) F_ij`
//! to leading order, where `Δ_ij = ⟨η_i|η_j⟩` and `F` is the permanental
//! cofactor matrix of `H`. For `Δ = 𝔼` this is `v†Fv − perm(H)`, so the
//! extreme directions are the extreme eigenvectors of `F`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{BunchError, Result};
use crate::matcore::{
    gram_from_vectors_with, hadamard, hermitian_eig, CVector, ComplexMatrix, GramMatrix,
    Tolerances, ONE, ZERO,
};
use crate::permanent::{f_matrix, permanent, FMatrix, MAX_RYSER_ORDER};

/// Largest photon number for which `d(S)` is evaluated.
pub const MAX_INDISTINGUISHABILITY_ORDER: usize = 16;

/// Unit-norm internal states of `n` photons in a common `d`-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct InternalStateFamily {
    vectors: Vec<CVector>,
}

impl InternalStateFamily {
    pub fn new(vectors: Vec<CVector>) -> Result<Self> {
        let tol = Tolerances::default();
        let Some(first) = vectors.first() else {
            return Err(BunchError::Dimension("no photons".into()));
        };
        let d = first.len();
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != d {
                return Err(BunchError::Dimension(format!(
                    "state {i} has dimension {}, expected {d}",
                    v.len()
                )));
            }
            if (v.norm() - 1.0).abs() > tol.unit_norm {
                return Err(BunchError::Validation(format!(
                    "state {i} has norm {}",
                    v.norm()
                )));
            }
        }
        Ok(Self { vectors })
    }

    /// `n` copies of the same state.
    pub fn identical(state: CVector, n: usize) -> Result<Self> {
        Self::new(vec![state; n])
    }

    /// Photon `i` in basis state `i`, pairwise orthogonal.
    pub fn orthogonal(n: usize) -> Self {
        let vectors = (0..n)
            .map(|i| CVector::from_fn(n, |k, _| if k == i { ONE } else { ZERO }))
            .collect();
        Self { vectors }
    }

    pub fn photons(&self) -> usize {
        self.vectors.len()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn vectors(&self) -> &[CVector] {
        &self.vectors
    }

    pub fn gram(&self) -> Result<GramMatrix> {
        gram_from_vectors_with(&self.vectors, &Tolerances::default())
    }
}

/// How the perturbation directions `|η_i⟩` are given.
#[derive(Debug, Clone)]
pub enum PerturbationSource {
    /// Only their Gram matrix `Δ_ij = ⟨η_i|η_j⟩`.
    Gram(GramMatrix),
    /// The unit vectors themselves.
    Vectors(Vec<CVector>),
}

/// A perturbation `|φ₀⟩ + ε v_i |η_i⟩` of identical photons.
#[derive(Debug, Clone)]
pub struct PerturbationSpec {
    pub epsilon: f64,
    pub v: CVector,
    pub delta: PerturbationSource,
    /// Whether `⟨η_i|φ₀⟩ = 0` is assumed for every photon.
    pub orthogonal: bool,
}

impl PerturbationSpec {
    pub fn new(epsilon: f64, v: CVector, delta: PerturbationSource, orthogonal: bool) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(BunchError::Range(format!("epsilon must be >= 0, got {epsilon}")));
        }
        if (v.norm() - 1.0).abs() > Tolerances::default().unit_norm {
            return Err(BunchError::Validation(format!(
                "direction vector must have unit norm, got {}",
                v.norm()
            )));
        }
        let n = match &delta {
            PerturbationSource::Gram(g) => g.order(),
            PerturbationSource::Vectors(vs) => {
                gram_from_vectors_with(vs, &Tolerances::default())?;
                vs.len()
            }
        };
        if n != v.len() {
            return Err(BunchError::Dimension(format!(
                "direction has {} components for {n} perturbation states",
                v.len()
            )));
        }
        Ok(Self { epsilon, v, delta, orthogonal })
    }

    /// Orthogonal perturbation along a Gram matrix.
    pub fn orthogonal_gram(epsilon: f64, v: CVector, delta: GramMatrix) -> Result<Self> {
        Self::new(epsilon, v, PerturbationSource::Gram(delta), true)
    }

    pub fn photons(&self) -> usize {
        self.v.len()
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(epsilon, self.v.clone(), self.delta.clone(), self.orthogonal)
    }

    pub fn delta_gram(&self) -> Result<GramMatrix> {
        match &self.delta {
            PerturbationSource::Gram(g) => Ok(g.clone()),
            PerturbationSource::Vectors(vs) => gram_from_vectors_with(vs, &Tolerances::default()),
        }
    }
}

fn check_pair(h: &ComplexMatrix, n: usize) -> Result<()> {
    if !h.is_square() || h.rows() != n {
        return Err(BunchError::Dimension(format!(
            "H is {}x{} but there are {n} photons",
            h.rows(),
            h.cols()
        )));
    }
    Ok(())
}

/// `P_n(S) = perm(H ⊙ S)`, equivalently `perm(Hᵀ ⊙ Sᵀ)`, with
/// `H_ab = Σ_{l∈K} conj(U_la) U_lb` and `S_ij = ⟨φ_i|φ_j⟩`.
pub fn bunching_probability(h: &ComplexMatrix, s: &GramMatrix) -> Result<f64> {
    check_pair(h, s.order())?;
    if s.order() > MAX_RYSER_ORDER {
        return Err(BunchError::Size(format!("{} photons", s.order())));
    }
    let p = permanent(&hadamard(h, s.matrix())?)?;
    if p.im.abs() > 1e-10 * (1.0 + p.norm()) {
        return Err(BunchError::Numeric(format!(
            "bunching probability has imaginary part {:.3e}",
            p.im
        )));
    }
    if !(-1e-10..=1.0 + 1e-10).contains(&p.re) {
        return Err(BunchError::Numeric(format!(
            "bunching probability {} outside [0, 1]",
            p.re
        )));
    }
    Ok(p.re)
}

/// `d(S) = perm(S) / n!`, the weight of the fully symmetric component.
pub fn indistinguishability(s: &GramMatrix) -> Result<f64> {
    let n = s.order();
    if n > MAX_INDISTINGUISHABILITY_ORDER {
        return Err(BunchError::Size(format!(
            "indistinguishability limited to n <= {MAX_INDISTINGUISHABILITY_ORDER}, got {n}"
        )));
    }
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    Ok(permanent(s.matrix())?.re / fact)
}

/// Normalized states `(|φ₀⟩ + ε v_i |η_i⟩) / ‖·‖`.
///
/// The normalization is the exact norm of each vector, which reduces to
/// `√(1 + 2ε Re(v_i⟨φ₀|η_i⟩) + ε²|v_i|²)` for unit `|η_i⟩`.
pub fn perturbed_states(phi0: &CVector, spec: &PerturbationSpec) -> Result<InternalStateFamily> {
    if (phi0.norm() - 1.0).abs() > Tolerances::default().unit_norm {
        return Err(BunchError::Validation("reference state must have unit norm".into()));
    }
    let PerturbationSource::Vectors(etas) = &spec.delta else {
        return Err(BunchError::Validation(
            "explicit perturbation vectors are required to build states".into(),
        ));
    };
    let mut out = Vec::with_capacity(etas.len());
    for (i, eta) in etas.iter().enumerate() {
        if eta.len() != phi0.len() {
            return Err(BunchError::Validation(format!(
                "perturbation {i} has dimension {}, reference state {}",
                eta.len(),
                phi0.len()
            )));
        }
        let mut psi = phi0 + eta * (spec.v[i] * spec.epsilon);
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(BunchError::Degenerate(format!("perturbed state {i} vanishes")));
        }
        psi /= Complex64::new(norm, 0.0);
        out.push(psi);
    }
    InternalStateFamily::new(out)
}

/// Exact Gram matrix of an orthogonal perturbation,
/// `S̃_ij = (1 + ε² conj(v_i) v_j Δ_ij) / √((1 + ε²|v_i|²)(1 + ε²|v_j|²))`.
pub fn perturbed_gram(spec: &PerturbationSpec) -> Result<GramMatrix> {
    if !spec.orthogonal {
        return Err(BunchError::Validation(
            "closed-form Gram matrix needs an orthogonal perturbation".into(),
        ));
    }
    perturbed_gram_at(spec.epsilon, &spec.v, &spec.delta_gram()?)
}

pub(crate) fn perturbed_gram_at(eps: f64, v: &CVector, delta: &GramMatrix) -> Result<GramMatrix> {
    let n = v.len();
    if delta.order() != n {
        return Err(BunchError::Dimension(format!(
            "Δ is {0}x{0} for a direction of length {n}",
            delta.order()
        )));
    }
    let e2 = eps * eps;
    let norms: Vec<f64> = v.iter().map(|z| (1.0 + e2 * z.norm_sqr()).sqrt()).collect();
    let d = delta.matrix();
    let s = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            ONE
        } else {
            (ONE + v[i].conj() * v[j] * d[(i, j)] * e2) / (norms[i] * norms[j])
        }
    });
    GramMatrix::new(s)
}

/// Uniform interpolation towards full distinguishability,
/// `|φ̃_i⟩ = √(1 − ε²/n)|φ₀⟩ + (ε/√n)|η_i⟩` with orthonormal `|η_i⟩`.
pub fn interpolation_gram(n: usize, epsilon: f64) -> Result<GramMatrix> {
    let top = (n as f64).sqrt();
    if !(0.0..=top).contains(&epsilon) {
        return Err(BunchError::Range(format!(
            "epsilon must lie in [0, √{n}], got {epsilon}"
        )));
    }
    let off = (1.0 - epsilon * epsilon / n as f64).max(0.0);
    let s = ComplexMatrix::from_fn(n, n, |i, j| if i == j { ONE } else { off.into() });
    GramMatrix::new(s)
}

/// The `ε²` coefficient of the bunching change under an orthogonal
/// perturbation, `Σ_ij (conj(v_i) v_j Δ_ij − |v_i|²/2 − |v_j|²/2) F_ij`.
pub fn predicted_delta_p(h: &ComplexMatrix, spec: &PerturbationSpec) -> Result<f64> {
    check_pair(h, spec.photons())?;
    if !spec.orthogonal {
        return Err(BunchError::Validation(
            "the second-order coefficient assumes an orthogonal perturbation".into(),
        ));
    }
    let f = f_matrix(h)?;
    predicted_from_f(&f, &spec.v, &spec.delta_gram()?)
}

pub(crate) fn predicted_from_f(f: &FMatrix, v: &CVector, delta: &GramMatrix) -> Result<f64> {
    let n = f.order();
    if v.len() != n || delta.order() != n {
        return Err(BunchError::Dimension("F, v and Δ orders differ".into()));
    }
    let d = delta.matrix();
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let x = v[i].conj() * v[j] * d[(i, j)] - 0.5 * (v[i].norm_sqr() + v[j].norm_sqr());
            total += x * f.matrix[(i, j)];
        }
    }
    Ok(total.re)
}

/// Extreme perturbation directions of a setup.
///
/// `v_max` and `v_min` are ready to use as perturbation weights: with
/// `Δ = 𝔼` they give second-order coefficients `λ_max(F) − perm(H)` and
/// `λ_min(F) − perm(H)`. They are the extreme eigenvectors of `F`,
/// phase-fixed so the largest component is real positive.
#[derive(Debug, Clone, Serialize)]
pub struct OptimalDirections {
    #[serde(serialize_with = "crate::io::serialize_cvector")]
    pub v_max: CVector,
    #[serde(serialize_with = "crate::io::serialize_cvector")]
    pub v_min: CVector,
    pub lambda_max: f64,
    pub lambda_min: f64,
    pub perm_h: f64,
    /// The top eigenvalue is repeated within `1e-10` relative.
    pub degenerate_max: bool,
    pub degenerate_min: bool,
}

pub fn optimal_directions(h: &ComplexMatrix) -> Result<OptimalDirections> {
    let f = f_matrix(h)?;
    directions_from_f(&f)
}

pub(crate) fn directions_from_f(f: &FMatrix) -> Result<OptimalDirections> {
    let eig = hermitian_eig(&f.matrix)?;
    let n = eig.eigenvalues.len();
    let scale = eig.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
    let gap_tol = 1e-10 * scale.max(f64::MIN_POSITIVE);
    let (degenerate_max, degenerate_min) = if n == 1 {
        (false, false)
    } else {
        (
            eig.eigenvalues[n - 1] - eig.eigenvalues[n - 2] < gap_tol,
            eig.eigenvalues[1] - eig.eigenvalues[0] < gap_tol,
        )
    };
    Ok(OptimalDirections {
        v_max: eig.vector(n - 1),
        v_min: eig.vector(0),
        lambda_max: eig.max(),
        lambda_min: eig.min(),
        perm_h: f.source_perm.re,
        degenerate_max,
        degenerate_min,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub epsilon: f64,
    pub p_bunch: f64,
    pub ratio: f64,
    pub indistinguishability: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ScanMetadata {
    pub setup: String,
    pub direction: String,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
    pub perm_h: f64,
    pub metadata: ScanMetadata,
}

impl ScanResult {
    /// Row with the largest ratio; the first one on ties.
    pub fn peak(&self) -> &ScanRow {
        self.rows
            .iter()
            .fold(&self.rows[0], |best, r| if r.ratio > best.ratio { r } else { best })
    }

    pub fn argmax_epsilon(&self) -> f64 {
        self.peak().epsilon
    }
}

/// `steps` evenly spaced points from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![lo];
    }
    (0..steps)
        .map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64)
        .collect()
}

/// 51 points on `[0, 2.5]`.
pub fn default_grid() -> Vec<f64> {
    linear_grid(0.0, 2.5, 51)
}

/// Bunching probability, ratio to `perm(H)` and indistinguishability of the
/// exact perturbed Gram matrix at every grid point.
pub fn epsilon_scan(
    h: &ComplexMatrix,
    v: &CVector,
    delta: &GramMatrix,
    grid: &[f64],
) -> Result<ScanResult> {
    check_pair(h, v.len())?;
    if grid.is_empty() {
        return Err(BunchError::Validation("empty epsilon grid".into()));
    }
    if grid.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
        return Err(BunchError::Validation("epsilon values must be >= 0".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(BunchError::Validation("epsilon grid must be ascending".into()));
    }
    if (v.norm() - 1.0).abs() > Tolerances::default().unit_norm {
        return Err(BunchError::Validation("direction must have unit norm".into()));
    }
    let perm_h = permanent(h)?.re;
    if perm_h.abs() < 1e-300 {
        return Err(BunchError::Degenerate("perm(H) vanishes; ratio undefined".into()));
    }
    let rows = grid
        .par_iter()
        .map(|&eps| {
            let s = perturbed_gram_at(eps, v, delta)?;
            let p = bunching_probability(h, &s)?;
            Ok(ScanRow {
                epsilon: eps,
                p_bunch: p,
                ratio: p / perm_h,
                indistinguishability: indistinguishability(&s)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanResult { rows, perm_h, metadata: ScanMetadata::default() })
}

/// Second-order coefficient measured from exact probabilities:
/// `g(ε) = (P(ε) − P(0))/ε²` at `ε` and `ε/10`, Richardson-extrapolated
/// to remove the `O(ε²)` term.
pub fn measured_delta_p(h: &ComplexMatrix, v: &CVector, delta: &GramMatrix, eps: f64) -> Result<f64> {
    let p0 = bunching_probability(h, &GramMatrix::ones(v.len()))?;
    let g = |e: f64| -> Result<f64> {
        let p = bunching_probability(h, &perturbed_gram_at(e, v, delta)?)?;
        Ok((p - p0) / (e * e))
    };
    let coarse = g(eps)?;
    let fine = g(eps / 10.0)?;
    Ok((100.0 * fine - coarse) / 99.0)
}
