//! Rectangular coupler mesh decomposition of a unitary.
//!
//! A coupler on modes `(p, p+1)` acts as
//! `T(θ, φ) = [[e^{iφ} cos θ, −sin θ], [e^{iφ} sin θ, cos θ]]`.
//! The decomposition nulls the lower triangle alternately from the right
//! (with `T†`) and from the left (with `T`), then commutes the left-hand
//! couplers through the residual diagonal so that
//! `U = D · T_last ⋯ T_first`.

use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Interferometer;
use crate::error::{BunchError, Result};
use crate::matcore::ComplexMatrix;

/// One two-mode coupler acting on modes `(mode, mode + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coupler {
    pub mode: usize,
    /// In `[0, π/2]`; transmissivity is `cos θ`.
    pub theta: f64,
    /// In `[0, 2π)`.
    pub phi: f64,
}

impl Coupler {
    fn block(&self) -> [[Complex64; 2]; 2] {
        let e = Complex64::from_polar(1.0, self.phi);
        let (s, c) = self.theta.sin_cos();
        [[e * c, (-s).into()], [e * s, c.into()]]
    }

    /// True for `θ = 0, φ = 0` within `tol`.
    pub fn is_identity(&self, tol: f64) -> bool {
        self.theta.abs() <= tol && wrap_phase(self.phi + tol) <= 2.0 * tol
    }
}

/// Couplers in the order light meets them, followed by per-mode output phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamsplitterMesh {
    pub modes: usize,
    pub couplers: Vec<Coupler>,
    pub output_phases: Vec<f64>,
}

impl BeamsplitterMesh {
    pub fn nontrivial_count(&self, tol: f64) -> usize {
        self.couplers.iter().filter(|c| !c.is_identity(tol)).count()
    }
}

fn wrap_phase(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

fn apply_left(u: &mut DMatrix<Complex64>, c: &Coupler) {
    let t = c.block();
    let p = c.mode;
    for col in 0..u.ncols() {
        let (a, b) = (u[(p, col)], u[(p + 1, col)]);
        u[(p, col)] = t[0][0] * a + t[0][1] * b;
        u[(p + 1, col)] = t[1][0] * a + t[1][1] * b;
    }
}

/// `u ← u · T†` on columns `(p, p+1)`.
fn apply_right_inverse(u: &mut DMatrix<Complex64>, c: &Coupler) {
    let t = c.block();
    let p = c.mode;
    for row in 0..u.nrows() {
        let (a, b) = (u[(row, p)], u[(row, p + 1)]);
        u[(row, p)] = a * t[0][0].conj() + b * t[0][1].conj();
        u[(row, p + 1)] = a * t[1][0].conj() + b * t[1][1].conj();
    }
}

/// Coupler on columns `(p, p+1)` that zeroes `u[row, p]` under `u · T†`.
fn null_from_right(u: &DMatrix<Complex64>, row: usize, p: usize) -> Coupler {
    let (a, b) = (u[(row, p)], u[(row, p + 1)]);
    if a.norm() == 0.0 {
        return Coupler { mode: p, theta: 0.0, phi: 0.0 };
    }
    let theta = a.norm().atan2(b.norm());
    let phi = if b.norm() == 0.0 { 0.0 } else { a.arg() - b.arg() };
    Coupler { mode: p, theta, phi: wrap_phase(phi) }
}

/// Coupler on rows `(p, p+1)` that zeroes `u[p+1, col]` under `T · u`.
fn null_from_left(u: &DMatrix<Complex64>, p: usize, col: usize) -> Coupler {
    let (a, b) = (u[(p, col)], u[(p + 1, col)]);
    if b.norm() == 0.0 {
        return Coupler { mode: p, theta: 0.0, phi: 0.0 };
    }
    let theta = b.norm().atan2(a.norm());
    let phi = if a.norm() == 0.0 { 0.0 } else { (-b).arg() - a.arg() };
    Coupler { mode: p, theta, phi: wrap_phase(phi) }
}

pub fn clements_decompose(u: &Interferometer) -> Result<BeamsplitterMesh> {
    let n = u.modes();
    if u.unitary().unitarity_defect() > 1e-8 {
        return Err(BunchError::Validation("matrix is not unitary".into()));
    }
    let mut work = u.unitary().as_dmatrix().clone();
    let mut right = Vec::new();
    let mut left = Vec::new();
    for i in 0..n.saturating_sub(1) {
        if i % 2 == 0 {
            for j in 0..=i {
                let c = null_from_right(&work, n - 1 - j, i - j);
                apply_right_inverse(&mut work, &c);
                right.push(c);
            }
        } else {
            for j in 1..=(i + 1) {
                let c = null_from_left(&work, n + j - i - 3, j - 1);
                apply_left(&mut work, &c);
                left.push(c);
            }
        }
    }

    // U = L₁† ⋯ L_k† · D · R_r ⋯ R₁; commute each Lᵢ† through D.
    let mut diag: Vec<Complex64> = (0..n).map(|i| work[(i, i)]).collect();
    let mut moved = Vec::with_capacity(left.len());
    for c in left.iter().rev() {
        let p = c.mode;
        let (d1, d2) = (diag[p], diag[p + 1]);
        let e = Complex64::from_polar(1.0, -c.phi);
        if c.theta.sin() == 0.0 {
            diag[p] = e * d1;
            moved.push(Coupler { mode: p, theta: c.theta, phi: 0.0 });
        } else {
            let phase = -d1 / d2;
            diag[p] = -e * d2;
            moved.push(Coupler { mode: p, theta: c.theta, phi: wrap_phase(phase.arg()) });
        }
    }
    // moved = [T'_k, …, T'_1] with U = D' · T'_1 ⋯ T'_k · R_r ⋯ R_1.
    let mut couplers = right;
    couplers.extend(moved);
    Ok(BeamsplitterMesh {
        modes: n,
        couplers,
        output_phases: diag.iter().map(|d| wrap_phase(d.arg())).collect(),
    })
}

pub fn clements_reconstruct(mesh: &BeamsplitterMesh) -> Result<Interferometer> {
    let n = mesh.modes;
    if n == 0 {
        return Err(BunchError::Validation("mesh has no modes".into()));
    }
    if mesh.output_phases.len() != n {
        return Err(BunchError::Validation(format!(
            "mesh has {} output phases for {n} modes",
            mesh.output_phases.len()
        )));
    }
    let mut u = DMatrix::<Complex64>::identity(n, n);
    for c in &mesh.couplers {
        if c.mode + 1 >= n {
            return Err(BunchError::Validation(format!(
                "coupler on modes ({}, {}) outside a {n}-mode mesh",
                c.mode,
                c.mode + 1
            )));
        }
        if !(c.theta.is_finite() && c.phi.is_finite()) || !(0.0..=FRAC_PI_2 + 1e-12).contains(&c.theta)
        {
            return Err(BunchError::Validation(format!("bad coupler angles {c:?}")));
        }
        apply_left(&mut u, c);
    }
    for (i, &phase) in mesh.output_phases.iter().enumerate() {
        if !phase.is_finite() {
            return Err(BunchError::Validation("non-finite output phase".into()));
        }
        let rot = Complex64::from_polar(1.0, phase);
        for col in 0..n {
            u[(i, col)] *= rot;
        }
    }
    Interferometer::with_tolerance(ComplexMatrix::from_dmatrix(u)?, 1e-10)
}
