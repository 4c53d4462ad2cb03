//! Brute-force Fock-space simulation of photons with internal states.
//!
//! Expands `∏_j (Σ_k c_kj a†_{j,k})|0⟩` through the interferometer one
//! creation operator at a time. It never forms `H ⊙ S`, so it serves as an
//! independent check on the permanent formula for small instances.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::distinguishability::InternalStateFamily;
use crate::error::{BunchError, Result};
use crate::interferometry::Interferometer;
use crate::matcore::{cholesky_gram, ZERO};

pub const MAX_ORACLE_PHOTONS: usize = 4;
pub const MAX_ORACLE_MODES: usize = 6;

/// A Fock basis state over composite modes `(spatial l, internal k)` with
/// its amplitude in the output state.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    pub modes: usize,
    pub internal_dim: usize,
    /// Photon count of composite mode `l * internal_dim + k`.
    pub occupation: Vec<usize>,
    pub amplitude: Complex64,
}

impl FockState {
    pub fn spatial_occupation(&self) -> Vec<usize> {
        self.occupation
            .chunks(self.internal_dim)
            .map(|c| c.iter().sum())
            .collect()
    }

    pub fn probability(&self) -> f64 {
        self.amplitude.norm_sqr()
    }
}

fn check_caps(u: &Interferometer, states: &InternalStateFamily) -> Result<()> {
    let n = states.photons();
    let m = u.modes();
    if n > MAX_ORACLE_PHOTONS || m > MAX_ORACLE_MODES {
        return Err(BunchError::Size(format!(
            "oracle limited to {MAX_ORACLE_PHOTONS} photons in {MAX_ORACLE_MODES} modes, got {n} in {m}"
        )));
    }
    if n > m {
        return Err(BunchError::Dimension(format!("{n} photons need at least {n} modes")));
    }
    Ok(())
}

/// Output state for photons entering modes `0..n`, one entry per occupied
/// Fock basis state, ordered by canonical occupation.
pub fn output_state(u: &Interferometer, states: &InternalStateFamily) -> Result<Vec<FockState>> {
    check_caps(u, states)?;
    let gram = states.gram()?;
    // Row k of the factor holds the coordinates of every photon along the
    // k-th orthonormal internal basis vector.
    let coords = cholesky_gram(&gram)?;
    let d = coords.rows();
    let m = u.modes();
    let uu = u.unitary();

    // Keys are sorted lists of composite mode indices, one per photon.
    let mut terms: BTreeMap<Vec<usize>, Complex64> = BTreeMap::new();
    terms.insert(Vec::new(), Complex64::new(1.0, 0.0));
    for photon in 0..states.photons() {
        let mut next: BTreeMap<Vec<usize>, Complex64> = BTreeMap::new();
        for (key, amp) in &terms {
            for l in 0..m {
                let route = uu[(l, photon)];
                if route == ZERO {
                    continue;
                }
                for k in 0..d {
                    let c = coords[(k, photon)];
                    if c == ZERO {
                        continue;
                    }
                    let mode = l * d + k;
                    let mut grown = key.clone();
                    let at = grown.partition_point(|&x| x <= mode);
                    grown.insert(at, mode);
                    *next.entry(grown).or_insert(ZERO) += amp * route * c;
                }
            }
        }
        terms = next;
    }

    let out = terms
        .into_iter()
        .map(|(key, coeff)| {
            let mut occupation = vec![0usize; m * d];
            for &mode in &key {
                occupation[mode] += 1;
            }
            let norm: f64 = occupation
                .iter()
                .map(|&c| (1..=c).map(|x| x as f64).product::<f64>())
                .product();
            FockState {
                modes: m,
                internal_dim: d,
                occupation,
                amplitude: coeff * norm.sqrt(),
            }
        })
        .collect();
    Ok(out)
}

/// Probability that every photon exits through a mode in `subset`.
pub fn fock_bunching_oracle(
    u: &Interferometer,
    subset: &[usize],
    states: &InternalStateFamily,
) -> Result<f64> {
    if subset.is_empty() || subset.iter().any(|&l| l >= u.modes()) {
        return Err(BunchError::Validation(format!(
            "bad output subset {subset:?} for {} modes",
            u.modes()
        )));
    }
    let fock = output_state(u, states)?;
    Ok(fock
        .iter()
        .filter(|s| {
            s.spatial_occupation()
                .iter()
                .enumerate()
                .all(|(l, &c)| c == 0 || subset.contains(&l))
        })
        .map(FockState::probability)
        .sum())
}

/// Probability of every spatial occupation pattern, internal modes traced out.
/// Patterns with zero probability are listed too; order is lexicographic.
pub fn output_distribution(
    u: &Interferometer,
    states: &InternalStateFamily,
) -> Result<Vec<(Vec<usize>, f64)>> {
    let fock = output_state(u, states)?;
    let mut dist: BTreeMap<Vec<usize>, f64> = compositions(states.photons(), u.modes())
        .into_iter()
        .map(|c| (c, 0.0))
        .collect();
    for s in &fock {
        *dist.entry(s.spatial_occupation()).or_insert(0.0) += s.probability();
    }
    Ok(dist.into_iter().collect())
}

/// All ways to place `n` identical photons into `m` modes.
fn compositions(n: usize, m: usize) -> Vec<Vec<usize>> {
    if m == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in 0..=n {
        for mut rest in compositions(n - first, m - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}
