//! Multimode boson bunching of partially distinguishable photons.
//!
//! The probability that `n` photons all leave an interferometer through a
//! chosen set of output modes is `perm(H ⊙ S)`, where `H` depends only on
//! the circuit and `S` is the Gram matrix of the photons' internal states.
//! This crate computes that quantity, its second-order response to small
//! perturbations of `S`, and uses both to build and verify circuits in which
//! partial distinguishability *increases* bunching.
//!
//! ```
//! use bunchlab::interferometry::{h_matrix, Interferometer};
//! use bunchlab::distinguishability::{bunching_probability, InternalStateFamily};
//!
//! let u = Interferometer::balanced_coupler();
//! let setup = h_matrix(&u, &[0], 2).unwrap();
//! let s = InternalStateFamily::orthogonal(2).gram().unwrap();
//! let p = bunching_probability(&setup.h, &s).unwrap();
//! assert!((p - 0.25).abs() < 1e-12);
//! ```

pub mod cli;
pub mod conjectures;
pub mod distinguishability;
pub mod error;
pub mod interferometry;
pub mod io;
pub mod matcore;
pub mod oracle;
pub mod permanent;

pub use error::{BunchError, Result};
pub use matcore::{CVector, ComplexMatrix, GramMatrix, Tolerances};
