//! Thresholded quantum subspace diagonalization (QSD) at desk scale.
//!
//! The crate builds model Hamiltonians, simulates the unitary Krylov
//! projection exactly, injects measurement-style noise into the projected
//! pair, and solves the resulting nearly singular generalized eigenvalue
//! problem by truncating the overlap spectrum. The [`bounds`] module carries
//! the perturbation and a-priori error estimates used to validate the
//! solver, and [`experiment`] drives reproducible CSV sweeps.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod models;
pub mod noise;
pub mod pair_io;
pub mod qsd;
pub mod threshold;

pub use error::{Error, Result};
pub use linalg::{C64, CMatrix, CVector, EigenSystem, GenEigSolution, HermitianMatrix};
pub use qsd::{DefinitePair, PairProvenance, QsdInstance, TimeGrid};
pub use threshold::{threshold_solve, ThresholdReport};
