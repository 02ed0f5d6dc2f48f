//! Exponential integrators for damped semilinear wave and Kelvin-Voigt beam
//! equations.
//!
//! After spatial discretization both problems read `y' = A y + F(y)` with
//! `A = [[0, I], [-αS - δI, -βS - γI]]` and a symmetric `S`. Diagonalizing
//! `S = Q·diag(λ)·Qᵀ` and interleaving the two halves of the state turns `A`
//! into a block diagonal matrix of 2×2 blocks
//! `G_i = [[0, 1], [-αλ_i - δ, -βλ_i - γ]]`, whose exponential and
//! φ-functions have closed forms. [`BlockPropagator`] applies `φ_k(tA)` to a
//! state with four dense `n×n` mat-vecs plus `O(n)` work, and the schemes in
//! [`integrators`] build on it.

pub mod dense;
pub mod discretization;
pub mod eigen;
mod error;
pub mod experiment;
pub mod integrators;
pub mod modes;
pub mod oracle;
pub mod propagator;

pub use error::{Error, Result};
pub use propagator::{build_propagator, BlockPropagator};
