//! Finite-difference operators, grids, initial data and nonlinearities.

mod nonlinearity;
mod operator;
mod problem;
mod profile;

pub use nonlinearity::Nonlinearity;
pub use operator::{build_beam_operator, build_operator, build_wave_operator, EquationKind, GridOperator};
pub use problem::{apply_nonlinearity, Coefficients, ProblemSpec, StateVector};
pub use profile::{sample_profile, Profile, ProfileKind};
