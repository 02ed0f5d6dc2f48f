//! Exponential Runge-Kutta schemes and a classical RK4 comparator.
//!
//! A scheme with nodes `c_i` advances `y_n` by
//! `Y_i = e^{c_iτA}y_n + τ Σ_j a_ij(τA) F(Y_j)` and
//! `y_{n+1} = e^{τA}y_n + τ Σ_i b_i(τA) F(Y_i)`,
//! where `a_ij` and `b_i` are combinations of φ-functions.

mod rk4;
mod solve;
mod tableau;

pub use rk4::rk4_baseline_solve;
pub use solve::{merged_damping_solve, solve, solve_from, step, step_with_forcing, ForcingFn, SolveResult, SolveStats};
pub use tableau::{
    build_tableau, check_identities, normalize, symbolic_tableau, IdentityFailure, PhiCombination, SchemeId, SchemeTableau,
    SymbolicTableau, Weight,
};

#[cfg(test)]
mod tests;
