//! Classical explicit RK4 on `y' = Ay + F(y)` with `A` applied through the
//! banded operator. Used as a non-exponential comparator.

use std::time::Instant;

use super::solve::{SolveResult, SolveStats};
use crate::discretization::{GridOperator, ProblemSpec, StateVector};
use crate::error::{Error, Result};

/// `Ay + F(y)`, with `Ay = (w, -αSu - δu - βSw - γw)`.
fn rhs(s: &GridOperator, spec: &ProblemSpec, y: &StateVector, out: &mut StateVector, scratch: &mut [f64]) {
    out.u.copy_from_slice(&y.w);
    spec.forcing_into(&y.u, &y.w, &mut out.w);
    s.matvec_into(&y.u, scratch);
    for ((o, &su), &ui) in out.w.iter_mut().zip(scratch.iter()).zip(&y.u) {
        *o -= spec.alpha * su + spec.delta * ui;
    }
    s.matvec_into(&y.w, scratch);
    for ((o, &sw), &wi) in out.w.iter_mut().zip(scratch.iter()).zip(&y.w) {
        *o -= spec.beta * sw + spec.gamma * wi;
    }
}

fn combined(y: &StateVector, h: f64, k: &StateVector) -> StateVector {
    let mut out = y.clone();
    out.axpy(h, k);
    out
}

pub fn rk4_baseline_solve(s: &GridOperator, spec: &ProblemSpec, m: usize) -> Result<SolveResult> {
    spec.check_grid(s)?;
    if m == 0 {
        return Err(Error::InvalidParameter("number of steps must be at least 1".into()));
    }
    let start = Instant::now();
    let n = s.n();
    let tau = spec.t_final / m as f64;
    let mut y = spec.initial_state(n);
    let mut scratch = vec![0.0; n];
    let mut k1 = StateVector::zeros(n);
    let mut k2 = StateVector::zeros(n);
    let mut k3 = StateVector::zeros(n);
    let mut k4 = StateVector::zeros(n);
    for step in 1..=m {
        rhs(s, spec, &y, &mut k1, &mut scratch);
        rhs(s, spec, &combined(&y, 0.5 * tau, &k1), &mut k2, &mut scratch);
        rhs(s, spec, &combined(&y, 0.5 * tau, &k2), &mut k3, &mut scratch);
        rhs(s, spec, &combined(&y, tau, &k3), &mut k4, &mut scratch);
        y.axpy(tau / 6.0, &k1);
        y.axpy(tau / 3.0, &k2);
        y.axpy(tau / 3.0, &k3);
        y.axpy(tau / 6.0, &k4);
        if !y.is_finite() {
            let time = if step == m { spec.t_final } else { step as f64 * tau };
            return Err(Error::Instability { step, time });
        }
    }
    Ok(SolveResult {
        y_final: y,
        snapshots: Vec::new(),
        stats: SolveStats { steps: m, phi_actions: 0, block_evaluations: 0, wall_time: start.elapsed() },
    })
}
