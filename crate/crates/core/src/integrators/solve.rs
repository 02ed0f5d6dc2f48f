//! Fixed-step drivers.
//!
//! Stages are carried in modal coordinates. Only the nonlinearity is
//! evaluated in physical space, so each nonlinear stage costs three dense
//! mat-vecs (`Qa`, `Qb`, `Qᵀf`) on top of `O(n)` block products.

use std::time::{Duration, Instant};

use serde::Serialize;

use super::tableau::SchemeTableau;
use crate::discretization::{GridOperator, ProblemSpec, StateVector};
use crate::error::{Error, Result};
use crate::propagator::{BlockPropagator, ModalVector, StepFunctionCache};

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SolveStats {
    pub steps: usize,
    /// Applications of some `φ_k(c·τA)` to a vector, the exponential included.
    pub phi_actions: usize,
    /// Block families computed (cache misses).
    pub block_evaluations: usize,
    #[serde(serialize_with = "as_secs")]
    pub wall_time: Duration,
}

fn as_secs<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub y_final: StateVector,
    pub snapshots: Vec<(f64, StateVector)>,
    pub stats: SolveStats,
}

/// Custom velocity forcing `out = f(u, w)`.
pub type ForcingFn<'a> = &'a (dyn Fn(&[f64], &[f64], &mut [f64]) + Sync);

/// Right-hand side of the velocity equation, optionally with the damping
/// terms moved out of the linear part.
#[derive(Clone, Copy)]
enum Forcing<'a> {
    Spec { spec: &'a ProblemSpec, moved_damping: Option<(&'a GridOperator, f64, f64)> },
    Custom(ForcingFn<'a>),
}

impl Forcing<'_> {
    fn is_zero(&self) -> bool {
        match self {
            Forcing::Spec { spec, moved_damping } => spec.is_linear() && moved_damping.is_none(),
            Forcing::Custom(_) => false,
        }
    }

    fn eval(&self, u: &[f64], w: &[f64], out: &mut [f64], scratch: &mut [f64]) {
        match self {
            Forcing::Spec { spec, moved_damping } => {
                spec.forcing_into(u, w, out);
                if let Some((s, beta, gamma)) = *moved_damping {
                    s.matvec_into(w, scratch);
                    for ((o, &sw), &wi) in out.iter_mut().zip(scratch.iter()).zip(w) {
                        *o -= beta * sw + gamma * wi;
                    }
                }
            }
            Forcing::Custom(f) => f(u, w, out),
        }
    }
}

struct Stepper<'a> {
    prop: &'a BlockPropagator,
    tableau: &'a SchemeTableau,
    forcing: Forcing<'a>,
    cache: StepFunctionCache,
    phi_actions: usize,
    // scratch
    u: Vec<f64>,
    w: Vec<f64>,
    f: Vec<f64>,
    tmp: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(prop: &'a BlockPropagator, tableau: &'a SchemeTableau, forcing: Forcing<'a>) -> Self {
        let n = prop.n();
        Stepper {
            prop,
            tableau,
            forcing,
            cache: StepFunctionCache::new(),
            phi_actions: 0,
            u: vec![0.0; n],
            w: vec![0.0; n],
            f: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }

    /// Modal image of `F(Y)`; only the velocity half is nonzero.
    fn modal_forcing(&mut self, y: &ModalVector) -> Vec<f64> {
        self.prop.expand_into(&y.a, &mut self.u);
        self.prop.expand_into(&y.b, &mut self.w);
        self.forcing.eval(&self.u, &self.w, &mut self.f, &mut self.tmp);
        self.prop.project(&self.f)
    }

    /// `e^{cτA}y + τ Σ_j Σ_(k,w) w·φ_k(cτA)·(0, f_j)`.
    fn combine(&mut self, tau: f64, c: f64, y: &ModalVector, terms: &[Vec<(usize, f64)>], fhat: &[Vec<f64>]) -> ModalVector {
        let n = self.prop.n();
        let fam = self.cache.get(self.prop, tau, c);
        let mut out = ModalVector::zeros(n);
        for (i, blocks) in fam.blocks.iter().enumerate() {
            let (a, b) = blocks[0].apply(y.a[i], y.b[i]);
            out.a[i] = a;
            out.b[i] = b;
        }
        self.phi_actions += 1;
        for (row, f) in terms.iter().zip(fhat) {
            for &(k, weight) in row {
                let s = tau * weight;
                for (i, blocks) in fam.blocks.iter().enumerate() {
                    let blk = &blocks[k];
                    out.a[i] += s * blk.a12 * f[i];
                    out.b[i] += s * blk.a22 * f[i];
                }
                self.phi_actions += 1;
            }
        }
        out
    }

    fn step(&mut self, tau: f64, y: &ModalVector) -> ModalVector {
        let tableau = self.tableau;
        let stages = tableau.stages();
        if self.forcing.is_zero() {
            return self.combine(tau, 1.0, y, &[], &[]);
        }
        let mut fhat: Vec<Vec<f64>> = Vec::with_capacity(stages);
        for i in 0..stages {
            let ci = tableau.c[i];
            let yi = if ci == 0.0 {
                y.clone()
            } else {
                self.combine(tau, ci, y, &tableau.a[i], &fhat[..i])
            };
            let f = self.modal_forcing(&yi);
            fhat.push(f);
        }
        self.combine(tau, 1.0, y, &tableau.b, &fhat)
    }
}

fn check_state(y: &ModalVector, step: usize, time: f64) -> Result<()> {
    if y.is_finite() {
        Ok(())
    } else {
        Err(Error::Instability { step, time })
    }
}

fn run(
    prop: &BlockPropagator,
    tableau: &SchemeTableau,
    forcing: Forcing<'_>,
    y0: &StateVector,
    t_final: f64,
    m: usize,
    snapshot_every: Option<usize>,
) -> Result<SolveResult> {
    if m == 0 {
        return Err(Error::InvalidParameter("number of steps must be at least 1".into()));
    }
    if snapshot_every == Some(0) {
        return Err(Error::InvalidParameter("snapshot cadence must be at least 1".into()));
    }
    let start = Instant::now();
    let tau = t_final / m as f64;
    let mut stepper = Stepper::new(prop, tableau, forcing);
    let mut y = prop.to_modal(y0)?;
    let mut snapshots = Vec::new();
    for step in 1..=m {
        y = stepper.step(tau, &y);
        let time = if step == m { t_final } else { step as f64 * tau };
        check_state(&y, step, time)?;
        if let Some(every) = snapshot_every {
            if step % every == 0 || step == m {
                snapshots.push((time, prop.from_modal(&y)));
            }
        }
    }
    Ok(SolveResult {
        y_final: prop.from_modal(&y),
        snapshots,
        stats: SolveStats {
            steps: m,
            phi_actions: stepper.phi_actions,
            block_evaluations: stepper.cache.misses(),
            wall_time: start.elapsed(),
        },
    })
}

/// One step of size `tau` from `y`.
pub fn step(prop: &BlockPropagator, tableau: &SchemeTableau, spec: &ProblemSpec, tau: f64, y: &StateVector) -> Result<StateVector> {
    check_coefficients(prop, spec)?;
    one_step(prop, tableau, Forcing::Spec { spec, moved_damping: None }, tau, y)
}

/// One step with the velocity forcing given by `f` instead of a problem's
/// nonlinearity.
pub fn step_with_forcing(
    prop: &BlockPropagator,
    tableau: &SchemeTableau,
    f: ForcingFn<'_>,
    tau: f64,
    y: &StateVector,
) -> Result<StateVector> {
    one_step(prop, tableau, Forcing::Custom(f), tau, y)
}

fn one_step(prop: &BlockPropagator, tableau: &SchemeTableau, forcing: Forcing<'_>, tau: f64, y: &StateVector) -> Result<StateVector> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!("step size must be positive, got {tau}")));
    }
    let mut stepper = Stepper::new(prop, tableau, forcing);
    let next = stepper.step(tau, &prop.to_modal(y)?);
    check_state(&next, 1, tau)?;
    Ok(prop.from_modal(&next))
}

/// `m` constant steps from `spec`'s initial data to `spec.t_final`.
pub fn solve(
    prop: &BlockPropagator,
    tableau: &SchemeTableau,
    spec: &ProblemSpec,
    m: usize,
    snapshot_every: Option<usize>,
) -> Result<SolveResult> {
    let y0 = spec.initial_state(prop.n());
    solve_from(prop, tableau, spec, &y0, m, snapshot_every)
}

/// As [`solve`], from an explicit initial state.
pub fn solve_from(
    prop: &BlockPropagator,
    tableau: &SchemeTableau,
    spec: &ProblemSpec,
    y0: &StateVector,
    m: usize,
    snapshot_every: Option<usize>,
) -> Result<SolveResult> {
    check_coefficients(prop, spec)?;
    run(prop, tableau, Forcing::Spec { spec, moved_damping: None }, y0, spec.t_final, m, snapshot_every)
}

/// Solves with `β = γ = 0` in the linear part and the damping terms
/// `-βSw - γw` added to the nonlinearity instead. `base` supplies the
/// factorization of `s`.
pub fn merged_damping_solve(
    s: &GridOperator,
    base: &BlockPropagator,
    tableau: &SchemeTableau,
    spec: &ProblemSpec,
    m: usize,
    snapshot_every: Option<usize>,
) -> Result<SolveResult> {
    spec.check_grid(s)?;
    if s.n() != base.n() {
        return Err(Error::DimensionMismatch { expected: base.n(), actual: s.n() });
    }
    let undamped = base.with_coefficients(spec.coefficients().undamped())?;
    let moved = if spec.beta == 0.0 && spec.gamma == 0.0 { None } else { Some((s, spec.beta, spec.gamma)) };
    let y0 = spec.initial_state(s.n());
    run(&undamped, tableau, Forcing::Spec { spec, moved_damping: moved }, &y0, spec.t_final, m, snapshot_every)
}

fn check_coefficients(prop: &BlockPropagator, spec: &ProblemSpec) -> Result<()> {
    if prop.coefficients() != spec.coefficients() {
        return Err(Error::InvalidParameter("propagator was built for different coefficients".into()));
    }
    Ok(())
}
