use serde::{Deserialize, Serialize};

use super::nonlinearity::Nonlinearity;
use super::operator::{EquationKind, GridOperator};
use super::profile::Profile;
use crate::error::{Error, Result};

/// The four linear coefficients of
/// `A = [[0, I], [-αS - δI, -βS - γI]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl Coefficients {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        let c = Coefficients { alpha, beta, gamma, delta };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.alpha, self.beta, self.gamma, self.delta];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("coefficients must be finite".into()));
        }
        if self.alpha <= 0.0 {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {}", self.alpha)));
        }
        for (name, v) in [("beta", self.beta), ("gamma", self.gamma), ("delta", self.delta)] {
            if v < 0.0 {
                return Err(Error::InvalidParameter(format!("{name} must be non-negative, got {v}")));
            }
        }
        Ok(())
    }

    /// Same stiffness and mass terms with both damping terms removed.
    pub fn undamped(&self) -> Self {
        Coefficients { beta: 0.0, gamma: 0.0, ..*self }
    }
}

/// A damped semilinear second-order problem
/// `u_tt + αSu + βSu_t + γu_t + δu = g(u) + h(u_t)`, `u(0) = p`, `u_t(0) = q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub kind: EquationKind,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub g: Nonlinearity,
    #[serde(default = "zero_nonlinearity")]
    pub h: Nonlinearity,
    pub p: Profile,
    pub q: Profile,
    pub ell: f64,
    pub t_final: f64,
}

fn zero_nonlinearity() -> Nonlinearity {
    Nonlinearity::Zero
}

impl ProblemSpec {
    pub fn coefficients(&self) -> Coefficients {
        Coefficients { alpha: self.alpha, beta: self.beta, gamma: self.gamma, delta: self.delta }
    }

    pub fn validate(&self) -> Result<()> {
        self.coefficients().validate()?;
        if !(self.ell > 0.0 && self.ell.is_finite()) {
            return Err(Error::InvalidParameter(format!("domain length must be positive, got {}", self.ell)));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidParameter(format!("final time must be positive, got {}", self.t_final)));
        }
        Ok(())
    }

    pub fn is_linear(&self) -> bool {
        self.g.is_zero() && self.h.is_zero()
    }

    /// The same problem with `g = h = 0`.
    pub fn linear_part(&self) -> Self {
        ProblemSpec { g: Nonlinearity::Zero, h: Nonlinearity::Zero, ..self.clone() }
    }

    pub fn initial_state(&self, n: usize) -> StateVector {
        StateVector { u: self.p.sample(n, self.ell), w: self.q.sample(n, self.ell) }
    }

    /// Writes `g(u) + h(w)` (the only nonzero block of `F`) into `out`.
    pub fn forcing_into(&self, u: &[f64], w: &[f64], out: &mut [f64]) {
        let (g, h) = (self.g, self.h);
        for ((o, &ui), &wi) in out.iter_mut().zip(u).zip(w) {
            *o = g.eval(ui) + h.eval(wi);
        }
    }

    pub fn check_grid(&self, op: &GridOperator) -> Result<()> {
        if op.kind() != self.kind {
            return Err(Error::InvalidParameter(format!(
                "problem is a {} equation but the operator discretizes a {}",
                self.kind,
                op.kind()
            )));
        }
        if (op.ell() - self.ell).abs() > 1e-12 * self.ell {
            return Err(Error::InvalidParameter(format!(
                "operator domain length {} differs from problem domain length {}",
                op.ell(),
                self.ell
            )));
        }
        Ok(())
    }
}

/// Stacked state `(u, w)` at the interior nodes, `w ≈ u_t`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub u: Vec<f64>,
    pub w: Vec<f64>,
}

impl StateVector {
    pub fn new(u: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        if u.len() != w.len() {
            return Err(Error::DimensionMismatch { expected: u.len(), actual: w.len() });
        }
        Ok(StateVector { u, w })
    }

    pub fn zeros(n: usize) -> Self {
        StateVector { u: vec![0.0; n], w: vec![0.0; n] }
    }

    /// Splits a stacked `[u; w]` slice of even length.
    pub fn from_stacked(v: &[f64]) -> Result<Self> {
        if v.len() % 2 != 0 {
            return Err(Error::InvalidDimension(format!("stacked state has odd length {}", v.len())));
        }
        let n = v.len() / 2;
        Ok(StateVector { u: v[..n].to_vec(), w: v[n..].to_vec() })
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn stacked(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.len());
        v.extend_from_slice(&self.u);
        v.extend_from_slice(&self.w);
        v
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.u.iter().chain(self.w.iter())
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `self += a·x`
    pub fn axpy(&mut self, a: f64, x: &StateVector) {
        for (s, v) in self.u.iter_mut().zip(&x.u) {
            *s += a * v;
        }
        for (s, v) in self.w.iter_mut().zip(&x.w) {
            *s += a * v;
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        StateVector { u: self.u.iter().map(|v| a * v).collect(), w: self.w.iter().map(|v| a * v).collect() }
    }
}

/// `F(u, w) = (0, g(u) + h(w))`.
pub fn apply_nonlinearity(spec: &ProblemSpec, y: &StateVector) -> StateVector {
    let mut f = StateVector::zeros(y.len());
    spec.forcing_into(&y.u, &y.w, &mut f.w);
    f
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use super::*;

    fn spec(g: Nonlinearity, h: Nonlinearity) -> ProblemSpec {
        ProblemSpec {
            kind: EquationKind::Wave,
            alpha: 1.0,
            beta: 0.0,
            gamma: 0.0,
            delta: 0.0,
            g,
            h,
            p: Profile::zero(),
            q: Profile::zero(),
            ell: 1.0,
            t_final: 1.0,
        }
    }

    #[test]
    fn sine_gordon_forcing() {
        let y = StateVector::new(vec![0.0, FRAC_PI_2], vec![3.0, -7.0]).unwrap();
        let f = apply_nonlinearity(&spec(Nonlinearity::Sin, Nonlinearity::Zero), &y);
        assert_eq!(f.u, vec![0.0, 0.0]);
        assert_eq!(f.w, vec![0.0, 1.0]);
    }

    #[test]
    fn signed_square() {
        let y = StateVector::new(vec![-2.0, 3.0], vec![0.0, 0.0]).unwrap();
        let f = apply_nonlinearity(&spec(Nonlinearity::XAbsX, Nonlinearity::Zero), &y);
        assert_eq!(f.w, vec![-4.0, 9.0]);
    }

    #[test]
    fn both_nonlinearities() {
        let y = StateVector::new(vec![1.0], vec![-2.0]).unwrap();
        let f = apply_nonlinearity(&spec(Nonlinearity::NegXAbsXCubed, Nonlinearity::NegXAbsX), &y);
        assert_eq!(f.w, vec![3.0]);
    }

    #[test]
    fn coefficient_validation() {
        assert!(Coefficients::new(0.0, 0.0, 0.0, 0.0).is_err());
        assert!(Coefficients::new(1.0, -1e-3, 0.0, 0.0).is_err());
        assert!(Coefficients::new(1.0, 0.0, 0.0, -1.0).is_err());
        assert!(Coefficients::new(1.0, 0.0, f64::NAN, 0.0).is_err());
        assert!(Coefficients::new(1.0, 0.0, 0.0, 0.0).is_ok());
    }

    #[test]
    fn mismatched_state() {
        assert!(matches!(
            StateVector::new(vec![1.0, 2.0], vec![1.0]),
            Err(Error::DimensionMismatch { expected: 2, actual: 1 })
        ));
    }
}
