use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed registry of initial-data shapes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProfileKind {
    /// `0`
    Zero,
    /// `a·sin(k·x)`; params `[a, k]`
    Sine,
    /// `a·cos(k·x)`; params `[a, k]`
    Cosine,
    /// piecewise linear, 0 at both ends, `h` at `x = apex`; params `[h, apex]`
    Hat,
    /// `left` for `x <= at`, `right` for `x > at`; params `[left, right, at]`
    Step,
    /// `a·exp(-c·(x - x0)²)`; params `[a, c, x0]`
    Gaussian,
}

impl ProfileKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProfileKind::Zero => "zero",
            ProfileKind::Sine => "sine",
            ProfileKind::Cosine => "cosine",
            ProfileKind::Hat => "hat",
            ProfileKind::Step => "step",
            ProfileKind::Gaussian => "gaussian",
        }
    }

    fn arity(self) -> usize {
        match self {
            ProfileKind::Zero => 0,
            ProfileKind::Sine | ProfileKind::Cosine | ProfileKind::Hat => 2,
            ProfileKind::Step | ProfileKind::Gaussian => 3,
        }
    }
}

impl FromStr for ProfileKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "zero" => ProfileKind::Zero,
            "sine" => ProfileKind::Sine,
            "cosine" => ProfileKind::Cosine,
            "hat" => ProfileKind::Hat,
            "step" => ProfileKind::Step,
            "gaussian" => ProfileKind::Gaussian,
            other => return Err(Error::UnknownProfile(other.to_string())),
        })
    }
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A registry profile together with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile", into = "RawProfile")]
pub struct Profile {
    kind: ProfileKind,
    params: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawProfile {
    name: String,
    #[serde(default)]
    params: Vec<f64>,
}

impl TryFrom<RawProfile> for Profile {
    type Error = Error;

    fn try_from(raw: RawProfile) -> Result<Self> {
        Profile::new(&raw.name, raw.params)
    }
}

impl From<Profile> for RawProfile {
    fn from(p: Profile) -> Self {
        RawProfile { name: p.kind.as_str().to_string(), params: p.params }
    }
}

impl Profile {
    pub fn new(name: &str, params: Vec<f64>) -> Result<Self> {
        let kind: ProfileKind = name.parse()?;
        if params.len() != kind.arity() {
            return Err(Error::InvalidParameter(format!(
                "profile `{name}` takes {} parameters, got {}",
                kind.arity(),
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter(format!("profile `{name}` has non-finite parameters")));
        }
        Ok(Profile { kind, params })
    }

    pub fn zero() -> Self {
        Profile { kind: ProfileKind::Zero, params: Vec::new() }
    }

    pub fn sine(amplitude: f64, frequency: f64) -> Self {
        Profile { kind: ProfileKind::Sine, params: vec![amplitude, frequency] }
    }

    pub fn cosine(amplitude: f64, frequency: f64) -> Self {
        Profile { kind: ProfileKind::Cosine, params: vec![amplitude, frequency] }
    }

    pub fn hat(height: f64, apex: f64) -> Self {
        Profile { kind: ProfileKind::Hat, params: vec![height, apex] }
    }

    pub fn step(left: f64, right: f64, at: f64) -> Self {
        Profile { kind: ProfileKind::Step, params: vec![left, right, at] }
    }

    pub fn gaussian(amplitude: f64, width: f64, center: f64) -> Self {
        Profile { kind: ProfileKind::Gaussian, params: vec![amplitude, width, center] }
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Value at `x` on a domain of length `ell`.
    pub fn eval(&self, x: f64, ell: f64) -> f64 {
        let p = &self.params;
        match self.kind {
            ProfileKind::Zero => 0.0,
            ProfileKind::Sine => p[0] * (p[1] * x).sin(),
            ProfileKind::Cosine => p[0] * (p[1] * x).cos(),
            ProfileKind::Hat => {
                let (h, apex) = (p[0], p[1]);
                if x <= apex {
                    h * x / apex
                } else {
                    h * (ell - x) / (ell - apex)
                }
            }
            ProfileKind::Step => {
                if x <= p[2] {
                    p[0]
                } else {
                    p[1]
                }
            }
            ProfileKind::Gaussian => {
                let d = x - p[2];
                p[0] * (-p[1] * d * d).exp()
            }
        }
    }

    pub fn sample(&self, n: usize, ell: f64) -> Vec<f64> {
        let dx = ell / (n as f64 + 1.0);
        (1..=n).map(|i| self.eval(i as f64 * dx, ell)).collect()
    }
}

/// Samples a registry profile at the interior nodes `x_i = i·ell/(n+1)`.
pub fn sample_profile(name: &str, params: &[f64], n: usize, ell: f64) -> Result<Vec<f64>> {
    Ok(Profile::new(name, params.to_vec())?.sample(n, ell))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    #[test]
    fn zero_profile() {
        assert_eq!(sample_profile("zero", &[], 4, 1.0).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn sine_profile() {
        let v = sample_profile("sine", &[5.0, 2.0 * PI], 3, 1.0).unwrap();
        for (a, b) in v.iter().zip([5.0, 0.0, -5.0]) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn hat_profile() {
        let v = sample_profile("hat", &[1.0, 0.5], 3, 1.0).unwrap();
        assert_eq!(v, vec![0.5, 1.0, 0.5]);
    }

    #[test]
    fn step_takes_left_value_at_jump() {
        let v = Profile::step(-1.0, 5.0, 0.5).sample(3, 1.0);
        assert_eq!(v, vec![-1.0, -1.0, 5.0]);
    }

    #[test]
    fn gaussian_peak() {
        let g = Profile::gaussian(5.0, 100.0, 2.0 / 3.0);
        assert_eq!(g.eval(2.0 / 3.0, 1.0), 5.0);
        assert!(g.eval(0.0, 1.0) < 1e-18);
    }

    #[test]
    fn unknown_profile_rejected() {
        assert!(matches!(sample_profile("sawtooth", &[], 3, 1.0), Err(Error::UnknownProfile(_))));
        assert!(matches!(Profile::new("sine", vec![1.0]), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn refined_grid_shares_nodes_exactly() {
        let profiles = [
            Profile::sine(5.0, 2.0 * PI),
            Profile::cosine(-10.0, 3.0 * PI),
            Profile::gaussian(5.0, 100.0, 2.0 / 3.0),
            Profile::hat(1.0, 0.5),
        ];
        for p in &profiles {
            for n in [3usize, 10, 49] {
                let coarse = p.sample(n, 1.0);
                let fine = p.sample(2 * n + 1, 1.0);
                for i in 0..n {
                    assert_eq!(coarse[i], fine[2 * i + 1], "{:?} n={n} i={i}", p.kind());
                }
            }
        }
    }

    #[test]
    fn serde_shape() {
        let p: Profile = serde_json::from_str(r#"{"name":"step","params":[-1,5,0.5]}"#).unwrap();
        assert_eq!(p, Profile::step(-1.0, 5.0, 0.5));
        assert!(serde_json::from_str::<Profile>(r#"{"name":"bogus"}"#).is_err());
        let z: Profile = serde_json::from_str(r#"{"name":"zero"}"#).unwrap();
        assert_eq!(z, Profile::zero());
    }
}
