//! Named experiment configurations.

use std::f64::consts::PI;

use serde::Serialize;

use crate::discretization::{EquationKind, Nonlinearity, ProblemSpec, Profile};
use crate::error::{Error, Result};
use crate::integrators::SchemeId;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SchemeChoice {
    pub id: SchemeId,
    pub c2: Option<f64>,
}

impl SchemeChoice {
    pub fn new(id: SchemeId) -> Self {
        SchemeChoice { id, c2: None }
    }

    pub fn with_c2(id: SchemeId, c2: f64) -> Self {
        SchemeChoice { id, c2: Some(c2) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentPreset {
    pub id: &'static str,
    pub spec: ProblemSpec,
    /// Interior grid points.
    pub n: usize,
    pub schemes: Vec<SchemeChoice>,
    pub m_list: Vec<usize>,
    pub reference: SchemeChoice,
    pub m_ref: usize,
}

pub const PRESET_IDS: [&str; 9] =
    ["wave1", "wave2", "wave3", "wave4", "wave5", "beam1", "linear-wave", "merged-wave", "merged-beam"];

fn doubling(first: usize, count: usize) -> Vec<usize> {
    (0..count).map(|j| first << j).collect()
}

#[allow(clippy::too_many_arguments)]
fn spec(
    kind: EquationKind,
    (alpha, beta, gamma, delta): (f64, f64, f64, f64),
    g: Nonlinearity,
    h: Nonlinearity,
    p: Profile,
    q: Profile,
    t_final: f64,
) -> ProblemSpec {
    ProblemSpec { kind, alpha, beta, gamma, delta, g, h, p, q, ell: 1.0, t_final }
}

pub fn load_preset(id: &str) -> Result<ExperimentPreset> {
    use SchemeId::*;
    let all = |c2: f64| {
        vec![
            SchemeChoice::new(E1),
            SchemeChoice::with_c2(Sw21, c2),
            SchemeChoice::with_c2(Sw22, c2),
            SchemeChoice::new(Sw4),
            SchemeChoice::new(K4),
        ]
    };
    let beam1_coeffs = (15.0, 3e-6, 3e-4, 10.0);
    let beam1_p = Profile::gaussian(5.0, 100.0, 2.0 / 3.0);
    let preset = match id {
        "wave1" => ExperimentPreset {
            id: "wave1",
            spec: spec(
                EquationKind::Wave,
                (PI * PI, 1e-2, 1e-2, 0.0),
                Nonlinearity::Sin,
                Nonlinearity::Zero,
                Profile::sine(5.0, 2.0 * PI),
                Profile::zero(),
                6.0,
            ),
            n: 200,
            schemes: vec![
                SchemeChoice::new(E1),
                SchemeChoice::with_c2(Sw21, 0.75),
                SchemeChoice::new(Sw4),
                SchemeChoice::new(K4),
            ],
            m_list: doubling(5, 12),
            reference: SchemeChoice::new(Sw4),
            m_ref: 200_000,
        },
        "wave2" => ExperimentPreset {
            id: "wave2",
            spec: spec(
                EquationKind::Wave,
                (100.0, 1e-2, 1e-3, 0.0),
                Nonlinearity::XAbsX,
                Nonlinearity::Zero,
                Profile::hat(1.0, 0.5),
                Profile::sine(PI * PI, PI),
                15.0,
            ),
            n: 200,
            schemes: all(0.2),
            m_list: doubling(20, 13),
            reference: SchemeChoice::new(K4),
            m_ref: 200_000,
        },
        "wave3" => ExperimentPreset {
            id: "wave3",
            spec: spec(
                EquationKind::Wave,
                (15.0, 1e-3, 1e-6, 1.0),
                Nonlinearity::Cube,
                Nonlinearity::Zero,
                Profile::sine(10.0, 3.0 * PI),
                Profile::cosine(-10.0, 3.0 * PI),
                30.0,
            ),
            n: 200,
            schemes: vec![
                SchemeChoice::new(E1),
                SchemeChoice::with_c2(Sw22, 0.9),
                SchemeChoice::new(K4),
                SchemeChoice::new(Sw4),
            ],
            m_list: doubling(20, 12),
            reference: SchemeChoice::new(Sw4),
            m_ref: 300_000,
        },
        "wave4" => ExperimentPreset {
            id: "wave4",
            spec: spec(
                EquationKind::Wave,
                (5.0, 1e-3, 1e-4, 1.0),
                Nonlinearity::Abs,
                Nonlinearity::Zero,
                Profile::step(-1.0, 5.0, 0.5),
                Profile::zero(),
                3.0,
            ),
            n: 200,
            schemes: all(0.5),
            m_list: doubling(20, 14),
            reference: SchemeChoice::new(Sw4),
            m_ref: 300_000,
        },
        "wave5" => ExperimentPreset {
            id: "wave5",
            spec: spec(
                EquationKind::Wave,
                (50.0, 1e-6, 1e-3, 10.0),
                Nonlinearity::NegXAbsXCubed,
                Nonlinearity::NegXAbsX,
                Profile::sine(20.0, 4.0 * PI),
                Profile::cosine(-25.0, 3.0 * PI),
                1.0,
            ),
            n: 200,
            schemes: all(0.85),
            m_list: doubling(160, 11),
            reference: SchemeChoice::new(Sw4),
            m_ref: 800_000,
        },
        "beam1" => ExperimentPreset {
            id: "beam1",
            spec: spec(
                EquationKind::Beam,
                beam1_coeffs,
                Nonlinearity::NegFiveCube,
                Nonlinearity::Zero,
                beam1_p,
                Profile::zero(),
                5.0,
            ),
            // 300 subintervals of (0, 1)
            n: 299,
            schemes: vec![
                SchemeChoice::new(E1),
                SchemeChoice::with_c2(Sw22, 0.9),
                SchemeChoice::new(Sw4),
                SchemeChoice::new(K4),
            ],
            m_list: doubling(160, 11),
            reference: SchemeChoice::new(K4),
            m_ref: 600_000,
        },
        "linear-wave" => ExperimentPreset {
            id: "linear-wave",
            spec: spec(
                EquationKind::Wave,
                (100.0, 1e-2, 1e-6, 1e-2),
                Nonlinearity::Zero,
                Nonlinearity::Zero,
                Profile::sine(5.0, 2.0 * PI),
                Profile::zero(),
                10.0,
            ),
            n: 200,
            schemes: vec![SchemeChoice::new(E1)],
            m_list: vec![1, 2, 4],
            reference: SchemeChoice::new(E1),
            m_ref: 1,
        },
        "merged-wave" => ExperimentPreset {
            id: "merged-wave",
            spec: spec(
                EquationKind::Wave,
                (1.0, 1e-2, 1e-1, 1.0),
                Nonlinearity::NegFiveCube,
                Nonlinearity::Zero,
                Profile::sine(5.0, 5.0 * PI),
                Profile::cosine(5.0, 10.0 * PI),
                1.0,
            ),
            n: 200,
            schemes: vec![SchemeChoice::with_c2(Sw21, 1.0 / 3.0)],
            m_list: doubling(10, 11),
            reference: SchemeChoice::new(K4),
            m_ref: 100_000,
        },
        "merged-beam" => ExperimentPreset {
            id: "merged-beam",
            spec: spec(
                EquationKind::Beam,
                beam1_coeffs,
                Nonlinearity::NegFiveCube,
                Nonlinearity::Zero,
                beam1_p,
                Profile::zero(),
                1.0,
            ),
            n: 299,
            schemes: vec![SchemeChoice::with_c2(Sw21, 0.2)],
            m_list: doubling(320, 8),
            reference: SchemeChoice::new(Sw4),
            m_ref: 100_000,
        },
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    Ok(preset)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wave1_values() {
        let p = load_preset("wave1").unwrap();
        assert_eq!(p.spec.alpha, PI * PI);
        assert_eq!((p.spec.beta, p.spec.gamma, p.spec.delta), (1e-2, 1e-2, 0.0));
        assert_eq!(p.spec.g, Nonlinearity::Sin);
        assert_eq!(p.spec.t_final, 6.0);
        assert_eq!(p.n, 200);
        assert_eq!(p.m_list.first(), Some(&5));
        assert_eq!(p.m_list.last(), Some(&(5 * 2048)));
    }

    #[test]
    fn beam1_values() {
        let p = load_preset("beam1").unwrap();
        assert_eq!(p.spec.g, Nonlinearity::NegFiveCube);
        assert_eq!(p.spec.g.eval(2.0), -40.0);
        assert_eq!(p.spec.kind, EquationKind::Beam);
        assert!((p.spec.p.eval(2.0 / 3.0, 1.0) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn wave4_step_data() {
        let p = load_preset("wave4").unwrap();
        assert_eq!(p.spec.p.eval(0.5, 1.0), -1.0);
        assert_eq!(p.spec.p.eval(0.25, 1.0), -1.0);
        assert_eq!(p.spec.p.eval(0.5 + 1e-12, 1.0), 5.0);
    }

    #[test]
    fn wave2_hat() {
        let p = load_preset("wave2").unwrap();
        assert!((p.spec.p.eval(0.25, 1.0) - 0.5).abs() < 1e-15);
        assert!((p.spec.p.eval(0.75, 1.0) - 0.5).abs() < 1e-15);
        assert!((p.spec.q.eval(0.5, 1.0) - PI * PI).abs() < 1e-13);
    }

    #[test]
    fn all_presets_load_and_validate() {
        for id in PRESET_IDS {
            let p = load_preset(id).unwrap();
            p.spec.validate().unwrap();
            assert_eq!(p.id, id);
            assert!(p.m_list.windows(2).all(|w| w[1] == 2 * w[0]));
        }
        assert!(matches!(load_preset("wave9"), Err(Error::UnknownPreset(_))));
    }
}
