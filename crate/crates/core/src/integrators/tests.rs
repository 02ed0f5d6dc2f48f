use super::*;
use crate::dense::DenseMatrix;
use crate::discretization::{build_operator, build_wave_operator, EquationKind, Nonlinearity, Profile, ProblemSpec, StateVector};
use crate::oracle::{assemble_dense_a, load_preset, relative_max_error};
use crate::propagator::build_propagator;

fn wave_spec(alpha: f64, beta: f64, gamma: f64, delta: f64, g: Nonlinearity, t_final: f64) -> ProblemSpec {
    ProblemSpec {
        kind: EquationKind::Wave,
        alpha,
        beta,
        gamma,
        delta,
        g,
        h: Nonlinearity::Zero,
        p: Profile::sine(1.0, std::f64::consts::PI),
        q: Profile::cosine(0.5, 2.0 * std::f64::consts::PI),
        ell: 1.0,
        t_final,
    }
}

fn all_tableaus() -> Vec<SchemeTableau> {
    vec![
        build_tableau(SchemeId::E1, None).unwrap(),
        build_tableau(SchemeId::Sw21, Some(0.75)).unwrap(),
        build_tableau(SchemeId::Sw22, Some(0.5)).unwrap(),
        build_tableau(SchemeId::K4, None).unwrap(),
        build_tableau(SchemeId::Sw4, None).unwrap(),
    ]
}

#[test]
fn linear_step_is_exponential() {
    let spec = wave_spec(1.0, 1e-2, 1e-2, 0.5, Nonlinearity::Zero, 1.0);
    let op = build_wave_operator(10, 1.0).unwrap();
    let prop = build_propagator(&op, &spec).unwrap();
    let y = spec.initial_state(10);
    let e = prop.apply_phi(0, 0.3, &y).unwrap();
    for t in all_tableaus() {
        let s = step(&prop, &t, &spec, 0.3, &y).unwrap();
        assert!(relative_max_error(&s.stacked(), &e.stacked()) < 1e-14, "{}", t.name);
    }
}

#[test]
fn constant_forcing_is_exact() {
    let spec = wave_spec(2.0, 1e-2, 1e-1, 1.0, Nonlinearity::Zero, 1.0);
    let n = 12;
    let op = build_wave_operator(n, 1.0).unwrap();
    let prop = build_propagator(&op, &spec).unwrap();
    let y = spec.initial_state(n);
    let c: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * i as f64).collect();
    let f = |_: &[f64], _: &[f64], out: &mut [f64]| out.copy_from_slice(&c);
    let tau = 0.2;
    let mut exact = prop.apply_phi(0, tau, &y).unwrap();
    exact.axpy(tau, &prop.apply_phi(1, tau, &StateVector::new(vec![0.0; n], c.clone()).unwrap()).unwrap());
    for t in all_tableaus() {
        let s = step_with_forcing(&prop, &t, &f, tau, &y).unwrap();
        assert!(relative_max_error(&s.stacked(), &exact.stacked()) < 1e-10, "{}", t.name);
    }
}

#[test]
fn exponential_euler_by_hand() {
    // n = 1: S = [8]; α = 1/8 makes G = [[0, 1], [-1, 0]]
    let mut spec = wave_spec(0.125, 0.0, 0.0, 0.0, Nonlinearity::Sin, 1.0);
    spec.p = Profile::zero();
    let op = build_wave_operator(1, 1.0).unwrap();
    let prop = build_propagator(&op, &spec).unwrap();
    let (u0, w0, tau) = (0.5, 0.25, 0.4);
    let y = StateVector::new(vec![u0], vec![w0]).unwrap();
    let t = build_tableau(SchemeId::E1, None).unwrap();
    let got = step(&prop, &t, &spec, tau, &y).unwrap();
    let f = u0.sin();
    let (s, c) = (tau as f64).sin_cos();
    let u1 = u0 * c + w0 * s + f * (1.0 - c);
    let w1 = -u0 * s + w0 * c + f * s;
    assert!((got.u[0] - u1).abs() < 1e-15 && (got.w[0] - w1).abs() < 1e-15, "{got:?} vs ({u1}, {w1})");
}

#[test]
fn k4_counts() {
    let spec = wave_spec(1.0, 1e-2, 1e-2, 0.0, Nonlinearity::Sin, 1.0);
    let op = build_wave_operator(8, 1.0).unwrap();
    let prop = build_propagator(&op, &spec).unwrap();
    let t = build_tableau(SchemeId::K4, None).unwrap();
    let r = solve(&prop, &t, &spec, 7, None).unwrap();
    assert_eq!(r.stats.steps, 7);
    assert_eq!(r.stats.phi_actions, 20 * 7);
    assert_eq!(r.stats.block_evaluations, 2);
    let e1 = solve(&prop, &build_tableau(SchemeId::E1, None).unwrap(), &spec, 7, None).unwrap();
    assert_eq!((e1.stats.phi_actions, e1.stats.block_evaluations), (2 * 7, 1));
}

#[test]
fn linear_problems_are_solved_exactly() {
    let spec = load_preset("linear-wave").unwrap().spec;
    let op = build_wave_operator(40, 1.0).unwrap();
    let prop = build_propagator(&op, &spec).unwrap();
    for t in all_tableaus() {
        let one = solve(&prop, &t, &spec, 1, None).unwrap().y_final;
        let many = solve(&prop, &t, &spec, 64, None).unwrap().y_final;
        assert!(relative_max_error(&many.stacked(), &one.stacked()) < 1e-11, "{}", t.name);
    }
    let direct = prop.apply_phi(0, spec.t_final, &spec.initial_state(40)).unwrap();
    let one = solve(&prop, &all_tableaus()[0], &spec, 1, None).unwrap().y_final;
    assert_eq!(one, direct);
}

#[test]
fn rk4_stability_polynomial() {
    let spec = wave_spec(1.0, 0.3, 0.2, 1.0, Nonlinearity::Zero, 0.1);
    let op = build_wave_operator(3, 1.0).unwrap();
    let tau = spec.t_final;
    let a = assemble_dense_a(&op, &spec.coefficients()).unwrap().scaled(tau);
    let mut r = DenseMatrix::identity(6);
    let mut term = DenseMatrix::identity(6);
    for j in 1..=4 {
        term = term.matmul(&a).scaled(1.0 / j as f64);
        r.add_scaled(1.0, &term);
    }
    let y0 = spec.initial_state(3).stacked();
    let expected = r.matvec(&y0);
    let got = rk4_baseline_solve(&op, &spec, 1).unwrap().y_final.stacked();
    assert!(relative_max_error(&got, &expected) < 1e-14);
}

#[test]
fn rk4_agrees_with_k4_on_a_mild_problem() {
    let spec = wave_spec(1.0, 1e-2, 1e-2, 0.5, Nonlinearity::Sin, 0.1);
    let op = build_wave_operator(8, 1.0).unwrap();
    let prop = build_propagator(&op, &spec).unwrap();
    let k4 = solve(&prop, &build_tableau(SchemeId::K4, None).unwrap(), &spec, 10_000, None).unwrap().y_final;
    let rk = rk4_baseline_solve(&op, &spec, 10_000).unwrap().y_final;
    assert!(relative_max_error(&rk.stacked(), &k4.stacked()) < 1e-8);
}

#[test]
fn rk4_blows_up_on_stiff_beam() {
    let spec = load_preset("beam1").unwrap().spec;
    let op = build_operator(EquationKind::Beam, 200, 1.0).unwrap();
    match rk4_baseline_solve(&op, &spec, 100) {
        Err(crate::Error::Instability { step, .. }) => assert!(step <= 100),
        other => panic!("expected instability, got {:?}", other.map(|r| r.stats)),
    }
}

#[test]
fn merged_damping_without_damping_is_plain_solve() {
    let spec = wave_spec(1.0, 0.0, 0.0, 1.0, Nonlinearity::NegFiveCube, 0.5);
    let op = build_wave_operator(20, 1.0).unwrap();
    let prop = build_propagator(&op, &spec).unwrap();
    let t = build_tableau(SchemeId::Sw21, Some(1.0 / 3.0)).unwrap();
    let a = solve(&prop, &t, &spec, 50, None).unwrap().y_final;
    let b = merged_damping_solve(&op, &prop, &t, &spec, 50, None).unwrap().y_final;
    assert!(relative_max_error(&b.stacked(), &a.stacked()) < 1e-12);
}

#[test]
fn merged_damping_converges_to_same_solution() {
    let spec = wave_spec(1.0, 1e-2, 1e-1, 1.0, Nonlinearity::NegFiveCube, 0.5);
    let op = build_wave_operator(10, 1.0).unwrap();
    let prop = build_propagator(&op, &spec).unwrap();
    let t = build_tableau(SchemeId::K4, None).unwrap();
    let a = solve(&prop, &t, &spec, 2000, None).unwrap().y_final;
    let b = merged_damping_solve(&op, &prop, &t, &spec, 2000, None).unwrap().y_final;
    assert!(relative_max_error(&b.stacked(), &a.stacked()) < 1e-9);
}

#[test]
fn snapshots_and_determinism() {
    let spec = wave_spec(1.0, 1e-2, 1e-2, 0.0, Nonlinearity::Cube, 1.0);
    let op = build_wave_operator(16, 1.0).unwrap();
    let prop = build_propagator(&op, &spec).unwrap();
    let t = build_tableau(SchemeId::Sw4, None).unwrap();
    let a = solve(&prop, &t, &spec, 10, Some(3)).unwrap();
    let times: Vec<f64> = a.snapshots.iter().map(|s| s.0).collect();
    assert_eq!(times.len(), 4);
    assert!(times.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(*times.last().unwrap(), spec.t_final);
    assert_eq!(a.snapshots.last().unwrap().1, a.y_final);
    let b = solve(&prop, &t, &spec, 10, Some(3)).unwrap();
    let bits = |v: &StateVector| v.stacked().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a.y_final), bits(&b.y_final));
}

#[test]
fn invalid_inputs() {
    let spec = wave_spec(1.0, 0.0, 0.0, 0.0, Nonlinearity::Sin, 1.0);
    let op = build_wave_operator(4, 1.0).unwrap();
    let prop = build_propagator(&op, &spec).unwrap();
    let t = build_tableau(SchemeId::E1, None).unwrap();
    assert!(solve(&prop, &t, &spec, 0, None).is_err());
    assert!(solve(&prop, &t, &spec, 2, Some(0)).is_err());
    assert!(step(&prop, &t, &spec, 0.0, &spec.initial_state(4)).is_err());
    let other = wave_spec(2.0, 0.0, 0.0, 0.0, Nonlinearity::Sin, 1.0);
    assert!(solve(&prop, &t, &other, 2, None).is_err());
}

#[test]
fn blow_up_is_reported_with_step() {
    // u³ forcing with huge data drives the state to infinity in finite time
    let mut spec = wave_spec(1.0, 0.0, 0.0, 0.0, Nonlinearity::Cube, 10.0);
    spec.p = Profile::sine(1e3, std::f64::consts::PI);
    let op = build_wave_operator(4, 1.0).unwrap();
    let prop = build_propagator(&op, &spec).unwrap();
    let t = build_tableau(SchemeId::E1, None).unwrap();
    match solve(&prop, &t, &spec, 10, None) {
        Err(crate::Error::Instability { step, time }) => {
            assert!(step >= 1 && step <= 10);
            assert!((time - step as f64).abs() < 1e-12);
        }
        other => panic!("expected instability, got {:?}", other.map(|r| r.stats)),
    }
}
