//! Run configuration and the operations behind the `wavexp` binary.
//!
//! A run is assembled from up to three layers, later ones winning: a JSON
//! config file, a named preset, and explicit flags.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};

use crate::discretization::{build_operator, EquationKind, GridOperator, Nonlinearity, ProblemSpec, Profile, StateVector};
use crate::error::{Error, Result};
use crate::integrators::{build_tableau, solve, SchemeId, SchemeTableau, SolveResult};
use crate::modes::{Block2x2, ModeCase};
use crate::oracle::{
    assemble_dense_a, dense_phi_family, discrete_l2_error, load_preset, observed_order, relative_max_error,
    SchemeChoice, ORACLE_MAX_DIM, ORACLE_MAX_N,
};
use crate::propagator::{build_propagator, build_propagator_cached, BlockPropagator};

/// Environment variable naming the eigendecomposition cache directory.
pub const CACHE_ENV: &str = "WAVEXP_CACHE_DIR";

/// Largest relative error `oracle-check` accepts.
pub const ORACLE_CHECK_TOL: f64 = 1e-10;

/// Every field is optional so that layers can be merged; see [`RunConfig::resolve`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub kind: Option<EquationKind>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    pub g: Option<Nonlinearity>,
    pub h: Option<Nonlinearity>,
    pub p: Option<Profile>,
    pub q: Option<Profile>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub ell: Option<f64>,
    #[serde(rename = "T")]
    pub t_final: Option<f64>,
    pub scheme: Option<String>,
    pub c2: Option<f64>,
    #[serde(rename = "M", deserialize_with = "one_or_many")]
    pub m: Option<Vec<usize>>,
    #[serde(rename = "Mref")]
    pub m_ref: Option<usize>,
    pub out: Option<PathBuf>,
    pub snapshots: Option<usize>,
    pub cache: Option<PathBuf>,
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<usize>>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        One(usize),
        Many(Vec<usize>),
    }
    Ok(Option::<Raw>::deserialize(d)?.map(|r| match r {
        Raw::One(m) => vec![m],
        Raw::Many(v) => v,
    }))
}

macro_rules! overlay_fields {
    ($base:ident, $top:ident; $($f:ident),*) => {
        RunConfig { $($f: $top.$f.or($base.$f)),* }
    };
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Problem, grid and step counts of a preset. Leaves the scheme unset.
    pub fn from_preset(id: &str) -> Result<Self> {
        let p = load_preset(id)?;
        let s = p.spec;
        Ok(RunConfig {
            preset: Some(id.to_string()),
            kind: Some(s.kind),
            alpha: Some(s.alpha),
            beta: Some(s.beta),
            gamma: Some(s.gamma),
            delta: Some(s.delta),
            g: Some(s.g),
            h: Some(s.h),
            p: Some(s.p),
            q: Some(s.q),
            n: Some(p.n),
            ell: Some(s.ell),
            t_final: Some(s.t_final),
            m: Some(p.m_list),
            m_ref: Some(p.m_ref),
            ..RunConfig::default()
        })
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(self, top: RunConfig) -> RunConfig {
        let base = self;
        overlay_fields!(base, top; preset, kind, alpha, beta, gamma, delta, g, h, p, q, n, ell, t_final,
            scheme, c2, m, m_ref, out, snapshots, cache)
    }

    /// Merges file, preset and flags (in increasing priority) and validates
    /// the result before anything is computed.
    pub fn resolve(file: Option<RunConfig>, flags: RunConfig) -> Result<Run> {
        let file = file.unwrap_or_default();
        let preset_id = flags.preset.clone().or_else(|| file.preset.clone());
        let preset = preset_id.as_deref().map(load_preset).transpose()?;
        let preset_layer = match &preset_id {
            Some(id) => RunConfig::from_preset(id)?,
            None => RunConfig::default(),
        };
        let cfg = file.overlay(preset_layer).overlay(flags);

        let missing = |name: &str| Error::Config(format!("missing required field `{name}`"));
        let spec = ProblemSpec {
            kind: cfg.kind.ok_or_else(|| missing("kind"))?,
            alpha: cfg.alpha.ok_or_else(|| missing("alpha"))?,
            beta: cfg.beta.unwrap_or(0.0),
            gamma: cfg.gamma.unwrap_or(0.0),
            delta: cfg.delta.unwrap_or(0.0),
            g: cfg.g.unwrap_or(Nonlinearity::Zero),
            h: cfg.h.unwrap_or(Nonlinearity::Zero),
            p: cfg.p.ok_or_else(|| missing("p"))?,
            q: cfg.q.unwrap_or_else(Profile::zero),
            ell: cfg.ell.unwrap_or(1.0),
            t_final: cfg.t_final.ok_or_else(|| missing("T"))?,
        };
        spec.validate()?;
        let n = cfg.n.ok_or_else(|| missing("N"))?;
        if n == 0 {
            return Err(Error::Config("N must be at least 1".into()));
        }
        if cfg.snapshots == Some(0) {
            return Err(Error::Config("snapshots must be at least 1".into()));
        }
        let m_list = cfg.m.unwrap_or_default();
        if m_list.contains(&0) {
            return Err(Error::Config("every M must be at least 1".into()));
        }

        let preset_schemes = preset.as_ref().map(|p| p.schemes.clone()).unwrap_or_default();
        let scheme = match &cfg.scheme {
            Some(name) => {
                let id = SchemeId::from_str(name)?;
                let inherited = preset_schemes.iter().find(|s| s.id == id).and_then(|s| s.c2);
                let choice = SchemeChoice { id, c2: cfg.c2.or(inherited) };
                build_tableau(id, choice.c2)?;
                Some(choice)
            }
            None => None,
        };
        // a bare --c2 retunes the preset's two-stage schemes
        let preset_schemes: Vec<SchemeChoice> = preset_schemes
            .into_iter()
            .map(|s| if s.id.needs_c2() { SchemeChoice { c2: cfg.c2.or(s.c2), ..s } } else { s })
            .collect();
        for s in &preset_schemes {
            build_tableau(s.id, s.c2)?;
        }
        let reference = preset.as_ref().map(|p| p.reference).unwrap_or(SchemeChoice::new(SchemeId::Sw4));

        Ok(Run {
            spec,
            n,
            scheme,
            preset_schemes,
            reference,
            m_list,
            m_ref: cfg.m_ref,
            out: cfg.out,
            snapshots: cfg.snapshots,
            cache: cfg.cache,
        })
    }
}

/// A validated run description.
#[derive(Clone, Debug, PartialEq)]
pub struct Run {
    pub spec: ProblemSpec,
    pub n: usize,
    /// Scheme named explicitly by the file or flags.
    pub scheme: Option<SchemeChoice>,
    pub preset_schemes: Vec<SchemeChoice>,
    pub reference: SchemeChoice,
    pub m_list: Vec<usize>,
    pub m_ref: Option<usize>,
    pub out: Option<PathBuf>,
    pub snapshots: Option<usize>,
    pub cache: Option<PathBuf>,
}

impl Run {
    pub fn operator(&self) -> Result<GridOperator> {
        build_operator(self.spec.kind, self.n, self.spec.ell)
    }

    pub fn propagator(&self, op: &GridOperator) -> Result<BlockPropagator> {
        match &self.cache {
            Some(dir) => build_propagator_cached(op, &self.spec, dir),
            None => build_propagator(op, &self.spec),
        }
    }

    fn single_m(&self) -> Result<usize> {
        match self.m_list.as_slice() {
            [m] => Ok(*m),
            [] => Err(Error::Config("solve needs a step count M".into())),
            _ => Err(Error::Config(format!("solve takes a single M, got {}", self.m_list.len()))),
        }
    }

    /// Schemes a convergence study runs: the explicit one, else the preset's.
    pub fn study_schemes(&self) -> Result<Vec<SchemeTableau>> {
        let choices = match self.scheme {
            Some(s) => vec![s],
            None if !self.preset_schemes.is_empty() => self.preset_schemes.clone(),
            None => return Err(Error::Config("no scheme given and no preset to take schemes from".into())),
        };
        choices.iter().map(|s| build_tableau(s.id, s.c2)).collect()
    }
}

pub struct SolveReport {
    pub scheme: SchemeTableau,
    pub m: usize,
    pub nodes: Vec<f64>,
    pub result: SolveResult,
}

impl SolveReport {
    pub fn summary(&self) -> String {
        let s = &self.result.stats;
        format!(
            "scheme={} M={} wall_time={:.6}s phi_actions={} block_evaluations={}",
            self.scheme.name,
            self.m,
            s.wall_time.as_secs_f64(),
            s.phi_actions,
            s.block_evaluations
        )
    }
}

pub fn run_solve(run: &Run) -> Result<SolveReport> {
    let choice = run.scheme.ok_or_else(|| Error::Config("solve needs a scheme".into()))?;
    let tableau = build_tableau(choice.id, choice.c2)?;
    let m = run.single_m()?;
    let op = run.operator()?;
    let prop = run.propagator(&op)?;
    let result = solve(&prop, &tableau, &run.spec, m, run.snapshots)?;
    Ok(SolveReport { scheme: tableau, m, nodes: op.nodes(), result })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub scheme: SchemeId,
    pub m: usize,
    pub tau: f64,
    pub l2_error: f64,
}

pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub orders: Vec<(SchemeId, f64)>,
}

/// Errors at every `(scheme, M)` against a reference run. The pairs run in
/// parallel; the rows come back in input order.
pub fn run_converge(run: &Run) -> Result<ConvergenceReport> {
    let schemes = run.study_schemes()?;
    let m_list = &run.m_list;
    if m_list.len() < 3 {
        return Err(Error::InsufficientPoints { needed: 3, got: m_list.len() });
    }
    if m_list.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(Error::Config(format!("M list must double at every entry, got {m_list:?}")));
    }
    let m_ref = run.m_ref.ok_or_else(|| Error::Config("convergence study needs Mref".into()))?;
    let op = run.operator()?;
    let prop = run.propagator(&op)?;
    let reference_tableau = build_tableau(run.reference.id, run.reference.c2)?;
    let reference = solve(&prop, &reference_tableau, &run.spec, m_ref, None)?.y_final;

    let jobs: Vec<(&SchemeTableau, usize)> = schemes.iter().flat_map(|t| m_list.iter().map(move |&m| (t, m))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(t, m)| {
            let y = solve(&prop, t, &run.spec, m, None)?.y_final;
            Ok(ConvergenceRow {
                scheme: t.name,
                m,
                tau: run.spec.t_final / m as f64,
                l2_error: discrete_l2_error(&y, &reference, op.dx())?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let orders = schemes
        .iter()
        .map(|t| {
            let pts: Vec<(usize, f64)> = rows.iter().filter(|r| r.scheme == t.name).map(|r| (r.m, r.l2_error)).collect();
            Ok((t.name, observed_order(&pts)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport { rows, orders })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeRow {
    /// 1-based.
    pub index: usize,
    pub lambda: f64,
    pub m: f64,
    pub n: f64,
    pub case: ModeCase,
}

pub fn run_modes(run: &Run) -> Result<Vec<ModeRow>> {
    let op = run.operator()?;
    let prop = run.propagator(&op)?;
    Ok(prop
        .modes()
        .iter()
        .enumerate()
        .map(|(i, p)| ModeRow { index: i + 1, lambda: p.lambda, m: p.m, n: p.n, case: p.case })
        .collect())
}

/// Deliberate faults for checking that `oracle-check` notices them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    /// Negates the sine term of the exponential of every complex-pair block.
    FlipComplexSine,
}

impl FromStr for Mutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flip-complex-sine" => Ok(Mutation::FlipComplexSine),
            other => Err(Error::Config(format!("unknown mutation `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleCase {
    pub kind: EquationKind,
    pub n: usize,
    pub label: &'static str,
    /// Highest `k` compared; limited by the size of the augmented matrix.
    pub k_max: usize,
    pub max_rel_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    pub cases: Vec<OracleCase>,
    /// Indexed by `ModeCase as usize`.
    pub mode_cases_hit: [bool; 3],
}

impl OracleReport {
    pub fn max_rel_error(&self) -> f64 {
        self.cases.iter().map(|c| c.max_rel_error).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_rel_error() <= ORACLE_CHECK_TOL
    }
}

/// `(α, β, γ, δ)`
type Coeffs = (f64, f64, f64, f64);

fn oracle_test_vector(n: usize) -> StateVector {
    let u = (0..n).map(|i| (1.3 * i as f64 + 0.7).sin()).collect();
    let w = (0..n).map(|i| (2.1 * i as f64).cos() - 0.2).collect();
    StateVector { u, w }
}

/// `e^{tG}` with the sine term negated, for complex-pair modes. With
/// `E = e^{tm}(cos(tn)·I + sin(tn)/n·(G - mI))` that is `2e^{tm}cos(tn)·I - E`.
fn flip_complex_sine(prop: &BlockPropagator, t: f64) -> Result<Vec<Block2x2>> {
    let mut blocks = prop.mode_blocks(0, t)?;
    for (b, p) in blocks.iter_mut().zip(prop.modes()) {
        if p.case == ModeCase::ComplexPair {
            let d = 2.0 * (t * p.m).exp() * (t * p.n).cos();
            *b = Block2x2::scaled_identity(d).sub(b);
        }
    }
    Ok(blocks)
}

/// Compares `φ_k(tA)v` from the block path with the dense oracle for wave
/// and beam operators of each size, at `t ∈ {0.01, 0.1, 1}` and parameter
/// sets covering all three mode cases.
pub fn oracle_check(sizes: &[usize], mutation: Option<Mutation>) -> Result<OracleReport> {
    if let Some(&n) = sizes.iter().find(|&&n| n > ORACLE_MAX_N) {
        return Err(Error::OracleScaleExceeded { requested: n, limit: ORACLE_MAX_N });
    }
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::InvalidParameter(format!("grid sizes must be nonempty and positive, got {sizes:?}")));
    }
    let mut cases = Vec::new();
    let mut hit = [false; 3];
    for kind in [EquationKind::Wave, EquationKind::Beam] {
        for &n in sizes {
            let op = build_operator(kind, n, 1.0)?;
            let lambda1 = crate::eigen::factorize(&op)?.lambda()[0];
            let sets: [(&'static str, Coeffs); 4] = [
                ("undamped", (1.0, 0.0, 0.0, 0.0)),
                ("light", (1.0, 1e-2, 1e-2, 0.5)),
                ("heavy", (1.0, 10.0, 0.0, 0.0)),
                // disc = (λ + 0)² - 4(λ + δ) vanishes at λ₁
                ("double", (1.0, 1.0, 0.0, lambda1 * lambda1 / 4.0 - lambda1)),
            ];
            let k_max = (ORACLE_MAX_DIM / (2 * n)).saturating_sub(1).min(3);
            for (label, (alpha, beta, gamma, delta)) in sets {
                let spec = ProblemSpec {
                    kind,
                    alpha,
                    beta,
                    gamma,
                    delta,
                    g: Nonlinearity::Zero,
                    h: Nonlinearity::Zero,
                    p: Profile::zero(),
                    q: Profile::zero(),
                    ell: 1.0,
                    t_final: 1.0,
                };
                let prop = build_propagator(&op, &spec)?;
                for p in prop.modes() {
                    hit[p.case as usize] = true;
                }
                let a = assemble_dense_a(&op, &spec.coefficients())?;
                let v = oracle_test_vector(n);
                let stacked = v.stacked();
                let mut worst: f64 = 0.0;
                for t in [0.01, 0.1, 1.0] {
                    let family = dense_phi_family(k_max, &a.scaled(t))?;
                    for (k, phi) in family.iter().enumerate() {
                        let got = match mutation {
                            Some(Mutation::FlipComplexSine) if k == 0 => {
                                prop.apply_blocks(&flip_complex_sine(&prop, t)?, &v)?
                            }
                            _ => prop.apply_phi(k, t, &v)?,
                        };
                        worst = worst.max(relative_max_error(&got.stacked(), &phi.matvec(&stacked)));
                    }
                }
                cases.push(OracleCase { kind, n, label, k_max, max_rel_error: worst });
            }
        }
    }
    Ok(OracleReport { cases, mode_cases_hit: hit })
}

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_state_csv<W: Write>(w: W, nodes: &[f64], y: &StateVector) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["x", "u", "w"])?;
    for ((x, u), v) in nodes.iter().zip(&y.u).zip(&y.w) {
        out.write_record([fmt_float(*x), fmt_float(*u), fmt_float(*v)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_snapshots_csv<W: Write>(w: W, nodes: &[f64], snapshots: &[(f64, StateVector)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t", "x", "u", "w"])?;
    for (t, y) in snapshots {
        for ((x, u), v) in nodes.iter().zip(&y.u).zip(&y.w) {
            out.write_record([fmt_float(*t), fmt_float(*x), fmt_float(*u), fmt_float(*v)])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_convergence_csv<W: Write>(w: W, rows: &[ConvergenceRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["scheme", "M", "tau", "l2_error"])?;
    for r in rows {
        out.write_record([r.scheme.to_string(), r.m.to_string(), fmt_float(r.tau), fmt_float(r.l2_error)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_modes_csv<W: Write>(w: W, rows: &[ModeRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["index", "lambda", "m", "n", "case"])?;
    for r in rows {
        out.write_record([r.index.to_string(), fmt_float(r.lambda), fmt_float(r.m), fmt_float(r.n), r.case.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// `run.csv` becomes `run.snapshots.csv`.
pub fn snapshot_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    out.with_file_name(format!("{stem}.snapshots.csv"))
}
