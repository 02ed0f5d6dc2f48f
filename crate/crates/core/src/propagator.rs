//! Action of `e^{tA}` and `φ_k(tA)` on a state via the spectral factorization
//! of `S` and the per-mode closed forms.
//!
//! The pipeline for `φ_k(tA)·(u, w)`: project both halves with `Qᵀ`,
//! interleave the modal coordinates into pairs with the position array,
//! multiply each pair by its 2×2 block, undo the interleaving, and map back
//! with `Q`.

use std::path::Path;
use std::sync::Arc;

use crate::dense::DenseMatrix;
use crate::discretization::{Coefficients, GridOperator, ProblemSpec, StateVector};
use crate::eigen::{factorize, factorize_cached, SpectralFactorization};
use crate::error::{Error, Result};
use crate::modes::{classify_mode, phi_block, phi_blocks, Block2x2, ModeParams, K_MAX};

/// State in modal coordinates: `a = Qᵀu`, `b = Qᵀw`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModalVector {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl ModalVector {
    pub fn zeros(n: usize) -> Self {
        ModalVector { a: vec![0.0; n], b: vec![0.0; n] }
    }

    pub fn is_finite(&self) -> bool {
        self.a.iter().chain(&self.b).all(|v| v.is_finite())
    }
}

#[derive(Clone, Debug)]
pub struct BlockPropagator {
    fact: Arc<SpectralFactorization>,
    coeffs: Coefficients,
    modes: Vec<ModeParams>,
    /// 0-based position array: row `r` of `P` has its one in column `perm[r]`.
    perm: Vec<usize>,
}

/// Position array of the permutation with `P[i][2i-1] = 1` and
/// `P[i+n][2i] = 1` (1-based), as 0-based column indices.
pub fn permutation_positions(n: usize) -> Vec<usize> {
    (0..n).map(|i| 2 * i).chain((0..n).map(|i| 2 * i + 1)).collect()
}

pub fn build_propagator(s: &GridOperator, spec: &ProblemSpec) -> Result<BlockPropagator> {
    spec.check_grid(s)?;
    BlockPropagator::new(Arc::new(factorize(s)?), spec.coefficients())
}

/// As [`build_propagator`], reusing a factorization cached under `dir`.
pub fn build_propagator_cached(s: &GridOperator, spec: &ProblemSpec, dir: &Path) -> Result<BlockPropagator> {
    spec.check_grid(s)?;
    BlockPropagator::new(Arc::new(factorize_cached(s, dir)?), spec.coefficients())
}

impl BlockPropagator {
    pub fn new(fact: Arc<SpectralFactorization>, coeffs: Coefficients) -> Result<Self> {
        coeffs.validate()?;
        let modes = fact.lambda().iter().map(|&l| classify_mode(l, &coeffs)).collect();
        let perm = permutation_positions(fact.n());
        Ok(BlockPropagator { fact, coeffs, modes, perm })
    }

    /// Same factorization, different linear coefficients.
    pub fn with_coefficients(&self, coeffs: Coefficients) -> Result<Self> {
        Self::new(Arc::clone(&self.fact), coeffs)
    }

    pub fn n(&self) -> usize {
        self.fact.n()
    }

    pub fn factorization(&self) -> &SpectralFactorization {
        &self.fact
    }

    pub fn coefficients(&self) -> Coefficients {
        self.coeffs
    }

    pub fn modes(&self) -> &[ModeParams] {
        &self.modes
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// The position array with 1-based entries.
    pub fn perm_one_based(&self) -> Vec<usize> {
        self.perm.iter().map(|p| p + 1).collect()
    }

    fn check_len(&self, v: &StateVector) -> Result<()> {
        if v.u.len() != self.n() || v.w.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), actual: v.u.len().max(v.w.len()) });
        }
        Ok(())
    }

    /// `(Qᵀu, Qᵀw)`; an all-zero half skips its mat-vec.
    pub fn to_modal(&self, v: &StateVector) -> Result<ModalVector> {
        self.check_len(v)?;
        Ok(ModalVector { a: self.project(&v.u), b: self.project(&v.w) })
    }

    pub fn from_modal(&self, m: &ModalVector) -> StateVector {
        StateVector { u: self.expand(&m.a), w: self.expand(&m.b) }
    }

    /// `Qᵀx`
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; n];
        self.project_into(x, &mut out);
        debug_assert_eq!(out.len(), n);
        out
    }

    pub fn project_into(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        let q = self.fact.q();
        for (r, &xr) in x.iter().enumerate() {
            if xr != 0.0 {
                for (o, &qr) in out.iter_mut().zip(q.row(r)) {
                    *o += xr * qr;
                }
            }
        }
    }

    /// `Qx`
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        self.expand_into(x, &mut out);
        out
    }

    pub fn expand_into(&self, x: &[f64], out: &mut [f64]) {
        if x.iter().all(|&v| v == 0.0) {
            out.fill(0.0);
            return;
        }
        let q = self.fact.q();
        for (r, o) in out.iter_mut().enumerate() {
            *o = q.row(r).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    /// Per-mode blocks of `φ_k(tG_i)`.
    pub fn mode_blocks(&self, k: usize, t: f64) -> Result<Vec<Block2x2>> {
        if k > K_MAX {
            return Err(Error::KOutOfRange { k, k_max: K_MAX });
        }
        self.modes.iter().map(|p| phi_block(k, t, p)).collect()
    }

    /// `φ_0..=φ_{K_MAX}` blocks of every mode at `t`.
    pub fn mode_block_families(&self, t: f64) -> Vec<[Block2x2; K_MAX + 1]> {
        self.modes.iter().map(|p| phi_blocks(t, p)).collect()
    }

    /// Multiplies the modal pairs by `blocks` in place, routing through the
    /// interleaved layout given by the position array.
    pub fn apply_blocks_modal(&self, blocks: &[Block2x2], m: &mut ModalVector) -> Result<()> {
        let n = self.n();
        if blocks.len() != n || m.a.len() != n || m.b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: blocks.len() });
        }
        let mut inter = vec![0.0; 2 * n];
        for (r, &p) in self.perm.iter().enumerate() {
            inter[p] = if r < n { m.a[r] } else { m.b[r - n] };
        }
        for (pair, blk) in inter.chunks_exact_mut(2).zip(blocks) {
            let (x, y) = blk.apply(pair[0], pair[1]);
            pair[0] = x;
            pair[1] = y;
        }
        for (r, &p) in self.perm.iter().enumerate() {
            if r < n {
                m.a[r] = inter[p];
            } else {
                m.b[r - n] = inter[p];
            }
        }
        Ok(())
    }

    /// Applies an explicit list of mode blocks to a physical state.
    pub fn apply_blocks(&self, blocks: &[Block2x2], v: &StateVector) -> Result<StateVector> {
        let mut m = self.to_modal(v)?;
        self.apply_blocks_modal(blocks, &mut m)?;
        Ok(self.from_modal(&m))
    }

    /// `φ_k(tA)·v`; `k = 0` is the exponential.
    pub fn apply_phi(&self, k: usize, t: f64, v: &StateVector) -> Result<StateVector> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!("time must be finite and non-negative, got {t}")));
        }
        let blocks = self.mode_blocks(k, t)?;
        self.apply_blocks(&blocks, v)
    }

    /// `e^{tA}v` from the cosine/sine form valid for `β = γ = 0`:
    /// `u' = cos(tΩ)u + Ω⁻¹sin(tΩ)w`, `w' = -Ω sin(tΩ)u + cos(tΩ)w`,
    /// with `Ω_i = sqrt(αλ_i + δ)`.
    pub fn apply_undamped_reference(&self, t: f64, v: &StateVector) -> Result<StateVector> {
        if self.coeffs.beta != 0.0 || self.coeffs.gamma != 0.0 {
            return Err(Error::InvalidParameter("the cosine/sine form needs beta = gamma = 0".into()));
        }
        let mut m = self.to_modal(v)?;
        for (i, p) in self.modes.iter().enumerate() {
            let omega = p.stiffness.sqrt();
            let (s, c) = (t * omega).sin_cos();
            let (a, b) = (m.a[i], m.b[i]);
            m.a[i] = c * a + s / omega * b;
            m.b[i] = -omega * s * a + c * b;
        }
        Ok(self.from_modal(&m))
    }

    /// Dense `Q` for callers that need it.
    pub fn q(&self) -> &DenseMatrix {
        self.fact.q()
    }
}

/// `φ_0..=φ_{K_MAX}` blocks of every mode at `c·τ`.
#[derive(Clone, Debug)]
pub struct CachedStepFunctions {
    pub tau: f64,
    pub c: f64,
    pub blocks: Vec<[Block2x2; K_MAX + 1]>,
}

/// Block families keyed by the exact bit patterns of `(τ, c)`.
#[derive(Clone, Debug, Default)]
pub struct StepFunctionCache {
    entries: Vec<CachedStepFunctions>,
    misses: usize,
}

impl StepFunctionCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&mut self, prop: &BlockPropagator, tau: f64, c: f64) -> &CachedStepFunctions {
        let pos = self.entries.iter().position(|e| e.tau.to_bits() == tau.to_bits() && e.c.to_bits() == c.to_bits());
        let idx = match pos {
            Some(i) => i,
            None => {
                self.misses += 1;
                self.entries.push(CachedStepFunctions { tau, c, blocks: prop.mode_block_families(c * tau) });
                self.entries.len() - 1
            }
        };
        &self.entries[idx]
    }

    /// Number of block families computed so far.
    pub fn misses(&self) -> usize {
        self.misses
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
