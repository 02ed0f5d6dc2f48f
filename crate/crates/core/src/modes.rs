//! Closed-form `e^{tG}` and `φ_k(tG)` for the 2×2 mode blocks
//! `G = [[0, 1], [-(αλ + δ), -(βλ + γ)]]`, in real arithmetic.
//!
//! With `m = -(βλ + γ)/2` the eigenvalues of `G` are `m ± n` (two real
//! roots), `m` (double root) or `m ± i·n` (complex pair), depending on the
//! sign of the discriminant `(βλ + γ)² - 4(αλ + δ)`.

use std::fmt;

use serde::Serialize;

use crate::discretization::Coefficients;
use crate::error::{Error, Result};

/// Highest φ index the block routines evaluate.
pub const K_MAX: usize = 4;

/// Relative width of the band around a zero discriminant that is treated
/// as an exact double root.
pub const DISCRIMINANT_TOL: f64 = 1e-12;

/// Below this magnitude φ-functions are summed from their Taylor series;
/// above it the recurrence `φ_{k+1}(z) = (φ_k(z) - 1/k!)/z` is used.
pub const SERIES_SWITCH: f64 = 0.5;

/// Series are truncated once a term drops below this fraction of the sum.
const SERIES_RTOL: f64 = 1e-18;

/// Complex-pair blocks at `t` below this are returned as `I/k!`.
const TINY_T: f64 = 1e-14;

const INV_FACTORIAL: [f64; K_MAX + 2] = {
    let mut out = [1.0; K_MAX + 2];
    let mut i = 1;
    while i < out.len() {
        out[i] = out[i - 1] / i as f64;
        i += 1;
    }
    out
};

#[inline]
pub fn inv_factorial(k: usize) -> f64 {
    INV_FACTORIAL[k]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeCase {
    RealDistinct,
    DoubleRoot,
    ComplexPair,
}

impl ModeCase {
    pub fn as_str(self) -> &'static str {
        match self {
            ModeCase::RealDistinct => "real_distinct",
            ModeCase::DoubleRoot => "double_root",
            ModeCase::ComplexPair => "complex_pair",
        }
    }
}

impl fmt::Display for ModeCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Spectral data of one mode block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeParams {
    /// Eigenvalue of `S` this mode belongs to.
    pub lambda: f64,
    /// `-(βλ + γ)/2`
    pub m: f64,
    /// `½·sqrt(|disc|)`; exactly zero for a double root.
    pub n: f64,
    /// `αλ + δ`, i.e. minus the lower-left entry of `G`.
    pub stiffness: f64,
    pub case: ModeCase,
}

/// Row-major 2×2 matrix.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Block2x2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Block2x2 {
    pub const IDENTITY: Block2x2 = Block2x2 { a11: 1.0, a12: 0.0, a21: 0.0, a22: 1.0 };

    pub fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Block2x2 { a11, a12, a21, a22 }
    }

    pub fn scaled_identity(s: f64) -> Self {
        Block2x2 { a11: s, a12: 0.0, a21: 0.0, a22: s }
    }

    #[inline]
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        (self.a11 * x + self.a12 * y, self.a21 * x + self.a22 * y)
    }

    pub fn mul(&self, o: &Block2x2) -> Block2x2 {
        Block2x2 {
            a11: self.a11 * o.a11 + self.a12 * o.a21,
            a12: self.a11 * o.a12 + self.a12 * o.a22,
            a21: self.a21 * o.a11 + self.a22 * o.a21,
            a22: self.a21 * o.a12 + self.a22 * o.a22,
        }
    }

    pub fn scale(&self, s: f64) -> Block2x2 {
        Block2x2 { a11: s * self.a11, a12: s * self.a12, a21: s * self.a21, a22: s * self.a22 }
    }

    pub fn add(&self, o: &Block2x2) -> Block2x2 {
        Block2x2 { a11: self.a11 + o.a11, a12: self.a12 + o.a12, a21: self.a21 + o.a21, a22: self.a22 + o.a22 }
    }

    pub fn sub(&self, o: &Block2x2) -> Block2x2 {
        self.add(&o.scale(-1.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.a11.abs().max(self.a12.abs()).max(self.a21.abs()).max(self.a22.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a21.is_finite() && self.a22.is_finite()
    }

    /// `s·[[-a, 1], [-stiffness, b]] + d·I`, the shape every closed form takes.
    #[inline]
    fn affine(s: f64, a: f64, stiffness: f64, b: f64, d: f64) -> Block2x2 {
        Block2x2 { a11: d - s * a, a12: s, a21: -s * stiffness, a22: d + s * b }
    }
}

impl ModeParams {
    /// The block `G` itself.
    pub fn generator(&self) -> Block2x2 {
        Block2x2::new(0.0, 1.0, -self.stiffness, 2.0 * self.m)
    }

    /// Eigenvalues of `G`, as `(re, im)` pairs.
    pub fn eigenvalues(&self) -> [(f64, f64); 2] {
        match self.case {
            ModeCase::RealDistinct => {
                let (zp, zm) = self.real_roots();
                [(zp, 0.0), (zm, 0.0)]
            }
            ModeCase::DoubleRoot => [(self.m, 0.0), (self.m, 0.0)],
            ModeCase::ComplexPair => [(self.m, self.n), (self.m, -self.n)],
        }
    }

    /// `(m + n, m - n)` for the real case. `m + n` is formed as
    /// `stiffness / (m - n)` so it keeps full precision when `|m| ≈ n`.
    fn real_roots(&self) -> (f64, f64) {
        let zm = self.m - self.n;
        let zp = if zm != 0.0 { self.stiffness / zm } else { self.m + self.n };
        (zp, zm)
    }
}

/// Classifies the block for eigenvalue `lambda` of `S`.
pub fn classify_mode(lambda: f64, c: &Coefficients) -> ModeParams {
    let damping = c.beta * lambda + c.gamma;
    let stiffness = c.alpha * lambda + c.delta;
    let disc = damping * damping - 4.0 * stiffness;
    let scale = 1.0_f64.max(damping * damping).max(4.0 * stiffness.abs());
    let tol = DISCRIMINANT_TOL * scale;
    let m = -0.5 * damping;
    let (case, n) = if disc > tol {
        (ModeCase::RealDistinct, 0.5 * disc.sqrt())
    } else if disc < -tol {
        (ModeCase::ComplexPair, 0.5 * (-disc).sqrt())
    } else {
        (ModeCase::DoubleRoot, 0.0)
    };
    ModeParams { lambda, m, n, stiffness, case }
}

/// `e^{tG}`.
pub fn exp_block(t: f64, p: &ModeParams) -> Block2x2 {
    if t == 0.0 {
        return Block2x2::IDENTITY;
    }
    match p.case {
        ModeCase::RealDistinct => {
            let (zp, zm) = p.real_roots();
            let ep = (t * zp).exp();
            // (e^{t(m+n)} - e^{t(m-n)})/(2n) without cancellation
            let s = -ep * (-2.0 * t * p.n).exp_m1() / (2.0 * p.n);
            Block2x2::affine(s, zp, p.stiffness, zm, ep)
        }
        ModeCase::DoubleRoot => {
            let tm = t * p.m;
            let e = tm.exp();
            Block2x2::new(e * (1.0 - tm), e * t, -e * tm * p.m, e * (1.0 + tm))
        }
        ModeCase::ComplexPair => {
            let e = (t * p.m).exp();
            let (sin, cos) = (t * p.n).sin_cos();
            let s = e * sin / p.n;
            Block2x2::affine(s, p.m, p.stiffness, p.m, e * cos)
        }
    }
}

/// `φ_k(tG)` for `0 <= k <= K_MAX` (`k = 0` is the exponential).
pub fn phi_block(k: usize, t: f64, p: &ModeParams) -> Result<Block2x2> {
    if k > K_MAX {
        return Err(Error::KOutOfRange { k, k_max: K_MAX });
    }
    Ok(phi_block_unchecked(k, t, p))
}

/// φ_0..=φ_{K_MAX} at `tG` in one pass.
pub fn phi_blocks(t: f64, p: &ModeParams) -> [Block2x2; K_MAX + 1] {
    let mut out = [Block2x2::IDENTITY; K_MAX + 1];
    out[0] = exp_block(t, p);
    if t == 0.0 {
        for (k, b) in out.iter_mut().enumerate() {
            *b = Block2x2::scaled_identity(inv_factorial(k));
        }
        return out;
    }
    match p.case {
        ModeCase::RealDistinct => {
            let (zp, zm) = p.real_roots();
            let plus = scalar_phi_family(t * zp);
            let minus = scalar_phi_family(t * zm);
            for k in 1..=K_MAX {
                let s = (plus[k] - minus[k]) / (2.0 * p.n);
                out[k] = Block2x2::affine(s, zp, p.stiffness, zm, plus[k]);
            }
        }
        ModeCase::DoubleRoot => {
            let z = t * p.m;
            let (phi, dphi) = scalar_phi_and_derivative(z);
            for k in 1..=K_MAX {
                // φ'_k(tm)·[[-tm, t], [-tm², tm]] + φ_k(tm)·I
                let s = dphi[k];
                out[k] = Block2x2::new(phi[k] - s * z, s * t, -s * z * p.m, phi[k] + s * z);
            }
        }
        ModeCase::ComplexPair => {
            let (re, im) = complex_phi_family(t, p.m, p.n);
            for k in 1..=K_MAX {
                out[k] = Block2x2::affine(im[k] / p.n, p.m, p.stiffness, p.m, re[k]);
            }
        }
    }
    out
}

fn phi_block_unchecked(k: usize, t: f64, p: &ModeParams) -> Block2x2 {
    if k == 0 {
        exp_block(t, p)
    } else {
        phi_blocks(t, p)[k]
    }
}

/// Real and imaginary parts of `φ_0..=φ_{K_MAX}` at `z = t(m + i·n)`.
///
/// For `|z| >= SERIES_SWITCH` this runs the real recursion
/// `i_k = (m·i_{k-1} - n·(r_{k-1} - 1/(k-1)!)) / (t(m² + n²))`,
/// `r_k = (n·i_{k-1} + m·(r_{k-1} - 1/(k-1)!)) / (t(m² + n²))`
/// from `i_0 = e^{tm} sin(tn)`, `r_0 = e^{tm} cos(tn)`; closer to the origin
/// the Taylor series is summed in real/imaginary pairs instead.
pub fn complex_phi_family(t: f64, m: f64, n: f64) -> ([f64; K_MAX + 1], [f64; K_MAX + 1]) {
    let mut re = [0.0; K_MAX + 1];
    let mut im = [0.0; K_MAX + 1];
    if t < TINY_T || (m == 0.0 && n == 0.0) {
        for k in 0..=K_MAX {
            re[k] = inv_factorial(k);
        }
        let e = (t * m).exp();
        let (s, c) = (t * n).sin_cos();
        re[0] = e * c;
        im[0] = e * s;
        return (re, im);
    }
    let (zr, zi) = (t * m, t * n);
    let e = zr.exp();
    let (s, c) = zi.sin_cos();
    re[0] = e * c;
    im[0] = e * s;
    if zr.hypot(zi) < SERIES_SWITCH {
        for k in 1..=K_MAX {
            let (r, i) = complex_series(k, zr, zi);
            re[k] = r;
            im[k] = i;
        }
    } else {
        let denom = t * (m * m + n * n);
        for k in 1..=K_MAX {
            let shifted = re[k - 1] - inv_factorial(k - 1);
            im[k] = (m * im[k - 1] - n * shifted) / denom;
            re[k] = (n * im[k - 1] + m * shifted) / denom;
        }
    }
    (re, im)
}

/// `Σ_j z^j/(j+k)!` for complex `z = zr + i·zi`.
fn complex_series(k: usize, zr: f64, zi: f64) -> (f64, f64) {
    let mut term_r = inv_factorial(k);
    let mut term_i = 0.0;
    let mut sum_r = term_r;
    let mut sum_i = 0.0;
    for j in 1..200 {
        let d = (j + k) as f64;
        let tr = (term_r * zr - term_i * zi) / d;
        let ti = (term_r * zi + term_i * zr) / d;
        term_r = tr;
        term_i = ti;
        sum_r += term_r;
        sum_i += term_i;
        if term_r.hypot(term_i) < SERIES_RTOL * sum_r.hypot(sum_i) {
            break;
        }
    }
    (sum_r, sum_i)
}

/// Scalar `φ_k(z)`; `φ_0 = e^z`, `φ_k(z) = Σ_j z^j/(j+k)!`.
pub fn scalar_phi(k: usize, z: f64) -> Result<f64> {
    if k > K_MAX {
        return Err(Error::KOutOfRange { k, k_max: K_MAX });
    }
    if k == 0 {
        return Ok(z.exp());
    }
    if z.abs() < SERIES_SWITCH {
        return Ok(real_series(k, z));
    }
    let mut phi = z.exp();
    for j in 1..=k {
        phi = (phi - inv_factorial(j - 1)) / z;
    }
    Ok(phi)
}

fn real_series(k: usize, z: f64) -> f64 {
    let mut term = inv_factorial(k);
    let mut sum = term;
    for j in 1..200 {
        term *= z / (j + k) as f64;
        sum += term;
        if term.abs() < SERIES_RTOL * sum.abs() {
            break;
        }
    }
    sum
}

/// `Σ_{j>=1} j z^{j-1}/(j+k)!`, the derivative of the series.
fn real_series_derivative(k: usize, z: f64) -> f64 {
    // term_j = z^{j-1}/(j+k)!, summand j·term_j
    let mut term = inv_factorial(k + 1);
    let mut sum = term;
    for j in 2..200 {
        term *= z / (j + k) as f64;
        let add = j as f64 * term;
        sum += add;
        if add.abs() < SERIES_RTOL * sum.abs() {
            break;
        }
    }
    sum
}

fn scalar_phi_family(z: f64) -> [f64; K_MAX + 1] {
    let mut out = [0.0; K_MAX + 1];
    out[0] = z.exp();
    if z.abs() < SERIES_SWITCH {
        for (k, o) in out.iter_mut().enumerate().skip(1) {
            *o = real_series(k, z);
        }
    } else {
        for k in 1..=K_MAX {
            out[k] = (out[k - 1] - inv_factorial(k - 1)) / z;
        }
    }
    out
}

/// `(φ_k(z), φ'_k(z))` for `k = 0..=K_MAX`, with
/// `φ'_{k+1}(z) = (φ'_k(z) - φ_{k+1}(z))/z` away from the origin.
fn scalar_phi_and_derivative(z: f64) -> ([f64; K_MAX + 1], [f64; K_MAX + 1]) {
    let phi = scalar_phi_family(z);
    let mut dphi = [0.0; K_MAX + 1];
    dphi[0] = phi[0];
    if z.abs() < SERIES_SWITCH {
        for (k, d) in dphi.iter_mut().enumerate().skip(1) {
            *d = real_series_derivative(k, z);
        }
    } else {
        for k in 1..=K_MAX {
            dphi[k] = (dphi[k - 1] - phi[k]) / z;
        }
    }
    (phi, dphi)
}
