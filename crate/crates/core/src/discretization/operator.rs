use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Which spatial operator the grid discretizes: `-d²/dx²` or `d⁴/dx⁴`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EquationKind {
    Wave,
    Beam,
}

impl EquationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EquationKind::Wave => "wave",
            EquationKind::Beam => "beam",
        }
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            EquationKind::Wave => 0,
            EquationKind::Beam => 1,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(EquationKind::Wave),
            1 => Some(EquationKind::Beam),
            _ => None,
        }
    }
}

impl fmt::Display for EquationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EquationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wave" => Ok(EquationKind::Wave),
            "beam" => Ok(EquationKind::Beam),
            other => Err(Error::Config(format!("unknown equation kind `{other}`"))),
        }
    }
}

/// Symmetric banded finite-difference matrix on the interior nodes
/// `x_i = i·dx`, `i = 1..=n`, with `dx = ell / (n + 1)`.
///
/// Only the diagonal and the super-diagonals are stored; `bands[d][i]` is the
/// entry `(i, i + d)` (and by symmetry `(i + d, i)`).
#[derive(Clone, Debug, PartialEq)]
pub struct GridOperator {
    kind: EquationKind,
    n: usize,
    ell: f64,
    dx: f64,
    bands: Vec<Vec<f64>>,
}

/// Tridiagonal `S_w = (1/dx²)·tridiag(-1, 2, -1)` for `-u''` with homogeneous
/// Dirichlet conditions.
pub fn build_wave_operator(n: usize, ell: f64) -> Result<GridOperator> {
    if n == 0 {
        return Err(Error::InvalidDimension("wave operator needs n >= 1".into()));
    }
    if !(ell > 0.0 && ell.is_finite()) {
        return Err(Error::InvalidDimension(format!("domain length must be positive, got {ell}")));
    }
    let dx = ell / (n as f64 + 1.0);
    let dx2 = dx * dx;
    let diag = vec![2.0 / dx2; n];
    let off = vec![-1.0 / dx2; n - 1];
    Ok(GridOperator { kind: EquationKind::Wave, n, ell, dx, bands: vec![diag, off] })
}

/// Pentadiagonal `S_b` for `u''''` with hinged-hinged ends. The corner
/// diagonal entries are 5/dx⁴ instead of 6/dx⁴ (zero moment at the ends).
pub fn build_beam_operator(n: usize, length: f64) -> Result<GridOperator> {
    if n < 3 {
        return Err(Error::InvalidDimension(format!("beam operator needs n >= 3, got {n}")));
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::InvalidDimension(format!("beam length must be positive, got {length}")));
    }
    let dx = length / (n as f64 + 1.0);
    let dx4 = (dx * dx) * (dx * dx);
    let mut diag = vec![6.0 / dx4; n];
    diag[0] = 5.0 / dx4;
    diag[n - 1] = 5.0 / dx4;
    let off1 = vec![-4.0 / dx4; n - 1];
    let off2 = vec![1.0 / dx4; n - 2];
    Ok(GridOperator { kind: EquationKind::Beam, n, ell: length, dx, bands: vec![diag, off1, off2] })
}

/// Dispatches on `kind`.
pub fn build_operator(kind: EquationKind, n: usize, ell: f64) -> Result<GridOperator> {
    match kind {
        EquationKind::Wave => build_wave_operator(n, ell),
        EquationKind::Beam => build_beam_operator(n, ell),
    }
}

impl GridOperator {
    pub fn kind(&self) -> EquationKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Number of nonzero super-diagonals (1 for wave, 2 for beam).
    pub fn bandwidth(&self) -> usize {
        self.bands.len() - 1
    }

    pub fn band(&self, offset: usize) -> &[f64] {
        &self.bands[offset]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let d = i.abs_diff(j);
        if d > self.bandwidth() {
            return 0.0;
        }
        self.bands[d][i.min(j)]
    }

    /// Interior node coordinates `i·dx`, `i = 1..=n`.
    pub fn nodes(&self) -> Vec<f64> {
        (1..=self.n).map(|i| i as f64 * self.dx).collect()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// `out = S x`.
    pub fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(x.len(), n);
        debug_assert_eq!(out.len(), n);
        for (o, (&d, &xi)) in out.iter_mut().zip(self.bands[0].iter().zip(x)) {
            *o = d * xi;
        }
        for (offset, band) in self.bands.iter().enumerate().skip(1) {
            for (i, &b) in band.iter().enumerate() {
                out[i] += b * x[i + offset];
                out[i + offset] += b * x[i];
            }
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.matvec_into(x, &mut out);
        out
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.bands.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wave_single_point() {
        let s = build_wave_operator(1, 1.0).unwrap();
        assert_eq!(s.dx(), 0.5);
        assert_eq!(s.to_dense().data(), &[8.0]);
    }

    #[test]
    fn wave_three_points() {
        let s = build_wave_operator(3, 1.0).unwrap();
        let expected = [32.0, -16.0, 0.0, -16.0, 32.0, -16.0, 0.0, -16.0, 32.0];
        assert_eq!(s.to_dense().data(), &expected);
    }

    #[test]
    fn beam_three_points() {
        let s = build_beam_operator(3, 1.0).unwrap();
        let k = 256.0;
        let expected = [5.0, -4.0, 1.0, -4.0, 6.0, -4.0, 1.0, -4.0, 5.0].map(|v| v * k);
        assert_eq!(s.to_dense().data(), &expected);
    }

    #[test]
    fn beam_interior_pattern() {
        let s = build_beam_operator(7, 2.0).unwrap();
        let dx4 = s.dx().powi(4);
        assert_eq!(s.get(0, 0) * dx4, 5.0);
        assert_eq!(s.get(6, 6) * dx4, 5.0);
        for i in 1..6 {
            assert!((s.get(i, i) * dx4 - 6.0).abs() < 1e-12);
        }
        assert_eq!(s.get(0, 3), 0.0);
        assert_eq!(s.get(4, 2), s.get(2, 4));
    }

    #[test]
    fn exact_symmetry() {
        for s in [build_wave_operator(9, 1.3).unwrap(), build_beam_operator(9, 0.7).unwrap()] {
            let d = s.to_dense();
            assert_eq!(d, d.transpose());
        }
    }

    #[test]
    fn wave_row_sums() {
        let s = build_wave_operator(10, 1.0).unwrap();
        let d = s.to_dense();
        let inv = 1.0 / (s.dx() * s.dx());
        for i in 0..10 {
            let sum: f64 = (0..10).map(|j| d.get(i, j)).sum();
            let expected = if i == 0 || i == 9 { inv } else { 0.0 };
            assert_eq!(sum, expected, "row {i}");
        }
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(matches!(build_wave_operator(0, 1.0), Err(Error::InvalidDimension(_))));
        assert!(matches!(build_wave_operator(4, 0.0), Err(Error::InvalidDimension(_))));
        assert!(matches!(build_wave_operator(4, -1.0), Err(Error::InvalidDimension(_))));
        assert!(matches!(build_beam_operator(2, 1.0), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn banded_matvec_matches_dense() {
        let s = build_beam_operator(11, 1.0).unwrap();
        let x: Vec<f64> = (0..11).map(|i| (i as f64 * 0.37).sin()).collect();
        let a = s.matvec(&x);
        let b = s.to_dense().matvec(&x);
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).abs() <= 1e-12 * q.abs().max(1.0) * s.max_abs());
        }
    }
}
