//! Orthogonal diagonalization `S = Q·diag(λ)·Qᵀ` of the grid operators.

mod cache;
mod tridiag;

use std::path::Path;

pub use cache::{cache_file_name, load_cache, save_cache, CacheKey, CACHE_FORMAT_VERSION};

use crate::dense::DenseMatrix;
use crate::discretization::GridOperator;
use crate::error::{Error, Result};

/// Eigenvalues in ascending order and the matching orthonormal eigenvectors
/// as the columns of `q`.
///
/// Each eigenvector is oriented so that its first component with magnitude
/// above [`SIGN_THRESHOLD`] is positive, which makes the factorization (and
/// anything cached from it) reproducible.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralFactorization {
    q: DenseMatrix,
    lambda: Vec<f64>,
}

pub const SIGN_THRESHOLD: f64 = 1e-12;

impl SpectralFactorization {
    pub(crate) fn from_parts(q: DenseMatrix, lambda: Vec<f64>) -> Result<Self> {
        if q.rows() != lambda.len() || q.cols() != lambda.len() {
            return Err(Error::DimensionMismatch { expected: lambda.len(), actual: q.rows() });
        }
        Ok(SpectralFactorization { q, lambda })
    }

    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    pub fn q(&self) -> &DenseMatrix {
        &self.q
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// `max |QᵀQ - I|`
    pub fn orthogonality_residual(&self) -> f64 {
        let qtq = self.q.transpose().matmul(&self.q);
        qtq.sub(&DenseMatrix::identity(self.n())).max_abs()
    }

    /// `max |Q·diag(λ)·Qᵀ - S|`
    pub fn reconstruction_residual(&self, s: &DenseMatrix) -> f64 {
        let ql = DenseMatrix::from_fn(self.n(), self.n(), |i, j| self.q.get(i, j) * self.lambda[j]);
        ql.matmul(&self.q.transpose()).sub(s).max_abs()
    }
}

/// Factorizes a grid operator. Tridiagonal operators go straight to the QL
/// iteration; wider bands are first reduced by Householder reflections.
pub fn factorize(op: &GridOperator) -> Result<SpectralFactorization> {
    let n = op.n();
    if op.bandwidth() == 1 {
        let mut v = DenseMatrix::identity(n).data().to_vec();
        let mut d = op.band(0).to_vec();
        let mut e = vec![0.0; n];
        e[1..].copy_from_slice(op.band(1));
        tridiag::tql2(n, &mut v, &mut d, &mut e)?;
        finish(n, v, d)
    } else {
        factorize_dense(&op.to_dense())
    }
}

/// Factorizes a dense symmetric matrix (only the lower triangle is read).
pub fn factorize_dense(s: &DenseMatrix) -> Result<SpectralFactorization> {
    let n = s.rows();
    if n == 0 || s.cols() != n {
        return Err(Error::InvalidDimension(format!("expected a nonempty square matrix, got {}x{}", n, s.cols())));
    }
    let mut v = s.data().to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiag::tred2(n, &mut v, &mut d, &mut e);
    tridiag::tql2(n, &mut v, &mut d, &mut e)?;
    finish(n, v, d)
}

/// Loads the factorization from `dir` when a matching cache file exists;
/// otherwise computes it and writes the cache.
pub fn factorize_cached(op: &GridOperator, dir: &Path) -> Result<SpectralFactorization> {
    let key = CacheKey::for_operator(op);
    let path = dir.join(cache_file_name(&key));
    match load_cache(&path, &key) {
        Ok(f) => Ok(f),
        Err(Error::CacheMiss { .. }) | Err(Error::VersionMismatch { .. }) | Err(Error::CorruptFile(_)) => {
            let f = factorize(op)?;
            std::fs::create_dir_all(dir)?;
            save_cache(&f, &key, &path)?;
            Ok(f)
        }
        Err(other) => Err(other),
    }
}

fn finish(n: usize, v: Vec<f64>, d: Vec<f64>) -> Result<SpectralFactorization> {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let lambda: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut q = DenseMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let first = (0..n).map(|r| v[r * n + src]).find(|x| x.abs() > SIGN_THRESHOLD).unwrap_or(1.0);
        let sign = if first < 0.0 { -1.0 } else { 1.0 };
        for r in 0..n {
            q[(r, col)] = sign * v[r * n + src];
        }
    }
    SpectralFactorization::from_parts(q, lambda)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::discretization::{build_beam_operator, build_wave_operator};

    fn wave_eigenvalue(k: usize, n: usize, ell: f64) -> f64 {
        let dx = ell / (n as f64 + 1.0);
        let s = (k as f64 * PI / (2.0 * (n as f64 + 1.0))).sin();
        4.0 / (dx * dx) * s * s
    }

    #[test]
    fn two_by_two() {
        let s = DenseMatrix::from_row_major(2, 2, vec![2.0, -1.0, -1.0, 2.0]);
        let f = factorize_dense(&s).unwrap();
        assert!((f.lambda()[0] - 1.0).abs() < 1e-15);
        assert!((f.lambda()[1] - 3.0).abs() < 1e-15);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let q = f.q();
        assert!((q.get(0, 0) - r).abs() < 1e-15 && (q.get(1, 0) - r).abs() < 1e-15);
        assert!((q.get(0, 1) - r).abs() < 1e-15 && (q.get(1, 1) + r).abs() < 1e-15);
    }

    #[test]
    fn scaled_identity() {
        let s = DenseMatrix::identity(5).scaled(3.5);
        let f = factorize_dense(&s).unwrap();
        assert_eq!(f.lambda(), &[3.5; 5]);
        assert_eq!(f.q(), &DenseMatrix::identity(5));
    }

    #[test]
    fn diagonal_entries_sorted() {
        let s = DenseMatrix::diagonal(&[1.0, 2.0, 4.0]);
        let f = factorize_dense(&s).unwrap();
        assert_eq!(f.lambda(), &[1.0, 2.0, 4.0]);
        assert_eq!(f.q(), &DenseMatrix::identity(3));
    }

    #[test]
    fn wave_three_points_analytic() {
        let f = factorize(&build_wave_operator(3, 1.0).unwrap()).unwrap();
        let r2 = 2.0_f64.sqrt();
        let expected = [16.0 * (2.0 - r2), 32.0, 16.0 * (2.0 + r2)];
        for (a, b) in f.lambda().iter().zip(expected) {
            assert!((a - b).abs() <= 1e-13 * b, "{a} vs {b}");
        }
    }

    #[test]
    fn wave_eigenvalues_match_formula() {
        for n in [3usize, 8, 16, 50, 200] {
            let f = factorize(&build_wave_operator(n, 1.0).unwrap()).unwrap();
            for (k, &l) in f.lambda().iter().enumerate() {
                let exact = wave_eigenvalue(k + 1, n, 1.0);
                assert!(((l - exact) / exact).abs() <= 1e-10, "n={n} k={k}: {l} vs {exact}");
            }
        }
    }

    #[test]
    fn residuals_within_tolerance() {
        for n in [3usize, 8, 16, 50, 200] {
            for op in [build_wave_operator(n, 1.0).unwrap(), build_beam_operator(n, 1.0).unwrap()] {
                let f = factorize(&op).unwrap();
                let s = op.to_dense();
                assert!(f.orthogonality_residual() <= 1e-12 * n as f64, "{} n={n}", op.kind());
                assert!(f.reconstruction_residual(&s) <= 1e-10 * s.max_abs(), "{} n={n}", op.kind());
                assert!(f.lambda().windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }

    #[test]
    fn sign_convention() {
        let f = factorize(&build_beam_operator(20, 1.0).unwrap()).unwrap();
        for j in 0..20 {
            let first = (0..20).map(|i| f.q().get(i, j)).find(|x| x.abs() > SIGN_THRESHOLD).unwrap();
            assert!(first > 0.0);
        }
    }

    #[test]
    fn operators_are_positive_definite() {
        for n in 3..=64 {
            for op in [build_wave_operator(n, 1.0).unwrap(), build_beam_operator(n, 1.0).unwrap()] {
                let f = factorize(&op).unwrap();
                assert!(f.lambda()[0] > 0.0, "{} n={n}", op.kind());
            }
        }
        assert!(factorize(&build_wave_operator(1, 1.0).unwrap()).unwrap().lambda()[0] > 0.0);
        assert!(factorize(&build_wave_operator(2, 1.0).unwrap()).unwrap().lambda()[0] > 0.0);
    }

    #[test]
    fn beam_three_points_positive() {
        // characteristic polynomial of [[5,-4,1],[-4,6,-4],[1,-4,5]]:
        // the antisymmetric vector (1,0,-1) gives 4; the other two roots solve
        // x² - 12x + 4 = 0 -> 6 ± 4√2, all positive.
        let f = factorize(&build_beam_operator(3, 1.0).unwrap()).unwrap();
        let k = 256.0;
        let r = 4.0 * 2.0_f64.sqrt();
        let expected = [(6.0 - r) * k, 4.0 * k, (6.0 + r) * k];
        for (a, b) in f.lambda().iter().zip(expected) {
            assert!(((a - b) / b).abs() < 1e-13, "{a} vs {b}");
        }
    }

    #[test]
    fn deterministic() {
        let op = build_beam_operator(40, 1.0).unwrap();
        assert_eq!(factorize(&op).unwrap(), factorize(&op).unwrap());
    }
}
