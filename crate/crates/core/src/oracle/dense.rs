//! Brute-force matrix functions used to cross-check the spectral path.
//!
//! These deliberately share nothing with the closed forms: the exponential is
//! scaling-and-squaring on a Taylor series, and `φ_k` comes from the
//! exponential of a block-augmented matrix.
//!
//! The series and the squarings run in double-double arithmetic. Stiff
//! damped beams need 25 or more squarings, and each one doubles the relative
//! error carried by the slowly decaying modes; in plain `f64` that alone
//! costs about eight digits.

use crate::dense::DenseMatrix;
use crate::discretization::{Coefficients, GridOperator};
use crate::error::{Error, Result};

/// Largest grid size accepted by [`assemble_dense_a`].
pub const ORACLE_MAX_N: usize = 64;

/// Largest matrix accepted by [`dense_expm`], augmented blocks included.
pub const ORACLE_MAX_DIM: usize = 128;

/// Scale down until the 1-norm is at most this before summing the series.
const SCALED_NORM: f64 = 0.5;

/// Series truncation, relative to the partial sum. Tighter than `f64`
/// resolution because the squarings amplify it.
const TERM_TOL: f64 = 1e-28;

/// `A = [[0, I], [-αS - δI, -βS - γI]]` as an explicit `2n×2n` matrix.
pub fn assemble_dense_a(s: &GridOperator, c: &Coefficients) -> Result<DenseMatrix> {
    let n = s.n();
    if n > ORACLE_MAX_N {
        return Err(Error::OracleScaleExceeded { requested: n, limit: ORACLE_MAX_N });
    }
    let mut a = DenseMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        a[(i, n + i)] = 1.0;
        for j in 0..n {
            let sij = s.get(i, j);
            let id = if i == j { 1.0 } else { 0.0 };
            a[(n + i, j)] = -c.alpha * sij - c.delta * id;
            a[(n + i, n + j)] = -c.beta * sij - c.gamma * id;
        }
    }
    Ok(a)
}

fn check_square(m: &DenseMatrix, limit: usize) -> Result<usize> {
    if m.rows() != m.cols() {
        return Err(Error::InvalidDimension(format!("expected a square matrix, got {}x{}", m.rows(), m.cols())));
    }
    if m.rows() > limit {
        return Err(Error::OracleScaleExceeded { requested: m.rows(), limit });
    }
    Ok(m.rows())
}

/// `e^M` by scaling and squaring.
pub fn dense_expm(m: &DenseMatrix) -> Result<DenseMatrix> {
    let n = check_square(m, ORACLE_MAX_DIM)?;
    let norm = m.norm_one();
    let mut squarings = 0i32;
    while norm / 2f64.powi(squarings) > SCALED_NORM {
        squarings += 1;
    }
    let x = DdMatrix::from_f64(&m.scaled(1.0 / 2f64.powi(squarings)));

    let mut sum = DdMatrix::identity(n);
    let mut term = DdMatrix::identity(n);
    for j in 1..200 {
        term = term.matmul(&x);
        term.scale_inv(j as f64);
        sum.add_assign(&term);
        if term.max_abs() < TERM_TOL * sum.max_abs().max(1.0) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.matmul(&sum);
    }
    Ok(sum.to_f64())
}

/// Double-double value `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, Default)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    #[inline]
    fn quick_two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        Dd { hi: s, lo: b - (s - a) }
    }

    #[inline]
    fn add(self, o: Dd) -> Dd {
        let s = self.hi + o.hi;
        let v = s - self.hi;
        let e = (self.hi - (s - v)) + (o.hi - v) + self.lo + o.lo;
        Dd::quick_two_sum(s, e)
    }

    #[inline]
    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p) + (self.hi * o.lo + self.lo * o.hi);
        Dd::quick_two_sum(p, e)
    }

    #[inline]
    fn div_f64(self, d: f64) -> Dd {
        let q = self.hi / d;
        // remainder self - q·d, exactly up to the low word
        let p = q * d;
        let pe = q.mul_add(d, -p);
        let r = ((self.hi - p) - pe + self.lo) / d;
        Dd::quick_two_sum(q, r)
    }
}

/// Square double-double matrix, row-major.
struct DdMatrix {
    n: usize,
    data: Vec<Dd>,
}

impl DdMatrix {
    fn identity(n: usize) -> Self {
        let mut data = vec![Dd::default(); n * n];
        for i in 0..n {
            data[i * n + i].hi = 1.0;
        }
        DdMatrix { n, data }
    }

    fn from_f64(m: &DenseMatrix) -> Self {
        DdMatrix { n: m.rows(), data: m.data().iter().map(|&hi| Dd { hi, lo: 0.0 }).collect() }
    }

    fn to_f64(&self) -> DenseMatrix {
        DenseMatrix::from_row_major(self.n, self.n, self.data.iter().map(|d| d.hi + d.lo).collect())
    }

    fn matmul(&self, o: &DdMatrix) -> DdMatrix {
        let n = self.n;
        let mut out = vec![Dd::default(); n * n];
        for i in 0..n {
            let row = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.hi == 0.0 {
                    continue;
                }
                for (c, &b) in row.iter_mut().zip(&o.data[k * n..(k + 1) * n]) {
                    if b.hi != 0.0 {
                        *c = c.add(a.mul(b));
                    }
                }
            }
        }
        DdMatrix { n, data: out }
    }

    fn scale_inv(&mut self, d: f64) {
        for v in &mut self.data {
            *v = v.div_f64(d);
        }
    }

    fn add_assign(&mut self, o: &DdMatrix) {
        for (a, &b) in self.data.iter_mut().zip(&o.data) {
            *a = a.add(b);
        }
    }

    fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.hi.abs()))
    }
}

/// `[φ_0(M), ..., φ_k(M)]` read off the first block row of the exponential
/// of the `(k+1)×(k+1)` block matrix with `M` in the corner and identities
/// on the block superdiagonal.
pub fn dense_phi_family(k: usize, m: &DenseMatrix) -> Result<Vec<DenseMatrix>> {
    let n = check_square(m, ORACLE_MAX_DIM)?;
    let dim = n * (k + 1);
    if dim > ORACLE_MAX_DIM {
        return Err(Error::OracleScaleExceeded { requested: dim, limit: ORACLE_MAX_DIM });
    }
    let mut aug = DenseMatrix::zeros(dim, dim);
    aug.set_block(0, 0, m);
    for b in 0..k {
        for i in 0..n {
            aug[(b * n + i, (b + 1) * n + i)] = 1.0;
        }
    }
    let e = dense_expm(&aug)?;
    Ok((0..=k).map(|j| e.block(0, j * n, n, n)).collect())
}

/// `φ_k(M)`.
pub fn dense_phi(k: usize, m: &DenseMatrix) -> Result<DenseMatrix> {
    Ok(dense_phi_family(k, m)?.pop().expect("family is nonempty"))
}
