//! Binary cache for factorizations.
//!
//! Layout (little endian):
//!
//! | bytes | field                                   |
//! |-------|-----------------------------------------|
//! | 4     | magic `WXEG`                            |
//! | 4     | format version (`u32`)                  |
//! | 1     | equation kind (0 = wave, 1 = beam)      |
//! | 8     | n (`u64`)                               |
//! | 8     | domain length (`f64`)                   |
//! | 8·n   | eigenvalues                             |
//! | 8·n²  | eigenvectors, row-major                 |

use std::fs;
use std::path::Path;

use super::SpectralFactorization;
use crate::dense::DenseMatrix;
use crate::discretization::{EquationKind, GridOperator};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"WXEG";
pub const CACHE_FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 1 + 8 + 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CacheKey {
    pub kind: EquationKind,
    pub n: usize,
    pub ell: f64,
}

impl CacheKey {
    pub fn for_operator(op: &GridOperator) -> Self {
        CacheKey { kind: op.kind(), n: op.n(), ell: op.ell() }
    }
}

pub fn cache_file_name(key: &CacheKey) -> String {
    format!("eig-{}-n{}-ell{:016x}.bin", key.kind, key.n, key.ell.to_bits())
}

pub fn save_cache(f: &SpectralFactorization, key: &CacheKey, path: &Path) -> Result<()> {
    if f.n() != key.n {
        return Err(Error::DimensionMismatch { expected: key.n, actual: f.n() });
    }
    let n = f.n();
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * n * (n + 1));
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&CACHE_FORMAT_VERSION.to_le_bytes());
    buf.push(key.kind.tag());
    buf.extend_from_slice(&(n as u64).to_le_bytes());
    buf.extend_from_slice(&key.ell.to_le_bytes());
    for v in f.lambda().iter().chain(f.q().data()) {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, &buf)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_cache(path: &Path, key: &CacheKey) -> Result<SpectralFactorization> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::CacheMiss { path: path.to_path_buf(), reason: "file not found".into() })
        }
        Err(e) => return Err(e.into()),
    };
    if bytes.len() < HEADER_LEN {
        return Err(Error::CorruptFile(format!("{}: truncated header", path.display())));
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::CorruptFile(format!("{}: bad magic", path.display())));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != CACHE_FORMAT_VERSION {
        return Err(Error::VersionMismatch { found: version, expected: CACHE_FORMAT_VERSION });
    }
    let kind = EquationKind::from_tag(bytes[8])
        .ok_or_else(|| Error::CorruptFile(format!("{}: bad equation tag {}", path.display(), bytes[8])))?;
    let n = u64::from_le_bytes(bytes[9..17].try_into().unwrap()) as usize;
    let ell = f64::from_le_bytes(bytes[17..25].try_into().unwrap());

    if kind != key.kind || n != key.n || ell.to_bits() != key.ell.to_bits() {
        return Err(Error::CacheMiss {
            path: path.to_path_buf(),
            reason: format!("file holds ({kind}, n={n}, ell={ell}), wanted ({}, n={}, ell={})", key.kind, key.n, key.ell),
        });
    }

    let expected_len = n
        .checked_mul(n + 1)
        .and_then(|c| c.checked_mul(8))
        .and_then(|c| c.checked_add(HEADER_LEN))
        .ok_or_else(|| Error::CorruptFile(format!("{}: absurd size n={n}", path.display())))?;
    if bytes.len() != expected_len {
        return Err(Error::CorruptFile(format!(
            "{}: expected {expected_len} bytes, found {}",
            path.display(),
            bytes.len()
        )));
    }
    let mut values = bytes[HEADER_LEN..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let lambda: Vec<f64> = values.by_ref().take(n).collect();
    let q: Vec<f64> = values.collect();
    SpectralFactorization::from_parts(DenseMatrix::from_row_major(n, n, q), lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{build_beam_operator, build_wave_operator};
    use crate::eigen::{factorize, factorize_cached};

    #[test]
    fn round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let op = build_beam_operator(17, 1.0).unwrap();
        let f = factorize(&op).unwrap();
        let key = CacheKey::for_operator(&op);
        let path = dir.path().join(cache_file_name(&key));
        save_cache(&f, &key, &path).unwrap();
        let g = load_cache(&path, &key).unwrap();
        assert_eq!(f.lambda().iter().map(|v| v.to_bits()).collect::<Vec<_>>(), g.lambda().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        assert_eq!(f.q().data().iter().map(|v| v.to_bits()).collect::<Vec<_>>(), g.q().data().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn wrong_key_is_a_miss() {
        let dir = tempfile::tempdir().unwrap();
        let op = build_wave_operator(6, 1.0).unwrap();
        let key = CacheKey::for_operator(&op);
        let path = dir.path().join("f.bin");
        save_cache(&factorize(&op).unwrap(), &key, &path).unwrap();
        let wrong_n = CacheKey { n: 7, ..key };
        assert!(matches!(load_cache(&path, &wrong_n), Err(Error::CacheMiss { .. })));
        let wrong_kind = CacheKey { kind: EquationKind::Beam, ..key };
        assert!(matches!(load_cache(&path, &wrong_kind), Err(Error::CacheMiss { .. })));
        assert!(matches!(load_cache(&dir.path().join("absent.bin"), &key), Err(Error::CacheMiss { .. })));
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let op = build_wave_operator(6, 1.0).unwrap();
        let key = CacheKey::for_operator(&op);
        let path = dir.path().join("f.bin");
        save_cache(&factorize(&op).unwrap(), &key, &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() - 5]).unwrap();
        assert!(matches!(load_cache(&path, &key), Err(Error::CorruptFile(_))));
        fs::write(&path, &bytes[..10]).unwrap();
        assert!(matches!(load_cache(&path, &key), Err(Error::CorruptFile(_))));
    }

    #[test]
    fn version_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let op = build_wave_operator(4, 1.0).unwrap();
        let key = CacheKey::for_operator(&op);
        let path = dir.path().join("f.bin");
        save_cache(&factorize(&op).unwrap(), &key, &path).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes[4..8].copy_from_slice(&99u32.to_le_bytes());
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(load_cache(&path, &key), Err(Error::VersionMismatch { found: 99, .. })));
    }

    #[test]
    fn cached_factorization_reused() {
        let dir = tempfile::tempdir().unwrap();
        let op = build_beam_operator(12, 1.0).unwrap();
        let a = factorize_cached(&op, dir.path()).unwrap();
        let b = factorize_cached(&op, dir.path()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, factorize(&op).unwrap());
    }
}
