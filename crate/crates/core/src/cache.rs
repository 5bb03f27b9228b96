//! On-disk cache for Slepian bases.
//!
//! One file per `(L, region)`: the magic `SLPB1`, then the `L²` unclamped
//! eigenvalues and the `L² × L²` eigenvector entries (column-major, re then
//! im), all little-endian `f64`. Files are written to a temporary name and
//! renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::concentration::SlepianBasis;
use crate::harmonic::Bandlimit;
use crate::region::Region;
use crate::{Error, Result};

pub const MAGIC: &[u8; 5] = b"SLPB1";

/// Environment variable naming the cache directory.
pub const CACHE_DIR_ENV: &str = "SLEPIANKIT_CACHE_DIR";

fn fnv1a(text: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Cache file for a basis key.
pub fn cache_path(dir: &Path, bandlimit: Bandlimit, region: &Region) -> PathBuf {
    dir.join(format!("slpb1-L{}-{:016x}.bin", bandlimit, fnv1a(&region.canonical())))
}

pub fn encode(basis: &SlepianBasis) -> Vec<u8> {
    let n = basis.len();
    let mut out = Vec::with_capacity(MAGIC.len() + 8 * (n + 2 * n * n));
    out.extend_from_slice(MAGIC);
    for v in basis.raw_eigenvalues() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for z in basis.vectors().iter() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8], bandlimit: Bandlimit, region: &Region, path: &Path) -> Result<SlepianBasis> {
    let n = bandlimit.size();
    let expected = MAGIC.len() + 8 * (n + 2 * n * n);
    let bad = |reason: String| Error::Format {
        path: path.to_path_buf(),
        line: 0,
        reason,
    };
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(bad("missing SLPB1 header".into()));
    }
    if bytes.len() != expected {
        return Err(bad(format!("expected {expected} bytes for L={bandlimit}, found {}", bytes.len())));
    }
    let mut words = bytes[MAGIC.len()..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
    let raw: Vec<f64> = words.by_ref().take(n).collect();
    let entries: Vec<Complex64> = (0..n * n)
        .map(|_| Complex64::new(words.next().unwrap_or(0.0), words.next().unwrap_or(0.0)))
        .collect();
    SlepianBasis::from_raw_parts(bandlimit, region.clone(), raw, DMatrix::from_vec(n, n, entries))
}

pub fn store(dir: &Path, basis: &SlepianBasis) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = cache_path(dir, basis.bandlimit(), basis.region());
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&encode(basis))?;
        f.sync_all()?;
        fs::rename(&tmp, &path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(&path, e)
    })?;
    Ok(path)
}

/// Reads a cached basis; `Ok(None)` when no file exists for the key.
pub fn load(dir: &Path, bandlimit: Bandlimit, region: &Region) -> Result<Option<SlepianBasis>> {
    let path = cache_path(dir, bandlimit, region);
    match fs::read(&path) {
        Ok(bytes) => decode(&bytes, bandlimit, region, &path).map(Some),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(Error::io(&path, e)),
    }
}

/// Loads from `dir` if present, otherwise computes and stores.
pub fn compute_cached(dir: Option<&Path>, region: &Region, bandlimit: Bandlimit) -> Result<SlepianBasis> {
    let Some(dir) = dir else {
        return SlepianBasis::compute(region, bandlimit);
    };
    if let Some(basis) = load(dir, bandlimit, region)? {
        return Ok(basis);
    }
    let basis = SlepianBasis::compute(region, bandlimit)?;
    store(dir, &basis)?;
    Ok(basis)
}
