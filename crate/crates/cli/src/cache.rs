//! Profile cache keyed by (schema_version, n, epsilon, tol). Entries are
//! the JSON profile files written by the core crate; a corrupted or
//! stale entry fails its checksum or schema check on load and is
//! recomputed, never trusted.

use qcdel_core::delaunay::{solve_delaunay, DelaunayProfile, SCHEMA_VERSION};
use qcdel_core::{make_params, Result};
use std::path::{Path, PathBuf};

pub const CACHE_ENV: &str = "QCDEL_CACHE_DIR";

/// Cache directory: $QCDEL_CACHE_DIR, else a qcdel folder under the
/// platform data directory ($XDG_DATA_HOME or ~/.local/share), else the
/// working directory.
pub fn cache_dir() -> PathBuf {
    if let Ok(dir) = std::env::var(CACHE_ENV) {
        return PathBuf::from(dir);
    }
    let base = std::env::var("XDG_DATA_HOME")
        .map(PathBuf::from)
        .or_else(|_| std::env::var("HOME").map(|h| Path::new(&h).join(".local/share")))
        .unwrap_or_else(|_| PathBuf::from("."));
    base.join("qcdel")
}

/// File name from the exact key; the f64 fields enter by bit pattern so
/// distinct tolerances or necksizes never collide.
pub fn profile_path(dir: &Path, n: i64, epsilon: f64, tol: f64) -> PathBuf {
    dir.join(format!(
        "profile_v{}_n{}_e{:016x}_t{:016x}.json",
        SCHEMA_VERSION,
        n,
        epsilon.to_bits(),
        tol.to_bits()
    ))
}

/// Fetch a profile through the cache. Load failures of an existing entry
/// (truncation, checksum, schema drift) fall through to recomputation and
/// the entry is rewritten atomically.
pub fn get_profile(dir: &Path, n: i64, epsilon: f64, tol: f64) -> Result<DelaunayProfile> {
    let path = profile_path(dir, n, epsilon, tol);
    if path.exists() {
        match DelaunayProfile::load(&path) {
            Ok(p) => {
                eprintln!("cache hit: {}", path.display());
                return Ok(p);
            }
            Err(e) => eprintln!("cache entry rejected ({e}), recomputing: {}", path.display()),
        }
    } else {
        eprintln!("cache miss: {}", path.display());
    }
    let params = make_params(n)?;
    let profile = solve_delaunay(&params, epsilon, tol)?;
    std::fs::create_dir_all(dir)?;
    profile.save(&path)?;
    Ok(profile)
}
