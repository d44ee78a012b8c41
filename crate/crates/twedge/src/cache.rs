//! Versioned binary cache of solved Painlevé states.
//!
//! Layout, little-endian throughout: magic `TWPS`, format version (u32), λ
//! (f64), SHA-256 of the solver settings (32 bytes), grid length (u64), flags
//! (u8: bit 0 first variation present, bit 1 patched), patch point (f64),
//! diagnostics, then the grid and each column as f64 arrays, then the first
//! variation columns and their diagnostics when present.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};
use twedge_core::distributions::LambdaFamily;
use twedge_core::painleve::{solve_q0, solve_q1, Diagnostics, FirstVariation, PainleveState, SolverConfig};

use crate::config::CODE_VERSION;
use crate::error::CliError;

pub const CACHE_FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"TWPS";

/// Hash keying cached states: format version, code version and solver settings.
pub fn solver_hash(config: &SolverConfig) -> [u8; 32] {
    let json = serde_json::to_string(config).expect("solver settings serialize");
    Sha256::digest(format!("cache {CACHE_FORMAT_VERSION} twedge {CODE_VERSION}\n{json}").as_bytes()).into()
}

#[derive(Debug, Clone, PartialEq)]
pub enum CacheMiss {
    Absent,
    Version(u32),
    Stale,
    Corrupt(String),
}

impl std::fmt::Display for CacheMiss {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CacheMiss::Absent => write!(f, "no cached state"),
            CacheMiss::Version(v) => write!(f, "cache format version {v} does not match {CACHE_FORMAT_VERSION}"),
            CacheMiss::Stale => write!(f, "cached state was solved with different settings or code version"),
            CacheMiss::Corrupt(why) => write!(f, "cache file unreadable ({why})"),
        }
    }
}

struct Writer(Vec<u8>);

impl Writer {
    fn f64(&mut self, x: f64) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn u64(&mut self, x: u64) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn array(&mut self, xs: &[f64]) {
        xs.iter().for_each(|&x| self.f64(x));
    }
    fn diagnostics(&mut self, d: &Diagnostics) {
        self.u64(d.rk_steps as u64);
        self.u64(d.rk_rejected as u64);
        self.u64(d.relaxation_iterations as u64);
        self.f64(d.last_correction);
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], CacheMiss> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| CacheMiss::Corrupt("truncated".into()))?;
        let out = &self.bytes[self.at..end];
        self.at = end;
        Ok(out)
    }
    fn u64(&mut self) -> Result<u64, CacheMiss> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64, CacheMiss> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn array(&mut self, n: usize) -> Result<Vec<f64>, CacheMiss> {
        (0..n).map(|_| self.f64()).collect()
    }
    fn diagnostics(&mut self) -> Result<Diagnostics, CacheMiss> {
        Ok(Diagnostics {
            rk_steps: self.u64()? as usize,
            rk_rejected: self.u64()? as usize,
            relaxation_iterations: self.u64()? as usize,
            last_correction: self.f64()?,
        })
    }
}

pub fn encode_state(state: &PainleveState, hash: &[u8; 32]) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.0.extend_from_slice(&CACHE_FORMAT_VERSION.to_le_bytes());
    w.f64(state.lambda);
    w.0.extend_from_slice(hash);
    w.u64(state.grid.len() as u64);
    let flags = u8::from(state.first_variation.is_some()) | (u8::from(state.patched_below.is_some()) << 1);
    w.0.push(flags);
    w.f64(state.patched_below.unwrap_or(0.0));
    w.diagnostics(&state.diagnostics);
    for column in [&state.grid, &state.q0, &state.q0_prime, &state.i0, &state.i0_prime, &state.j0] {
        w.array(column);
    }
    if let Some(fv) = &state.first_variation {
        for column in [&fv.q1, &fv.q1_prime, &fv.i1, &fv.i1_prime, &fv.j1, &fv.mu1] {
            w.array(column);
        }
        w.diagnostics(&fv.diagnostics);
    }
    w.0
}

pub fn decode_state(bytes: &[u8], hash: &[u8; 32]) -> Result<PainleveState, CacheMiss> {
    let mut r = Reader { bytes, at: 0 };
    if r.take(4)? != MAGIC {
        return Err(CacheMiss::Corrupt("bad magic".into()));
    }
    let version = u32::from_le_bytes(r.take(4)?.try_into().unwrap());
    if version != CACHE_FORMAT_VERSION {
        return Err(CacheMiss::Version(version));
    }
    let lambda = r.f64()?;
    if r.take(32)? != hash {
        return Err(CacheMiss::Stale);
    }
    let n = r.u64()? as usize;
    if n > bytes.len() / 8 {
        return Err(CacheMiss::Corrupt("implausible grid length".into()));
    }
    let flags = r.take(1)?[0];
    let patch = r.f64()?;
    let diagnostics = r.diagnostics()?;
    let mut columns = (0..6).map(|_| r.array(n)).collect::<Result<Vec<_>, _>>()?.into_iter();
    let mut next = || columns.next().unwrap();
    let (grid, q0, q0_prime, i0, i0_prime, j0) = (next(), next(), next(), next(), next(), next());
    let first_variation = if flags & 1 == 1 {
        let mut fv = (0..6).map(|_| r.array(n)).collect::<Result<Vec<_>, _>>()?.into_iter();
        let mut next = || fv.next().unwrap();
        let (q1, q1_prime, i1, i1_prime, j1, mu1) = (next(), next(), next(), next(), next(), next());
        Some(FirstVariation { q1, q1_prime, i1, i1_prime, j1, mu1, diagnostics: r.diagnostics()? })
    } else {
        None
    };
    if r.at != bytes.len() {
        return Err(CacheMiss::Corrupt("trailing bytes".into()));
    }
    Ok(PainleveState {
        lambda,
        grid,
        q0,
        q0_prime,
        i0,
        i0_prime,
        j0,
        first_variation,
        patched_below: (flags & 2 == 2).then_some(patch),
        diagnostics,
    })
}

pub fn state_path(dir: &Path, hash: &[u8; 32], lambda: f64) -> PathBuf {
    let prefix: String = hash[..8].iter().map(|b| format!("{b:02x}")).collect();
    dir.join(format!("state-{prefix}-{:016x}.bin", lambda.to_bits()))
}

pub fn load_state(path: &Path, hash: &[u8; 32]) -> Result<PainleveState, CacheMiss> {
    match fs::read(path) {
        Ok(bytes) => decode_state(&bytes, hash),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(CacheMiss::Absent),
        Err(e) => Err(CacheMiss::Corrupt(e.to_string())),
    }
}

/// Loads or solves (in parallel) every λ, writing fresh solves back. Notices
/// about unusable cache files are returned for the caller to report.
pub fn solve_family(
    config: &SolverConfig,
    lambdas: &[f64],
    cache_dir: &Path,
) -> Result<(LambdaFamily, Vec<String>), CliError> {
    fs::create_dir_all(cache_dir).map_err(CliError::io(format!("creating {}", cache_dir.display())))?;
    let hash = solver_hash(config);
    let mut lambdas = lambdas.to_vec();
    lambdas.sort_by(f64::total_cmp);
    lambdas.dedup();
    let results: Vec<Result<(PainleveState, Option<String>), CliError>> = lambdas
        .par_iter()
        .map(|&lambda| {
            let path = state_path(cache_dir, &hash, lambda);
            let miss = match load_state(&path, &hash) {
                Ok(state) if state.lambda == lambda && (lambda != 1.0 || state.first_variation.is_some()) => {
                    return Ok((state, None));
                }
                Ok(_) => CacheMiss::Corrupt("state does not match its key".into()),
                Err(miss) => miss,
            };
            let notice = (miss != CacheMiss::Absent)
                .then(|| format!("notice: {}: {miss}; recomputing", path.display()));
            let mut state = solve_q0(lambda, config)?;
            if lambda == 1.0 {
                state = solve_q1(config, &state)?;
            }
            fs::write(&path, encode_state(&state, &hash)).map_err(CliError::io(format!("writing {}", path.display())))?;
            Ok((state, notice))
        })
        .collect();
    let mut states = Vec::with_capacity(results.len());
    let mut notices = Vec::new();
    for r in results {
        let (state, notice) = r?;
        states.push(state);
        notices.extend(notice);
    }
    Ok((LambdaFamily::from_states(*config, states)?, notices))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> SolverConfig {
        SolverConfig { grid_points: 401, relaxation_mesh_size: 801, ..SolverConfig::default() }
    }

    #[test]
    fn round_trip_is_lossless() {
        let config = small_config();
        let base = solve_q1(&config, &solve_q0(1.0, &config).unwrap()).unwrap();
        let hash = solver_hash(&config);
        assert_eq!(decode_state(&encode_state(&base, &hash), &hash).unwrap(), base);
        let other = solve_q0(0.5, &config).unwrap();
        assert_eq!(decode_state(&encode_state(&other, &hash), &hash).unwrap(), other);
    }

    #[test]
    fn mismatches_are_classified() {
        let config = small_config();
        let state = solve_q0(0.25, &config).unwrap();
        let hash = solver_hash(&config);
        let bytes = encode_state(&state, &hash);
        let tighter = SolverConfig { rk_rtol: 1e-11, ..config };
        assert_eq!(decode_state(&bytes, &solver_hash(&tighter)), Err(CacheMiss::Stale));
        let mut old = bytes.clone();
        old[4] = 0;
        assert_eq!(decode_state(&old, &hash), Err(CacheMiss::Version(0)));
        assert!(matches!(decode_state(&bytes[..bytes.len() - 3], &hash), Err(CacheMiss::Corrupt(_))));
        assert!(matches!(decode_state(b"nonsense", &hash), Err(CacheMiss::Corrupt(_))));
    }

    #[test]
    fn family_is_reused_and_repaired() {
        let dir = tempfile::tempdir().unwrap();
        let config = small_config();
        let (first, notices) = solve_family(&config, &[0.5, 1.0], dir.path()).unwrap();
        assert!(notices.is_empty());
        let (again, notices) = solve_family(&config, &[1.0, 0.5], dir.path()).unwrap();
        assert!(notices.is_empty());
        assert_eq!(first, again);
        let path = state_path(dir.path(), &solver_hash(&config), 0.5);
        fs::write(&path, b"garbage").unwrap();
        let (repaired, notices) = solve_family(&config, &[0.5, 1.0], dir.path()).unwrap();
        assert_eq!(notices.len(), 1);
        assert_eq!(repaired, first);
    }
}
