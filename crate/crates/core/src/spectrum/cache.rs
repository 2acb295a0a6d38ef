//! Append-only text cache of secular solutions.
//!
//! One record per line: `h sigma m n tol L M N lambda`, floats written with
//! 17 significant digits so that they read back bit-identically.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use crate::error::SpectrumError;
use crate::geometry::TriangleGeometry;
use crate::secular::{ModeIndex, SecularSolution};

/// Environment variable overriding the cache directory.
pub const CACHE_ENV: &str = "ROBIN_TRI_CACHE";
pub const DEFAULT_CACHE_DIR: &str = ".robin-tri-cache";
pub const CACHE_FILE: &str = "solutions.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Key {
    h: u64,
    sigma: u64,
    m: u32,
    n: u32,
    tol: u64,
}

impl Key {
    fn new(h: f64, sigma: f64, mode: ModeIndex, tol: f64) -> Self {
        Key {
            h: h.to_bits(),
            sigma: sigma.to_bits(),
            m: mode.m(),
            n: mode.n(),
            tol: tol.to_bits(),
        }
    }
}

/// Thread-safe cache: concurrent lookups, serialized appends.
#[derive(Debug)]
pub struct SolveCache {
    path: PathBuf,
    map: RwLock<HashMap<Key, [f64; 3]>>,
    file: Mutex<File>,
}

/// Directory from `ROBIN_TRI_CACHE`, else `.robin-tri-cache` in the working directory.
pub fn default_cache_dir() -> PathBuf {
    std::env::var_os(CACHE_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR))
}

fn parse_line(line: &str, lineno: usize) -> Result<(Key, [f64; 3]), SpectrumError> {
    let bad = |reason: &str| SpectrumError::CacheFormat {
        line: lineno,
        reason: reason.to_string(),
    };
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 9 {
        return Err(bad(&format!("expected 9 fields, found {}", fields.len())));
    }
    let float = |i: usize| -> Result<f64, SpectrumError> {
        fields[i]
            .parse::<f64>()
            .map_err(|e| bad(&format!("field {}: {e}", i + 1)))
    };
    let int = |i: usize| -> Result<u32, SpectrumError> {
        fields[i]
            .parse::<u32>()
            .map_err(|e| bad(&format!("field {}: {e}", i + 1)))
    };
    let mode = ModeIndex::new(int(2)?, int(3)?).map_err(|e| bad(&e.to_string()))?;
    let key = Key::new(float(0)?, float(1)?, mode, float(4)?);
    Ok((key, [float(5)?, float(6)?, float(7)?]))
}

impl SolveCache {
    /// Opens (creating if needed) the cache file inside `dir`.
    pub fn open_dir(dir: impl AsRef<Path>) -> Result<Self, SpectrumError> {
        fs::create_dir_all(dir.as_ref())?;
        Self::open(dir.as_ref().join(CACHE_FILE))
    }

    /// Opens (creating if needed) the cache file at `path`.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, SpectrumError> {
        let path = path.as_ref().to_path_buf();
        let mut map = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(File::open(&path)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, angles) = parse_line(&line, i + 1)?;
                map.insert(key, angles);
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(SolveCache {
            path,
            map: RwLock::new(map),
            file: Mutex::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cached `[L, M, N]`.
    pub fn get(&self, h: f64, sigma: f64, mode: ModeIndex, tol: f64) -> Option<[f64; 3]> {
        self.map
            .read()
            .expect("cache lock")
            .get(&Key::new(h, sigma, mode, tol))
            .copied()
    }

    /// Appends solutions; each record is written whole in a single call.
    pub fn insert_batch(
        &self,
        geom: &TriangleGeometry<f64>,
        tol: f64,
        sols: &[SecularSolution<f64>],
    ) -> Result<(), SpectrumError> {
        let mut text = String::new();
        {
            let mut map = self.map.write().expect("cache lock");
            for s in sols {
                let key = Key::new(geom.h, s.sigma, s.mode, tol);
                if map.insert(key, s.angles).is_some() {
                    continue;
                }
                let [l, m, n] = s.angles;
                writeln!(
                    text,
                    "{:.16e} {:.16e} {} {} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e}",
                    geom.h,
                    s.sigma,
                    s.mode.m(),
                    s.mode.n(),
                    tol,
                    l,
                    m,
                    n,
                    s.eigenvalue(geom)
                )
                .expect("write to String");
            }
        }
        if !text.is_empty() {
            let mut file = self.file.lock().expect("cache lock");
            file.write_all(text.as_bytes())?;
            file.flush()?;
        }
        Ok(())
    }
}
