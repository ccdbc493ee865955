//! On-disk cache of the constructed arrangement data.
//!
//! Layout: `<cache>/<sha256 of the recipe>/` holding one POLY4 v1 file per
//! polynomial and a `manifest.json` with the sha256 of every file. A missing
//! or mismatching file makes the whole directory stale and it is rebuilt.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::exactring::PIPELINE_CONSTANTS;
use crate::g31::{
    column_degree, ArrangementData, BuildError, InvariantSet, PrimedColumns, StepTimings,
    SyzygyBasis,
};
use crate::poly::{PolyError, PolyMatrix, Polynomial};

pub const MANIFEST: &str = "manifest.json";

/// Everything that determines the cached objects.
pub fn recipe() -> String {
    format!(
        "arrmono arrangement cache 1; group G31; degree 60; constants {:?}; \
         basis B = adj(H(f1)) J C, g = b11/x, D = B/g, E[j] = D[j] - g_j/60 D[1]; \
         primed rows E[r][j]/x_r; POLY4 v1",
        PIPELINE_CONSTANTS
    )
}

pub fn recipe_hash() -> String {
    sha256_hex(recipe().as_bytes())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cache entry {file} is corrupt: {reason}")]
    Corrupt { file: String, reason: String },
    #[error(transparent)]
    Build(#[from] BuildError),
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CacheError + '_ {
    move |source| CacheError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CacheStatus {
    /// Loaded from disk; every hash matched.
    Hit,
    /// No cache existed.
    Built,
    /// A cache existed but was unusable.
    Rebuilt(String),
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    recipe: String,
    recipe_sha256: String,
    files: BTreeMap<String, String>,
}

/// Named polynomials in a fixed order.
fn entries(data: &ArrangementData) -> Vec<(String, &Polynomial)> {
    let inv = &data.invariants;
    let mut out: Vec<(String, &Polynomial)> = vec![("f".into(), &data.f)];
    for (n, p) in [("a", &inv.a), ("b", &inv.b), ("c", &inv.c), ("d", &inv.d), ("e", &inv.e)] {
        out.push((format!("inv_{n}"), p));
    }
    for (i, q) in inv.quartics.iter().enumerate() {
        out.push((format!("inv_A{}", i + 1), q));
    }
    for (i, q) in inv.s.iter().enumerate() {
        out.push((format!("inv_s{i}"), q));
    }
    for (n, p) in [("F8", &inv.f8), ("F12", &inv.f12), ("F20", &inv.f20), ("f4", &inv.f4)] {
        out.push((format!("inv_{n}"), p));
    }
    for i in 0..4 {
        for j in 0..4 {
            out.push((format!("E_{}{}", i + 1, j + 1), data.basis.e.get(i, j)));
        }
    }
    for (j, g) in data.basis.g.iter().enumerate() {
        out.push((format!("g_{}", j + 2), g));
    }
    for (l, i, p) in data.primed.all() {
        out.push((format!("{}prime_{}", l.name(), i + 1), p));
    }
    out
}

fn file_name(name: &str) -> String {
    format!("{name}.poly4")
}

pub fn cache_subdir(root: &Path) -> PathBuf {
    root.join(recipe_hash())
}

/// Writes every polynomial and the manifest.
pub fn store(dir: &Path, data: &ArrangementData) -> Result<(), CacheError> {
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut files = BTreeMap::new();
    for (name, p) in entries(data) {
        let text = p.to_poly4();
        let path = dir.join(file_name(&name));
        fs::write(&path, &text).map_err(io(&path))?;
        files.insert(file_name(&name), sha256_hex(text.as_bytes()));
    }
    let manifest = Manifest {
        recipe: recipe(),
        recipe_sha256: recipe_hash(),
        files,
    };
    let path = dir.join(MANIFEST);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json).map_err(io(&path))
}

/// Reads a cache directory, checking every hash against the manifest.
pub fn load(dir: &Path) -> Result<ArrangementData, CacheError> {
    let corrupt = |file: &str, reason: String| CacheError::Corrupt {
        file: file.to_string(),
        reason,
    };
    let mpath = dir.join(MANIFEST);
    let text = fs::read_to_string(&mpath).map_err(io(&mpath))?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| corrupt(MANIFEST, e.to_string()))?;
    if manifest.recipe_sha256 != recipe_hash() {
        return Err(corrupt(MANIFEST, "recipe hash differs".into()));
    }
    let read = |name: &str| -> Result<Polynomial, CacheError> {
        let file = file_name(name);
        let path = dir.join(&file);
        let text = fs::read_to_string(&path).map_err(io(&path))?;
        let want = manifest
            .files
            .get(&file)
            .ok_or_else(|| corrupt(&file, "not listed in manifest".into()))?;
        if &sha256_hex(text.as_bytes()) != want {
            return Err(corrupt(&file, "sha256 mismatch".into()));
        }
        Polynomial::from_poly4(&text).map_err(|e: PolyError| corrupt(&file, e.to_string()))
    };
    let arr = |prefix: &str, range: std::ops::Range<usize>| -> Result<Vec<Polynomial>, CacheError> {
        range.map(|i| read(&format!("{prefix}{i}"))).collect()
    };
    let quartics: [Polynomial; 6] = arr("inv_A", 1..7)?.try_into().expect("six");
    let s: [Polynomial; 7] = arr("inv_s", 0..7)?.try_into().expect("seven");
    let (f8, f12, f20) = (read("inv_F8")?, read("inv_F12")?, read("inv_F20")?);
    let invariants = InvariantSet {
        a: read("inv_a")?,
        b: read("inv_b")?,
        c: read("inv_c")?,
        d: read("inv_d")?,
        e: read("inv_e")?,
        quartics,
        s,
        f1: f8.clone(),
        f2: f12.clone(),
        f3: f20.clone(),
        f8,
        f12,
        f20,
        f4: read("inv_f4")?,
    };
    let mut e = PolyMatrix::zeros(4, 4);
    for i in 0..4 {
        for j in 0..4 {
            e.set(i, j, read(&format!("E_{}{}", i + 1, j + 1))?);
        }
    }
    let mut column_degrees = [0u32; 4];
    for (j, d) in column_degrees.iter_mut().enumerate() {
        *d = column_degree(&e.column(j))
            .ok_or_else(|| corrupt(&format!("E column {}", j + 1), "not homogeneous".into()))?;
    }
    let g: [Polynomial; 3] = arr("g_", 2..5)?.try_into().expect("three");
    let letter = |l: &str| -> Result<[Polynomial; 3], CacheError> {
        Ok(arr(&format!("{l}prime_"), 1..4)?.try_into().expect("three"))
    };
    Ok(ArrangementData {
        f: read("f")?,
        invariants,
        basis: SyzygyBasis {
            e,
            g,
            column_degrees,
        },
        primed: PrimedColumns {
            m: letter("m")?,
            n: letter("n")?,
            p: letter("p")?,
            q: letter("q")?,
        },
    })
}

/// Loads `<root>/<recipe hash>`, building (and storing) on a miss or on any
/// integrity failure.
pub fn load_or_build(root: &Path) -> Result<(ArrangementData, CacheStatus, StepTimings), CacheError> {
    let dir = cache_subdir(root);
    let status = if dir.join(MANIFEST).exists() {
        match load(&dir) {
            Ok(data) => return Ok((data, CacheStatus::Hit, StepTimings::new())),
            Err(e) => CacheStatus::Rebuilt(e.to_string()),
        }
    } else {
        CacheStatus::Built
    };
    let (data, timings) = ArrangementData::build()?;
    store(&dir, &data)?;
    Ok((data, status, timings))
}
