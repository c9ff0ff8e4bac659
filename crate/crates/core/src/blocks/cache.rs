//! Building-block coefficients, memoized in memory and optionally on disk.
//!
//! The disk format is a plain text table, one nonzero coefficient per line
//! (`matrix order row col re im`, labels are mode numbers), preceded by `#`
//! header lines recording the truncation, the quadrature tolerance and the
//! conventions the coefficients were produced under.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::{building_block, CavityGeometry, ModeSpec};
use crate::bogoliubov::{Bogoliubov, BosonBogoliubov, FermionBogoliubov, Species};
use crate::error::{Error, Result};
use crate::oracles::overlap::QUADRATURE_TOL;
use crate::series::SeriesMatrix;

/// Environment variable naming the on-disk cache directory.
pub const CACHE_DIR_ENV: &str = "CAVITY_ENT_CACHE_DIR";

const FORMAT: &str = "cavity-ent block coefficients v1";
const CONVENTIONS: &str =
    "junction inertial->accelerated at rest slice; free evolution exp(-i w t); boson n=1..n_max; fermion kappa=-n_max..n_max bag s=0";

type Key = (Species, usize);

#[derive(Debug, Default)]
pub struct BlockCache {
    blocks: Mutex<HashMap<Key, Arc<Bogoliubov>>>,
    dir: Option<PathBuf>,
}

impl BlockCache {
    /// In-memory only.
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_dir(dir: impl Into<PathBuf>) -> Self {
        Self { blocks: Mutex::default(), dir: Some(dir.into()) }
    }

    /// Uses `$CAVITY_ENT_CACHE_DIR` when set.
    pub fn from_env() -> Self {
        match std::env::var_os(CACHE_DIR_ENV) {
            Some(d) if !d.is_empty() => Self::with_dir(d),
            _ => Self::new(),
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn file_for(&self, species: Species, n_max: usize) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("block-{}-{n_max}.txt", species.name())))
    }

    pub fn get(&self, spec: &ModeSpec, geom: &CavityGeometry, n_max: usize) -> Result<Arc<Bogoliubov>> {
        let key = (spec.species, n_max);
        if let Some(b) = self.blocks.lock().unwrap().get(&key) {
            return Ok(b.clone());
        }
        let block = match self.file_for(spec.species, n_max) {
            Some(path) if path.exists() => read_block(&path)?,
            Some(path) => {
                let b = building_block(spec, geom, n_max)?;
                fs::create_dir_all(path.parent().unwrap())?;
                write_block(&path, &b)?;
                b
            }
            None => building_block(spec, geom, n_max)?,
        };
        let block = Arc::new(block);
        self.blocks.lock().unwrap().insert(key, block.clone());
        Ok(block)
    }

    /// Recomputes a block from the oracle, replacing any cached copy.
    pub fn regenerate(&self, spec: &ModeSpec, geom: &CavityGeometry, n_max: usize) -> Result<Arc<Bogoliubov>> {
        let b = building_block(spec, geom, n_max)?;
        if let Some(path) = self.file_for(spec.species, n_max) {
            fs::create_dir_all(path.parent().unwrap())?;
            write_block(&path, &b)?;
        }
        let b = Arc::new(b);
        self.blocks.lock().unwrap().insert((spec.species, n_max), b.clone());
        Ok(b)
    }
}

fn matrices(b: &Bogoliubov) -> (Vec<(&'static str, &SeriesMatrix)>, i64) {
    match b {
        Bogoliubov::Boson(b) => (vec![("alpha", b.alpha()), ("beta", b.beta())], 1),
        Bogoliubov::Fermion(f) => (vec![("A", f.a())], -(f.n_max() as i64)),
    }
}

pub fn write_block(path: &Path, b: &Bogoliubov) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "# {FORMAT}");
    let _ = writeln!(out, "# species = {}", b.species().name());
    let _ = writeln!(out, "# n_max = {}", b.n_max());
    let _ = writeln!(out, "# quadrature_tol = {QUADRATURE_TOL:e}");
    let _ = writeln!(out, "# conventions = {CONVENTIONS}");
    let _ = writeln!(out, "# columns = matrix order row col re im");
    let (mats, offset) = matrices(b);
    for (name, m) in mats {
        for k in 0..3 {
            let o = m.order(k);
            for j in 0..o.ncols() {
                for i in 0..o.nrows() {
                    let z = o[(i, j)];
                    if z != C64::new(0.0, 0.0) {
                        let (r, c) = (i as i64 + offset, j as i64 + offset);
                        let _ = writeln!(out, "{name} {k} {r} {c} {:e} {:e}", z.re, z.im);
                    }
                }
            }
        }
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_block(path: &Path) -> Result<Bogoliubov> {
    let text = fs::read_to_string(path)?;
    let bad = |msg: String| Error::Cache(format!("{}: {msg}", path.display()));
    let mut header = HashMap::new();
    let mut rows = Vec::new();
    for line in text.lines() {
        if let Some(h) = line.strip_prefix('#') {
            if let Some((k, v)) = h.split_once('=') {
                header.insert(k.trim().to_string(), v.trim().to_string());
            }
        } else if !line.trim().is_empty() {
            rows.push(line);
        }
    }
    if !text.starts_with(&format!("# {FORMAT}")) {
        return Err(bad("unrecognised format".into()));
    }
    if header.get("conventions").map(String::as_str) != Some(CONVENTIONS) {
        return Err(bad("written under different conventions".into()));
    }
    let species: Species = header.get("species").ok_or_else(|| bad("missing species".into()))?.parse()?;
    let n_max: usize = header
        .get("n_max")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| bad("missing n_max".into()))?;
    let (dim, offset) = match species {
        Species::Boson => (n_max, 1),
        Species::Fermion => (2 * n_max + 1, -(n_max as i64)),
    };
    let names: &[&str] = match species {
        Species::Boson => &["alpha", "beta"],
        Species::Fermion => &["A"],
    };
    let mut mats: Vec<[DMatrix<C64>; 3]> = names.iter().map(|_| [(); 3].map(|_| DMatrix::zeros(dim, dim))).collect();
    for line in rows {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 6 {
            return Err(bad(format!("malformed line '{line}'")));
        }
        let which = names.iter().position(|n| *n == f[0]).ok_or_else(|| bad(format!("unknown matrix '{}'", f[0])))?;
        let parse_i = |s: &str| s.parse::<i64>().map_err(|_| bad(format!("bad index in '{line}'")));
        let parse_f = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("bad number in '{line}'")));
        let k = parse_i(f[1])? as usize;
        let (r, c) = (parse_i(f[2])? - offset, parse_i(f[3])? - offset);
        if k > 2 || r < 0 || c < 0 || r as usize >= dim || c as usize >= dim {
            return Err(bad(format!("entry out of range in '{line}'")));
        }
        mats[which][k][(r as usize, c as usize)] = C64::new(parse_f(f[4])?, parse_f(f[5])?);
    }
    let mut series = mats.into_iter().map(|[a, b, c]| SeriesMatrix::from_orders(a, b, c));
    Ok(match species {
        Species::Boson => {
            let (a, b) = (series.next().unwrap(), series.next().unwrap());
            Bogoliubov::Boson(BosonBogoliubov::new(a, b)?)
        }
        Species::Fermion => Bogoliubov::Fermion(FermionBogoliubov::new(n_max, series.next().unwrap())?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_round_trip_is_exact() {
        let dir = std::env::temp_dir().join(format!("cavity-ent-cache-test-{}", std::process::id()));
        let cache = BlockCache::with_dir(&dir);
        let g = CavityGeometry::new(1.0, 0.01).unwrap();
        for spec in [ModeSpec::boson(), ModeSpec::fermion()] {
            let b = cache.get(&spec, &g, 6).unwrap();
            let back = read_block(&cache.file_for(spec.species, 6).unwrap()).unwrap();
            assert_eq!(*b, back);
        }
        let _ = fs::remove_dir_all(&dir);
    }

    #[test]
    fn foreign_files_are_rejected() {
        let path = std::env::temp_dir().join(format!("cavity-ent-bad-{}.txt", std::process::id()));
        fs::write(&path, "# something else\nalpha 0 1 1 1 0\n").unwrap();
        assert!(matches!(read_block(&path), Err(Error::Cache(_))));
        let _ = fs::remove_file(&path);
    }
}
