//! Flat `key = value` configuration files and the resolved run configuration.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{QError, Result};
use crate::qbessel::SeriesTolerance;
use crate::qgrid::{BesselParams, QGrid};

pub const DEFAULT_Q: f64 = 0.5;
pub const DEFAULT_N_LOW: i64 = -20;
pub const DEFAULT_N_HIGH: i64 = 40;

/// Parsed `key = value` lines. `#` starts a comment; blank lines are skipped.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| QError::Invalid(format!("config line {}: expected key=value", i + 1)))?;
            let key = k.trim().to_ascii_lowercase().replace('-', "_");
            if key.is_empty() {
                return Err(QError::Invalid(format!("config line {}: empty key", i + 1)));
            }
            if entries.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(QError::Invalid(format!("config key {key:?} repeated")));
            }
        }
        Ok(ConfigFile { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| QError::Invalid(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Rejects keys outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.entries.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(QError::Invalid(format!("unknown config key {k:?}"))),
            None => Ok(()),
        }
    }

    pub fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|s| {
                s.parse::<T>()
                    .map_err(|_| QError::Invalid(format!("config key {key:?}: cannot parse {s:?}")))
            })
            .transpose()
    }

    /// Comma-separated list of numbers.
    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key).map(|s| parse_list(s, key)).transpose()
    }
}

pub fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|_| QError::Invalid(format!("{what}: cannot parse {t:?}"))))
        .collect()
}

pub const RUN_KEYS: [&str; 7] = ["q", "alpha", "beta", "n_low", "n_high", "rel_tol", "max_terms"];

/// Values shared by every subcommand, after merging file and flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
    pub n_low: i64,
    pub n_high: i64,
    pub tol: SeriesTolerance,
}

/// Command-line values; `None` falls back to the file, then the default.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub q: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub n_low: Option<i64>,
    pub n_high: Option<i64>,
    pub rel_tol: Option<f64>,
    pub max_terms: Option<usize>,
}

impl RunConfig {
    pub fn resolve(file: &ConfigFile, flags: &Overrides) -> Result<Self> {
        let d = SeriesTolerance::default();
        let cfg = RunConfig {
            q: flags.q.or(file.parsed("q")?).unwrap_or(DEFAULT_Q),
            alpha: flags.alpha.or(file.parsed("alpha")?).unwrap_or(0.0),
            beta: flags.beta.or(file.parsed("beta")?).unwrap_or(0.0),
            n_low: flags.n_low.or(file.parsed("n_low")?).unwrap_or(DEFAULT_N_LOW),
            n_high: flags.n_high.or(file.parsed("n_high")?).unwrap_or(DEFAULT_N_HIGH),
            tol: SeriesTolerance::new(
                flags.rel_tol.or(file.parsed("rel_tol")?).unwrap_or(d.rel_tol),
                flags.max_terms.or(file.parsed("max_terms")?).unwrap_or(d.max_terms),
            )?,
        };
        cfg.grid()?;
        cfg.params()?;
        Ok(cfg)
    }

    pub fn grid(&self) -> Result<QGrid> {
        QGrid::new(self.q, self.n_low, self.n_high)
    }

    pub fn params(&self) -> Result<BesselParams> {
        BesselParams::new(self.alpha, self.beta)
    }
}

/// A `(q, alpha, beta)` lattice. Either `alpha` and `beta` lists (Cartesian
/// product) or a `pairs` list of `alpha:beta` entries.
pub fn sweep_cells(file: &ConfigFile) -> Result<Vec<(f64, f64, f64)>> {
    file.check_keys(&["q", "alpha", "beta", "pairs", "n_low", "n_high"])?;
    let qs = file.list("q")?.ok_or_else(|| QError::Invalid("sweep config needs a q list".into()))?;
    let pairs: Vec<(f64, f64)> = match file.get("pairs") {
        Some(p) => p
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| {
                let (a, b) = t
                    .split_once(':')
                    .ok_or_else(|| QError::Invalid(format!("pairs entry {t:?}: expected alpha:beta")))?;
                let num = |s: &str| s.trim().parse::<f64>().map_err(|_| QError::Invalid(format!("pairs entry {t:?}")));
                Ok((num(a)?, num(b)?))
            })
            .collect::<Result<_>>()?,
        None => {
            let a = file.list("alpha")?.unwrap_or_else(|| vec![0.0]);
            let b = file.list("beta")?.unwrap_or_else(|| vec![0.0]);
            a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect()
        }
    };
    let mut cells = Vec::new();
    for &q in &qs {
        QGrid::new(q, 0, 0)?;
        for &(a, b) in &pairs {
            BesselParams::new(a, b)?;
            cells.push((q, a, b));
        }
    }
    if cells.is_empty() {
        return Err(QError::Invalid("sweep lattice is empty".into()));
    }
    Ok(cells)
}
