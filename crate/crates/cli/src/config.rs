//! Run configuration: defaults, an optional flat `key = value` file, then flags.

use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("bad value `{value}` for `{key}`")]
    BadValue { key: String, value: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// Algebraic identities.
    pub identity: f64,
    /// Quadrature, ODE and finite-difference comparisons.
    pub numeric: f64,
    /// Relative gap to the model value of the bottom of the spectrum.
    pub spectral: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: 1e-12,
            numeric: 1e-8,
            spectral: 0.005,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    /// Overrides the random-trial count of every suite that has one.
    pub trials: Option<usize>,
    pub tolerances: Tolerances,
    pub radii: Vec<f64>,
    pub grids: Vec<usize>,
    pub out: PathBuf,
    pub parallel: bool,
    pub format: Format,
    /// Multiplication-table file replacing the built-in table.
    pub table: Option<PathBuf>,
    pub export_operator: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            trials: None,
            tolerances: Tolerances::default(),
            radii: vec![4.0, 6.0, 8.0, 10.0],
            grids: vec![2000, 4000, 8000],
            out: PathBuf::from("."),
            parallel: false,
            format: Format::Json,
            table: None,
            export_operator: false,
        }
    }
}

pub fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError> {
    value
        .split(',')
        .map(|s| s.trim().parse::<T>())
        .collect::<Result<Vec<T>, _>>()
        .map_err(|_| bad(key, value))
}

fn bad(key: &str, value: &str) -> ConfigError {
    ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| bad(key, value))
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "seed" => self.seed = parse(key, value)?,
            "trials" => self.trials = Some(parse(key, value)?),
            "radius" => self.radii = parse_list(key, value)?,
            "grid" => self.grids = parse_list(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "parallel" => self.parallel = parse(key, value)?,
            "format" => {
                self.format = match value {
                    "json" => Format::Json,
                    "csv" => Format::Csv,
                    _ => return Err(bad(key, value)),
                }
            }
            "table" => self.table = Some(PathBuf::from(value)),
            "export_operator" => self.export_operator = parse(key, value)?,
            "tol_identity" => self.tolerances.identity = parse(key, value)?,
            "tol_numeric" => self.tolerances.numeric = parse(key, value)?,
            "tol_spectral" => self.tolerances.spectral = parse(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let t = &self.tolerances;
        if !(t.identity > 0.0 && t.numeric > 0.0 && t.spectral > 0.0) {
            return Err(ConfigError::Invalid("tolerances must be positive".into()));
        }
        if self.trials == Some(0) {
            return Err(ConfigError::Invalid("trials must be at least 1".into()));
        }
        if self.radii.is_empty() || self.radii.iter().any(|r| r.is_nan() || *r < 1.0) {
            return Err(ConfigError::Invalid("radii must be ≥ 1".into()));
        }
        if self.grids.is_empty() || self.grids.iter().any(|n| *n < 100) {
            return Err(ConfigError::Invalid("grids must be ≥ 100".into()));
        }
        Ok(())
    }

    pub fn trials_or(&self, default: usize) -> usize {
        self.trials.unwrap_or(default)
    }
}
