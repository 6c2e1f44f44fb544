//! TOML configuration files for `springsim run` and `springsim grid --specs`.
//!
//! Both carry `schema_version = 1`. A run config is flat: experiment fields,
//! optional simulator overrides, and optionally `k_motor` and `out`:
//!
//! ```toml
//! schema_version = 1
//! label = "baseline"
//! mass = 4.1
//! t_period = 1.88
//! amplitude = 0.05
//! h0 = 0.2
//! kp = 300.0        # optional override
//! out = "results"   # optional
//! ```
//!
//! A specs file lists experiments as `[[experiment]]` tables with the same
//! keys.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use super::experiment::ExperimentSpec;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{}: {}", .path.display(), .source)]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {}", .path.display(), .source)]
    Parse {
        path: PathBuf,
        source: Box<toml::de::Error>,
    },
    #[error("{}: unsupported schema_version {}; expected {}", .path.display(), .found, SCHEMA_VERSION)]
    Schema { path: PathBuf, found: u32 },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(flatten)]
    pub experiment: ExperimentSpec,
    pub k_motor: Option<f64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SpecsFile {
    pub schema_version: u32,
    pub k_motor: Option<f64>,
    #[serde(default)]
    pub experiment: Vec<ExperimentSpec>,
}

fn parse<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError::Parse {
        path: path.to_path_buf(),
        source: Box::new(e),
    })
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn check_version(path: &Path, found: u32) -> Result<(), ConfigError> {
    if found == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(ConfigError::Schema {
            path: path.to_path_buf(),
            found,
        })
    }
}

impl RunConfig {
    pub fn parse(path: &Path, text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = parse(path, text)?;
        check_version(path, cfg.schema_version)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::parse(path, &read(path)?)
    }
}

impl SpecsFile {
    pub fn parse(path: &Path, text: &str) -> Result<Self, ConfigError> {
        let specs: Self = parse(path, text)?;
        check_version(path, specs.schema_version)?;
        Ok(specs)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::parse(path, &read(path)?)
    }
}
