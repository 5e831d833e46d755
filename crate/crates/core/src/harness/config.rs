//! TOML sweep configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::InstanceError;
use crate::learner::{LearnerConfig, LearnerError};

use super::sweep::child_seed;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed sweep config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("invalid sweep config: {0}")]
    Config(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
}

/// Either a replication count (seeds derived from `base_seed`) or explicit seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    Count(usize),
    List(Vec<u64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Instance JSON; relative paths resolve against the config file's directory.
    pub instance: PathBuf,
    pub algorithm: String,
    pub horizons: Vec<usize>,
    pub seeds: SeedSpec,
    #[serde(default)]
    pub base_seed: u64,
    pub eta: Option<f64>,
    pub delta: Option<f64>,
    pub beta: Option<f64>,
    pub output_dir: Option<PathBuf>,
    pub parallelism: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(s)?;
        cfg.check()?;
        Ok(cfg)
    }

    /// Reads a config file and resolves its relative paths.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut cfg = Self::from_toml_str(&text)?;
        let dir = path.parent().unwrap_or_else(|| Path::new("."));
        if cfg.instance.is_relative() {
            cfg.instance = dir.join(&cfg.instance);
        }
        if let Some(out) = &cfg.output_dir {
            if out.is_relative() {
                cfg.output_dir = Some(dir.join(out));
            }
        }
        Ok(cfg)
    }

    fn check(&self) -> Result<(), HarnessError> {
        if self.horizons.is_empty() || self.horizons.contains(&0) {
            return Err(HarnessError::Config(
                "horizons must be a non-empty list of positive integers".into(),
            ));
        }
        match &self.seeds {
            SeedSpec::Count(0) => {
                return Err(HarnessError::Config("at least one seed is required".into()))
            }
            SeedSpec::List(v) if v.is_empty() => {
                return Err(HarnessError::Config("at least one seed is required".into()))
            }
            _ => {}
        }
        if self.parallelism == Some(0) {
            return Err(HarnessError::Config("parallelism must be positive".into()));
        }
        Ok(())
    }

    pub fn seed_list(&self) -> Vec<u64> {
        match &self.seeds {
            SeedSpec::Count(n) => (0..*n as u64)
                .map(|i| child_seed(self.base_seed, i))
                .collect(),
            SeedSpec::List(v) => v.clone(),
        }
    }

    pub fn learner_config(&self, horizon: usize, seed: u64) -> LearnerConfig {
        LearnerConfig {
            horizon,
            eta: self.eta,
            delta: self.delta,
            beta: self.beta,
            seed,
        }
    }
}
