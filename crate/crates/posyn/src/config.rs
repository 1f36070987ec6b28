//! Toolchain configuration: one JSON document drives the whole flow.
//! Relative paths resolve against the config file's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assign::{AssignmentMode, CostWeights};
use crate::mapper::SaConfig;
use crate::power::PowerModel;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config JSON is malformed: {0}")]
    Schema(String),
    #[error("config path `{0}` does not resolve to a file")]
    MissingPath(PathBuf),
    #[error("config field invalid: {0}")]
    BadField(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttackConfig {
    /// Traces per attack attempt.
    pub num_traces: usize,
    /// Independent attempts, each with a fresh key and fresh traces.
    pub attempts: usize,
    /// Leakage-assessment threshold on |t|.
    pub threshold: f64,
    /// Which intermediate bit the difference-of-means attack targets.
    #[serde(default)]
    pub dpa_bit: u32,
    /// Key used for leakage assessment and the mutual-information run.
    #[serde(default)]
    pub key: u64,
    /// Designated fixed plaintext for the fixed-class population.
    #[serde(default)]
    pub fixed_plaintext: u64,
    /// Traces per population in the leakage assessment.
    #[serde(default = "default_tvla_traces")]
    pub tvla_traces: usize,
    #[serde(default = "default_mi_bins")]
    pub mi_bins: usize,
    #[serde(default = "default_mi_samples")]
    pub mi_samples: usize,
    /// Attempts and traces used per grid-search point (full-budget attacks
    /// at every grid point would be needlessly slow).
    #[serde(default = "default_grid_attempts")]
    pub grid_attempts: usize,
    #[serde(default = "default_grid_traces")]
    pub grid_traces: usize,
}

fn default_tvla_traces() -> usize {
    2000
}
fn default_mi_bins() -> usize {
    16
}
fn default_mi_samples() -> usize {
    100_000
}
fn default_grid_attempts() -> usize {
    8
}
fn default_grid_traces() -> usize {
    800
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            num_traces: 4000,
            attempts: 50,
            threshold: 4.5,
            dpa_bit: 0,
            key: 0,
            fixed_plaintext: 0,
            tvla_traces: default_tvla_traces(),
            mi_bins: default_mi_bins(),
            mi_samples: default_mi_samples(),
            grid_attempts: default_grid_attempts(),
            grid_traces: default_grid_traces(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub netlist: PathBuf,
    pub library: PathBuf,
    pub annotations: PathBuf,
    pub out_dir: PathBuf,
    #[serde(default)]
    pub weights: CostWeights,
    #[serde(default)]
    pub sa: SaConfig,
    #[serde(default)]
    pub model: PowerModel,
    #[serde(default)]
    pub attack: AttackConfig,
    #[serde(default = "default_mode")]
    pub mode: AssignmentMode,
    #[serde(default = "default_fanout_threshold")]
    pub fanout_threshold: usize,
}

fn default_mode() -> AssignmentMode {
    AssignmentMode::Replicated
}

fn default_fanout_threshold() -> usize {
    4
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| ConfigError::Schema(e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.netlist = resolve(base, &cfg.netlist);
        cfg.library = resolve(base, &cfg.library);
        cfg.annotations = resolve(base, &cfg.annotations);
        cfg.out_dir = resolve(base, &cfg.out_dir);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for path in [&self.netlist, &self.library, &self.annotations] {
            if !path.is_file() {
                return Err(ConfigError::MissingPath(path.clone()));
            }
        }
        self.weights
            .validate()
            .map_err(|e| ConfigError::BadField(e.to_string()))?;
        self.model
            .validate()
            .map_err(|e| ConfigError::BadField(e.to_string()))?;
        if self.attack.num_traces == 0 {
            return Err(ConfigError::BadField("attack.num_traces must be >= 1".into()));
        }
        if self.fanout_threshold == 0 {
            return Err(ConfigError::BadField("fanout_threshold must be >= 1".into()));
        }
        Ok(())
    }
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}
