//! Run manifests: the resolved config plus the seed actually used.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::CliError;

pub const FILE_NAME: &str = "manifest.json";

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(flatten)]
    pub config: ExperimentConfig,
    pub seed_used: Option<u64>,
    pub version: Option<String>,
    pub wall_seconds: Option<f64>,
}

impl Manifest {
    pub fn new(config: ExperimentConfig, seed: u64, wall_seconds: f64) -> Self {
        Manifest {
            config,
            seed_used: Some(seed),
            version: Some(env!("CARGO_PKG_VERSION").to_string()),
            wall_seconds: Some(wall_seconds),
        }
    }

    pub fn to_json(&self) -> String {
        format!(
            "{}\n",
            serde_json::to_string_pretty(self).expect("config is plain data")
        )
    }
}

/// Config to replay: `seed_used` wins over `seed` so an unseeded run repeats exactly.
pub fn load(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let m: Manifest = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut cfg = m.config;
    if m.seed_used.is_some() {
        cfg.seed = m.seed_used;
    }
    Ok(cfg)
}
