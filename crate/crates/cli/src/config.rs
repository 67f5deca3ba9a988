use std::path::Path;

use anyhow::{Context, Result};
use serde::Deserialize;

use crate::args::{Region, SigmaFrom};

/// Values loaded from `--config`. Every field is optional; flags win.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Config {
    pub sigma_from: Option<SigmaFrom>,
    pub sigma_scale: Option<f64>,
    pub region: Option<Region>,
    pub enlarge: Option<bool>,
    pub color: Option<String>,
    pub tau: Option<f64>,
    pub tau_gold: Option<f64>,
    pub edges: Option<Vec<f64>>,
    pub png: Option<bool>,
    pub jpeg_quality: Option<u8>,
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
    pub precise: Option<bool>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// A boolean switch is on when given on the command line or set in the config.
pub fn switch(flag: bool, config: Option<bool>) -> bool {
    flag || config.unwrap_or(false)
}
