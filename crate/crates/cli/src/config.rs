//! JSON run configuration: a network plus simulation and oracle settings.

use std::path::Path;

use serde::{Deserialize, Serialize};

use pulsenet_core::{validate, NetworkSpec, SimConfig, ValidatedNetwork};

use crate::error::{CliError, Result};

pub const CONFIG_VERSION: &str = "pulsenet/1";

/// JSON schema of [`ConfigFile`], draft 2020-12.
pub const CONFIG_SCHEMA: &str = include_str!("../schema/config.schema.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub version: String,
    pub network: NetworkSpec,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub horizon: Option<f64>,
    pub eps_sync: f64,
    pub eps_root: f64,
    pub max_events: usize,
    pub rng_seed: u64,
}

impl Default for SimSection {
    fn default() -> Self {
        let d = SimConfig::default();
        SimSection {
            horizon: None,
            eps_sync: d.eps_sync,
            eps_root: d.eps_root,
            max_events: d.max_events,
            rng_seed: 0,
        }
    }
}

impl SimSection {
    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            eps_sync: self.eps_sync,
            eps_root: self.eps_root,
            max_events: self.max_events,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub dt: f64,
}

impl ConfigFile {
    pub fn new(network: NetworkSpec) -> Self {
        ConfigFile {
            version: CONFIG_VERSION.to_string(),
            network,
            sim: SimSection::default(),
            oracle: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ConfigFile =
            serde_json::from_str(text).map_err(|e| CliError::Invalid(format!("config: {e}")))?;
        if cfg.version != CONFIG_VERSION {
            return Err(CliError::Invalid(format!(
                "config version {:?}, expected {CONFIG_VERSION:?}",
                cfg.version
            )));
        }
        let s = &cfg.sim;
        if !(s.eps_sync >= 0.0 && s.eps_root > 0.0) {
            return Err(CliError::Invalid("sim: eps_sync must be >= 0 and eps_root > 0".into()));
        }
        if let Some(h) = s.horizon.filter(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(CliError::Invalid(format!("sim: horizon {h} must be positive")));
        }
        if let Some(o) = cfg.oracle.filter(|o| !(o.dt.is_finite() && o.dt > 0.0)) {
            return Err(CliError::Invalid(format!("oracle: dt {} must be positive", o.dt)));
        }
        Ok(cfg)
    }

    /// Canonical form: pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn validated(&self) -> Result<ValidatedNetwork> {
        validate(self.network.clone()).map_err(|e| CliError::Invalid(e.to_string()))
    }
}
