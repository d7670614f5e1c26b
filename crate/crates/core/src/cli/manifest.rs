//! Run manifests: everything needed to reproduce an output file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analytic::SecondHopOptions;
use crate::error::{Error, Result};
use crate::preselect::Topology;
use crate::scenario::ScenarioConfig;

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum ManifestCommand {
    Sweep {
        gammas_db: Vec<f64>,
        analytic: bool,
        second_hop: SecondHopOptions,
    },
    Preselect {
        topology: Topology,
        n_used: usize,
        ref_snr_db: f64,
        rates: (f64, f64),
    },
}

impl ManifestCommand {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Sweep { .. } => "sweep",
            Self::Preselect { .. } => "preselect",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub manifest_version: u32,
    pub tool_version: String,
    pub master_seed: u64,
    #[serde(flatten)]
    pub command: ManifestCommand,
    pub config: ScenarioConfig,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: ManifestCommand, config: ScenarioConfig, outputs: Vec<PathBuf>) -> Self {
        Self {
            manifest_version: MANIFEST_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            master_seed: config.run.master_seed,
            command,
            config,
            outputs,
        }
    }

    /// `<output>.manifest.json`.
    pub fn path_for(output: &Path) -> PathBuf {
        let mut s = output.as_os_str().to_owned();
        s.push(".manifest.json");
        PathBuf::from(s)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let m: Self = serde_json::from_str(&text).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if m.manifest_version != MANIFEST_VERSION {
            return Err(Error::Config {
                path: path.to_path_buf(),
                message: format!("unsupported manifest version {}", m.manifest_version),
            });
        }
        m.config.validate()?;
        Ok(m)
    }
}
