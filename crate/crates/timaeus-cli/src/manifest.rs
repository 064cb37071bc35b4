//! Run manifests: enough provenance to reproduce any output file exactly.

use std::path::{Path, PathBuf};

use serde::Serialize;
use timaeus::SimConfig;

/// Written next to every simulation output. The embedded config is the
/// fully resolved one (seed overrides applied), so feeding it back with the
/// recorded seed reproduces the run byte for byte.
#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: String,
    pub seed: u64,
    pub version: String,
    pub started_at: String,
    pub finished_at: String,
    /// Every file the run wrote, this manifest included.
    pub outputs: Vec<String>,
    pub config: SimConfig,
}

/// `run.csv` gets its manifest at `run.manifest.toml`.
pub fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.toml")
}

pub fn now_rfc3339() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("manifest serializes")
    }
}
