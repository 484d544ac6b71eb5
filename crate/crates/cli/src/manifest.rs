//! Run manifests: a TOML snapshot of what a run did, complete enough that
//! `--from-manifest` reproduces the same outputs byte for byte.

use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};

use crate::config::FileConfig;

/// Everything recorded about one invocation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    /// Binary name.
    pub tool: String,
    /// Crate version that produced the run.
    pub version: String,
    /// Subcommand executed.
    pub command: String,
    /// Wall-clock creation time (RFC 3339, UTC). Informational only; not
    /// part of the reproducibility contract.
    pub created_utc: String,
    /// Seed actually used (after any `--seed` override).
    pub master_seed: u64,
    /// Fully resolved config, reloadable as a config file section.
    pub config: FileConfig,
    /// Per-cell outcome summary.
    #[serde(default)]
    pub cells: Vec<CellSummary>,
}

/// One (method, M, M_T, N) cell's outcome counts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellSummary {
    pub method: String,
    pub n_samples: usize,
    pub clip_count: usize,
    pub n_observations: usize,
    pub n_trials_ok: usize,
    pub n_failed: usize,
}

impl RunManifest {
    /// Builds a manifest for a finished run.
    pub fn new(command: &str, config: FileConfig, cells: Vec<CellSummary>) -> Self {
        Self {
            tool: "nis".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            created_utc: chrono::Utc::now().to_rfc3339(),
            master_seed: config.run.master_seed,
            config,
            cells,
        }
    }
}

/// Serializes the manifest atomically.
pub fn write_manifest(path: &Path, manifest: &RunManifest) -> anyhow::Result<()> {
    let text = toml::to_string_pretty(manifest).context("cannot serialize manifest")?;
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(dir) => tempfile::NamedTempFile::new_in(dir),
        None => tempfile::NamedTempFile::new(),
    }
    .with_context(|| format!("cannot create temp file next to {}", path.display()))?;
    std::fs::write(tmp.path(), text)
        .with_context(|| format!("cannot write manifest {}", path.display()))?;
    tmp.persist(path)
        .with_context(|| format!("cannot write manifest {}", path.display()))?;
    Ok(())
}

/// Loads a manifest written by a previous run.
pub fn load_manifest(path: &Path) -> anyhow::Result<RunManifest> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read manifest {}", path.display()))?;
    let manifest: RunManifest = toml::from_str(&text)
        .with_context(|| format!("invalid manifest {}", path.display()))?;
    Ok(manifest)
}
