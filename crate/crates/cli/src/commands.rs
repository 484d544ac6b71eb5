//! Subcommand implementations.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::Context;

use nis_core::{
    derive_stream, sample_observations, sweep_clipping, sweep_sample_size, StreamRole,
};

use crate::config::FileConfig;
use crate::csvout;
use crate::manifest::{write_manifest, CellSummary, RunManifest};

/// `<file>.manifest.toml` next to a single-file output.
fn manifest_path_for(out: &Path) -> PathBuf {
    let mut name = OsString::from(out.as_os_str());
    name.push(".manifest.toml");
    PathBuf::from(name)
}

/// Draws one synthetic observation set (the realization-0 stream) and
/// writes it as a one-column CSV plus a manifest.
pub fn cmd_generate_obs(file_config: &FileConfig, out: &Path) -> anyhow::Result<()> {
    let config = file_config.to_experiment_config()?;
    let mut rng = derive_stream(config.master_seed, 0, 0, StreamRole::Observations);
    let obs = sample_observations(&config.model, config.n_observations, &mut rng)?;
    csvout::write_observations(out, &obs)?;
    let manifest = RunManifest::new("generate-obs", file_config.clone(), Vec::new());
    write_manifest(&manifest_path_for(out), &manifest)?;
    eprintln!("wrote {} observations to {}", obs.len(), out.display());
    Ok(())
}

/// Runs the IS/NIS grid for every configured sample size and writes
/// `aggregate.csv`, `trials.csv` and `manifest.toml` into `out_dir`.
pub fn cmd_sweep_samples(file_config: &FileConfig, out_dir: &Path) -> anyhow::Result<()> {
    let config = file_config.to_experiment_config()?;
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create output directory {}", out_dir.display()))?;
    let cells = sweep_sample_size(&config, &file_config.sweep.sample_sizes)?;

    csvout::write_sample_sweep_aggregate(&out_dir.join("aggregate.csv"), &cells)?;
    csvout::write_sample_sweep_trials(&out_dir.join("trials.csv"), &cells)?;

    let mut summaries = Vec::with_capacity(cells.len() * 2);
    for cell in &cells {
        for stats in [&cell.grid.is_stats, &cell.grid.nis_stats] {
            summaries.push(CellSummary {
                method: stats.method.as_str().to_string(),
                n_samples: stats.n_samples,
                clip_count: stats.clip_count,
                n_observations: stats.n_observations,
                n_trials_ok: cell.grid.records.len(),
                n_failed: cell.grid.n_failed,
            });
        }
    }
    let manifest = RunManifest::new("sweep-samples", file_config.clone(), summaries);
    write_manifest(&out_dir.join("manifest.toml"), &manifest)?;
    eprintln!(
        "swept {} sample sizes into {}",
        cells.len(),
        out_dir.display()
    );
    Ok(())
}

/// Runs the NIS clipping sweep over the configured (M_T, N) grid and writes
/// the same file set into `out_dir`.
pub fn cmd_sweep_clipping(file_config: &FileConfig, out_dir: &Path) -> anyhow::Result<()> {
    let config = file_config.to_experiment_config()?;
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create output directory {}", out_dir.display()))?;
    let cells = sweep_clipping(
        &config,
        &file_config.sweep.clip_counts,
        &file_config.sweep.obs_counts,
    )?;

    csvout::write_clip_sweep_aggregate(&out_dir.join("aggregate.csv"), &cells)?;
    csvout::write_clip_sweep_trials(&out_dir.join("trials.csv"), &cells, config.n_samples)?;

    let summaries = cells
        .iter()
        .map(|cell| CellSummary {
            method: cell.stats.method.as_str().to_string(),
            n_samples: cell.stats.n_samples,
            clip_count: cell.clip_count,
            n_observations: cell.n_observations,
            n_trials_ok: cell.records.len(),
            n_failed: cell.n_failed,
        })
        .collect();
    let manifest = RunManifest::new("sweep-clipping", file_config.clone(), summaries);
    write_manifest(&out_dir.join("manifest.toml"), &manifest)?;
    eprintln!(
        "swept {} clipping cells into {}",
        cells.len(),
        out_dir.display()
    );
    Ok(())
}
