//! CSV emission: RFC-4180 framing (CRLF records, mandatory header row),
//! floats printed with 17 significant digits so every double round-trips,
//! and atomic writes (temp file in the target directory, then rename).

use std::path::Path;

use anyhow::Context;

use nis_core::{AggregateStats, ClipCell, ObservationSet, SweepCell};

/// 17-significant-digit scientific notation: enough to reconstruct the
/// exact double on read-back.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_rows(path: &Path, header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(dir) => tempfile::NamedTempFile::new_in(dir),
        None => tempfile::NamedTempFile::new(),
    }
    .with_context(|| format!("cannot create temp file next to {}", path.display()))?;
    {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(&tmp);
        writer.write_record(header)?;
        for row in rows {
            writer.write_record(row)?;
        }
        writer.flush()?;
    }
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Header shared by both sweeps' aggregate files.
pub const AGGREGATE_HEADER: [&str; 12] = [
    "method",
    "M",
    "M_T",
    "N",
    "P",
    "J",
    "bias",
    "variance",
    "mse",
    "mean_max_weight",
    "mean_ess",
    "n_failed",
];

fn aggregate_row(stats: &AggregateStats) -> Vec<String> {
    vec![
        stats.method.as_str().to_string(),
        stats.n_samples.to_string(),
        stats.clip_count.to_string(),
        stats.n_observations.to_string(),
        stats.n_obs_realizations.to_string(),
        stats.n_mc_trials.to_string(),
        fmt_f64(stats.bias),
        fmt_f64(stats.variance),
        fmt_f64(stats.mse),
        fmt_f64(stats.mean_max_weight),
        fmt_f64(stats.mean_ess),
        stats.n_failed.to_string(),
    ]
}

/// Writes one aggregate row per (cell, method), IS before NIS within a cell.
pub fn write_sample_sweep_aggregate(path: &Path, cells: &[SweepCell]) -> anyhow::Result<()> {
    let mut rows = Vec::with_capacity(cells.len() * 2);
    for cell in cells {
        rows.push(aggregate_row(&cell.grid.is_stats));
        rows.push(aggregate_row(&cell.grid.nis_stats));
    }
    write_rows(path, &AGGREGATE_HEADER, &rows)
}

/// Writes one aggregate row per clipping cell (all NIS).
pub fn write_clip_sweep_aggregate(path: &Path, cells: &[ClipCell]) -> anyhow::Result<()> {
    let rows: Vec<Vec<String>> = cells.iter().map(|c| aggregate_row(&c.stats)).collect();
    write_rows(path, &AGGREGATE_HEADER, &rows)
}

/// Per-trial rows for the sample-size sweep: two rows (IS, NIS) per trial.
pub fn write_sample_sweep_trials(path: &Path, cells: &[SweepCell]) -> anyhow::Result<()> {
    let header = [
        "method", "M", "obs_idx", "trial_idx", "xhat_1", "xhat_2", "xhat_3", "max_weight", "ess",
    ];
    let mut rows = Vec::new();
    for cell in cells {
        for record in &cell.grid.records {
            for est in [&record.is, &record.nis] {
                rows.push(vec![
                    est.method.as_str().to_string(),
                    cell.n_samples.to_string(),
                    record.obs_idx.to_string(),
                    record.trial_idx.to_string(),
                    fmt_f64(est.posterior_mean[0]),
                    fmt_f64(est.posterior_mean[1]),
                    fmt_f64(est.posterior_mean[2]),
                    fmt_f64(est.max_weight),
                    fmt_f64(est.ess),
                ]);
            }
        }
    }
    write_rows(path, &header, &rows)
}

/// Per-trial rows for the clipping sweep; same layout plus the varying
/// M_T and N columns.
pub fn write_clip_sweep_trials(
    path: &Path,
    cells: &[ClipCell],
    n_samples: usize,
) -> anyhow::Result<()> {
    let header = [
        "method", "M", "M_T", "N", "obs_idx", "trial_idx", "xhat_1", "xhat_2", "xhat_3",
        "max_weight", "ess",
    ];
    let mut rows = Vec::new();
    for cell in cells {
        for record in &cell.records {
            let est = &record.estimate;
            rows.push(vec![
                est.method.as_str().to_string(),
                n_samples.to_string(),
                cell.clip_count.to_string(),
                cell.n_observations.to_string(),
                record.obs_idx.to_string(),
                record.trial_idx.to_string(),
                fmt_f64(est.posterior_mean[0]),
                fmt_f64(est.posterior_mean[1]),
                fmt_f64(est.posterior_mean[2]),
                fmt_f64(est.max_weight),
                fmt_f64(est.ess),
            ]);
        }
    }
    write_rows(path, &header, &rows)
}

/// Observation file: a single `y` column.
pub fn write_observations(path: &Path, obs: &ObservationSet) -> anyhow::Result<()> {
    let rows: Vec<Vec<String>> = obs.values().iter().map(|&y| vec![fmt_f64(y)]).collect();
    write_rows(path, &["y"], &rows)
}
