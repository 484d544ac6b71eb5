//! Config file schema and validation.
//!
//! The file is TOML with four optional sections; an empty file yields the
//! benchmark defaults. All numeric fields are plain decimals. The schema is
//! documented in the README.

use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};

use nis_core::{BiasNorm, ClippingPolicy, ExperimentConfig, GaussianPrior, GmmParams};

/// Whole config file. Every section and field is optional and falls back to
/// the benchmark defaults; unknown keys are rejected by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub model: ModelSection,
    pub prior: PriorSection,
    pub run: RunSection,
    pub clipping: ClippingSection,
    pub sweep: SweepSection,
}

impl Default for FileConfig {
    fn default() -> Self {
        Self {
            model: ModelSection::default(),
            prior: PriorSection::default(),
            run: RunSection::default(),
            clipping: ClippingSection::default(),
            sweep: SweepSection::default(),
        }
    }
}

/// `[model]`: ground-truth mixture parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub means: [f64; 3],
    pub coeff1: f64,
    pub coeff2: f64,
    pub variance: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        let p = GmmParams::default();
        Self {
            means: p.means(),
            coeff1: p.coeff1(),
            coeff2: p.coeff2(),
            variance: p.variance(),
        }
    }
}

/// `[prior]`: Gaussian prior (and proposal) over the unknown means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorSection {
    pub mean: [f64; 3],
    pub variance: f64,
}

impl Default for PriorSection {
    fn default() -> Self {
        let p = GaussianPrior::default();
        Self {
            mean: p.mean(),
            variance: p.variance(),
        }
    }
}

/// `[run]`: grid dimensions, seeding and the bias norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub n_observations: usize,
    pub n_samples: usize,
    pub n_obs_realizations: usize,
    pub n_mc_trials: usize,
    pub master_seed: u64,
    pub bias_norm: BiasNormChoice,
}

impl Default for RunSection {
    fn default() -> Self {
        let c = ExperimentConfig::default();
        Self {
            n_observations: c.n_observations,
            n_samples: c.n_samples,
            n_obs_realizations: c.n_obs_realizations,
            n_mc_trials: c.n_mc_trials,
            master_seed: c.master_seed,
            bias_norm: BiasNormChoice::L2,
        }
    }
}

/// `[clipping]`: how M_T is chosen. `policy = "log"` uses
/// `round(log_base M)`; `policy = "fixed"` uses `m_t` directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClippingSection {
    pub policy: PolicyChoice,
    pub m_t: usize,
    pub log_base: f64,
}

impl Default for ClippingSection {
    fn default() -> Self {
        Self {
            policy: PolicyChoice::Log,
            m_t: 7,
            log_base: std::f64::consts::E,
        }
    }
}

/// `[sweep]`: the grids walked by `sweep-samples` and `sweep-clipping`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub sample_sizes: Vec<usize>,
    pub clip_counts: Vec<usize>,
    pub obs_counts: Vec<usize>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            sample_sizes: vec![100, 316, 1000, 3162, 10_000],
            clip_counts: (1..=30).collect(),
            obs_counts: vec![100, 300, 1000],
        }
    }
}

/// Norm used in the bias statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BiasNormChoice {
    L2,
    L1,
}

/// Clip-count policy selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyChoice {
    Log,
    Fixed,
}

/// Reads and parses a config file. Unknown or ill-typed fields are reported
/// by name with their TOML location.
pub fn parse_config(path: &Path) -> anyhow::Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let config: FileConfig = toml::from_str(&text)
        .with_context(|| format!("invalid config file {}", path.display()))?;
    Ok(config)
}

impl FileConfig {
    /// Validates the file values into a runnable experiment config.
    pub fn to_experiment_config(&self) -> anyhow::Result<ExperimentConfig> {
        let model = GmmParams::new(
            self.model.means,
            self.model.coeff1,
            self.model.coeff2,
            self.model.variance,
        )
        .context("[model] section")?;
        let prior =
            GaussianPrior::new(self.prior.mean, self.prior.variance).context("[prior] section")?;
        let clipping = match self.clipping.policy {
            PolicyChoice::Log => ClippingPolicy::LogOfSampleSize {
                base: self.clipping.log_base,
            },
            PolicyChoice::Fixed => ClippingPolicy::Fixed(self.clipping.m_t),
        };
        let config = ExperimentConfig {
            model,
            prior,
            n_observations: self.run.n_observations,
            n_samples: self.run.n_samples,
            clipping,
            n_obs_realizations: self.run.n_obs_realizations,
            n_mc_trials: self.run.n_mc_trials,
            master_seed: self.run.master_seed,
            bias_norm: match self.run.bias_norm {
                BiasNormChoice::L2 => BiasNorm::L2,
                BiasNormChoice::L1 => BiasNorm::L1,
            },
        };
        config.validate().context("[run]/[clipping] sections")?;
        Ok(config)
    }
}
