//! Experiment orchestration: P observation realizations x J Monte Carlo
//! trials per cell, the bias/variance/MSE aggregates, and the two parameter
//! sweeps (sample size, clipping strength).
//!
//! Trials are independent work units; every one derives its own random
//! substream from the master seed, so results are bit-identical no matter
//! how many workers run them. Aggregation always happens over the collected
//! trial list in (obs_idx, trial_idx) order.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{Method, TrialEstimate};
use crate::model::{
    sample_observations, sample_prior, GaussianPrior, GmmParams, ObservationSet,
};
use crate::numeric::CompensatedSum;
use crate::stream::{derive_stream, Stream, StreamRole};
use crate::weights::{
    clip_log_weights, compute_log_weights, normalize_weights, resolve_clip_count, ClippingPolicy,
    ParticleSet,
};

/// Norm applied to the per-realization mean error inside the bias statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BiasNorm {
    /// Euclidean norm (default; pairs with the trace-based variance so the
    /// squared-error decomposition holds).
    L2,
    /// Sum of componentwise absolute values.
    L1,
}

/// Full description of one experiment: model truth, prior/proposal,
/// grid dimensions, clipping policy and seeding.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Ground-truth mixture parameters (also the likelihood parameters).
    pub model: GmmParams,
    /// Prior over the unknown means; doubles as the proposal.
    pub prior: GaussianPrior,
    /// Observations per realization (N).
    pub n_observations: usize,
    /// Particles per trial (M).
    pub n_samples: usize,
    /// How the clip count is resolved against M.
    pub clipping: ClippingPolicy,
    /// Observation realizations (P).
    pub n_obs_realizations: usize,
    /// Monte Carlo trials per realization (J).
    pub n_mc_trials: usize,
    /// Master seed; every substream derives from it.
    pub master_seed: u64,
    /// Norm used by the bias statistic.
    pub bias_norm: BiasNorm,
}

impl Default for ExperimentConfig {
    /// Desk-scale defaults: the standard three-mode model, N = M = 1000,
    /// natural-log clipping, P = 25, J = 200.
    fn default() -> Self {
        Self {
            model: GmmParams::default(),
            prior: GaussianPrior::default(),
            n_observations: 1000,
            n_samples: 1000,
            clipping: ClippingPolicy::log(),
            n_obs_realizations: 25,
            n_mc_trials: 200,
            master_seed: 1729,
            bias_norm: BiasNorm::L2,
        }
    }
}

impl ExperimentConfig {
    /// Checks the grid dimensions and the clipping policy.
    pub fn validate(&self) -> Result<()> {
        if self.n_observations == 0 {
            return Err(Error::InvalidParameter {
                name: "n_observations",
                reason: "need at least one observation".into(),
            });
        }
        if self.n_samples < 2 {
            return Err(Error::SampleSizeTooSmall {
                sample_size: self.n_samples,
            });
        }
        if self.n_obs_realizations == 0 {
            return Err(Error::InvalidParameter {
                name: "n_obs_realizations",
                reason: "need at least one observation realization".into(),
            });
        }
        if self.n_mc_trials == 0 {
            return Err(Error::InvalidParameter {
                name: "n_mc_trials",
                reason: "need at least one Monte Carlo trial".into(),
            });
        }
        self.clipping.validate()
    }
}

/// The IS and NIS estimates produced by one trial on shared draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutput {
    /// Standard-IS estimate.
    pub is: TrialEstimate,
    /// Clipped-weight estimate.
    pub nis: TrialEstimate,
}

/// One successful trial inside a grid, tagged with its coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRecord {
    /// Observation realization index (0-based).
    pub obs_idx: usize,
    /// Trial index within the realization (0-based).
    pub trial_idx: usize,
    /// Standard-IS estimate.
    pub is: TrialEstimate,
    /// Clipped-weight estimate.
    pub nis: TrialEstimate,
}

/// Everything a P x J grid produced for one (M, N) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    /// Successful trials in (obs_idx, trial_idx) order.
    pub records: Vec<TrialRecord>,
    /// Trials lost to total weight degeneracy.
    pub n_failed: usize,
    /// Resolved clip count used by the NIS side.
    pub clip_count: usize,
    /// Aggregates of the IS estimates.
    pub is_stats: AggregateStats,
    /// Aggregates of the NIS estimates.
    pub nis_stats: AggregateStats,
}

/// Bias/variance/MSE and degeneracy diagnostics aggregated over a grid,
/// along with an echo of the cell configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateStats {
    /// Which estimator these aggregates describe.
    pub method: Method,
    /// Particles per trial (M).
    pub n_samples: usize,
    /// Resolved clip count; 1 for plain IS (clipping one weight is the
    /// identity transformation).
    pub clip_count: usize,
    /// Observations per realization (N).
    pub n_observations: usize,
    /// Configured observation realizations (P).
    pub n_obs_realizations: usize,
    /// Configured trials per realization (J).
    pub n_mc_trials: usize,
    /// Mean over realizations of the norm of the mean estimation error.
    pub bias: f64,
    /// Mean over realizations of the trace of the estimator covariance.
    pub variance: f64,
    /// Mean squared Euclidean error over all successful runs.
    pub mse: f64,
    /// Mean over successful trials of the maximum normalized weight.
    pub mean_max_weight: f64,
    /// Mean over successful trials of the effective sample size.
    pub mean_ess: f64,
    /// Trials lost to total weight degeneracy.
    pub n_failed: usize,
}

/// Runs one trial: draws M proposal samples, computes the shared
/// log-weights once, and produces both estimators from them.
///
/// IS and NIS deliberately share the draw and the unnormalized log-weights;
/// they are compared under a common sampling budget.
pub fn run_trial(
    config: &ExperimentConfig,
    obs: &ObservationSet,
    rng: &mut Stream,
) -> Result<TrialOutput> {
    let m_t = resolve_clip_count(config.clipping, config.n_samples)?;
    let samples = sample_prior(&config.prior, config.n_samples, rng)?;
    let lw = compute_log_weights(&samples, obs, &config.model)?;
    let w_is = normalize_weights(&lw)?;
    let clipped = clip_log_weights(&lw, m_t)?;
    let w_nis = normalize_weights(&clipped)?;
    let ps_is = ParticleSet::from_parts(samples.clone(), lw, w_is)?;
    let ps_nis = ParticleSet::from_parts(samples, clipped, w_nis)?;
    Ok(TrialOutput {
        is: TrialEstimate::from_particles(&ps_is, Method::Is, None),
        nis: TrialEstimate::from_particles(&ps_nis, Method::Nis, Some(m_t)),
    })
}

/// Runs the full P x J grid for one cell, in parallel over trials.
///
/// A trial that fails with total weight degeneracy is counted and excluded;
/// any other error aborts the grid.
pub fn run_grid(config: &ExperimentConfig) -> Result<GridResult> {
    config.validate()?;
    let p = config.n_obs_realizations;
    let j = config.n_mc_trials;
    let obs_sets: Vec<ObservationSet> = (0..p)
        .map(|pi| {
            let mut rng = derive_stream(config.master_seed, pi, 0, StreamRole::Observations);
            sample_observations(&config.model, config.n_observations, &mut rng)
        })
        .collect::<Result<_>>()?;

    let outcomes: Vec<(usize, usize, Result<TrialOutput>)> = (0..p * j)
        .into_par_iter()
        .map(|idx| {
            let (pi, ji) = (idx / j, idx % j);
            let mut rng = derive_stream(config.master_seed, pi, ji, StreamRole::Sampling);
            (pi, ji, run_trial(config, &obs_sets[pi], &mut rng))
        })
        .collect();

    let mut records = Vec::with_capacity(p * j);
    let mut n_failed = 0usize;
    for (pi, ji, outcome) in outcomes {
        match outcome {
            Ok(out) => records.push(TrialRecord {
                obs_idx: pi,
                trial_idx: ji,
                is: out.is,
                nis: out.nis,
            }),
            Err(Error::TotalDegeneracy) => n_failed += 1,
            Err(e) => return Err(e),
        }
    }

    let clip_count = resolve_clip_count(config.clipping, config.n_samples)?;
    let is_stats = build_stats(
        Method::Is,
        config,
        config.n_observations,
        1,
        n_failed,
        records.iter().map(|r| (r.obs_idx, &r.is)),
    )?;
    let nis_stats = build_stats(
        Method::Nis,
        config,
        config.n_observations,
        clip_count,
        n_failed,
        records.iter().map(|r| (r.obs_idx, &r.nis)),
    )?;
    Ok(GridResult {
        records,
        n_failed,
        clip_count,
        is_stats,
        nis_stats,
    })
}

/// Bias statistic: per realization, average the trial estimates, subtract
/// the truth, take the configured norm of that 3-vector, then average the
/// norms over realizations.
///
/// Realizations with no surviving trials are excluded; an entirely empty
/// grid is an error.
pub fn bias_statistic(
    estimates: &[Vec<[f64; 3]>],
    truth: &[f64; 3],
    norm: BiasNorm,
) -> Result<f64> {
    let mut acc = CompensatedSum::new();
    let mut used = 0usize;
    for group in estimates.iter().filter(|g| !g.is_empty()) {
        let mean = component_mean(group);
        let err = [mean[0] - truth[0], mean[1] - truth[1], mean[2] - truth[2]];
        let value = match norm {
            BiasNorm::L2 => (err[0] * err[0] + err[1] * err[1] + err[2] * err[2]).sqrt(),
            BiasNorm::L1 => err[0].abs() + err[1].abs() + err[2].abs(),
        };
        acc.add(value);
        used += 1;
    }
    if used == 0 {
        return Err(Error::EmptyGrid);
    }
    Ok(acc.value() / used as f64)
}

/// Variance statistic: per realization, the trace of the empirical
/// covariance of the estimates (normalized by J, not J-1), averaged over
/// realizations. Requires at least two trials per surviving realization.
pub fn variance_statistic(estimates: &[Vec<[f64; 3]>]) -> Result<f64> {
    for (p, group) in estimates.iter().enumerate() {
        if !group.is_empty() && group.len() < 2 {
            return Err(Error::NotEnoughTrials {
                obs_index: p,
                got: group.len(),
                need: 2,
            });
        }
    }
    variance_statistic_lenient(estimates)
}

/// Same trace-of-covariance formula, but tolerating single-trial
/// realizations (their covariance is the zero matrix). Used by grid
/// aggregation, where J = 1 cells are legal degenerate runs.
pub(crate) fn variance_statistic_lenient(estimates: &[Vec<[f64; 3]>]) -> Result<f64> {
    let mut acc = CompensatedSum::new();
    let mut used = 0usize;
    for group in estimates.iter().filter(|g| !g.is_empty()) {
        let mean = component_mean(group);
        let mut trace = CompensatedSum::new();
        for est in group {
            for d in 0..3 {
                let dev = est[d] - mean[d];
                trace.add(dev * dev);
            }
        }
        acc.add(trace.value() / group.len() as f64);
        used += 1;
    }
    if used == 0 {
        return Err(Error::EmptyGrid);
    }
    Ok(acc.value() / used as f64)
}

/// MSE statistic: squared Euclidean distance to the truth, averaged over
/// every successful run in the grid.
pub fn mse_statistic(estimates: &[Vec<[f64; 3]>], truth: &[f64; 3]) -> Result<f64> {
    let mut acc = CompensatedSum::new();
    let mut count = 0usize;
    for group in estimates {
        for est in group {
            let mut sq = 0.0;
            for d in 0..3 {
                let dev = est[d] - truth[d];
                sq += dev * dev;
            }
            acc.add(sq);
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::EmptyGrid);
    }
    Ok(acc.value() / count as f64)
}

fn component_mean(group: &[[f64; 3]]) -> [f64; 3] {
    let mut acc = [CompensatedSum::new(); 3];
    for est in group {
        for d in 0..3 {
            acc[d].add(est[d]);
        }
    }
    std::array::from_fn(|d| acc[d].value() / group.len() as f64)
}

fn build_stats<'a>(
    method: Method,
    config: &ExperimentConfig,
    n_observations: usize,
    clip_count: usize,
    n_failed: usize,
    estimates: impl Iterator<Item = (usize, &'a TrialEstimate)>,
) -> Result<AggregateStats> {
    let mut groups: Vec<Vec<[f64; 3]>> = vec![Vec::new(); config.n_obs_realizations];
    let mut max_w = CompensatedSum::new();
    let mut ess = CompensatedSum::new();
    let mut count = 0usize;
    for (obs_idx, est) in estimates {
        groups[obs_idx].push(est.posterior_mean);
        max_w.add(est.max_weight);
        ess.add(est.ess);
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptyGrid);
    }
    let truth = config.model.means();
    Ok(AggregateStats {
        method,
        n_samples: config.n_samples,
        clip_count,
        n_observations,
        n_obs_realizations: config.n_obs_realizations,
        n_mc_trials: config.n_mc_trials,
        bias: bias_statistic(&groups, &truth, config.bias_norm)?,
        variance: variance_statistic_lenient(&groups)?,
        mse: mse_statistic(&groups, &truth)?,
        mean_max_weight: max_w.value() / count as f64,
        mean_ess: ess.value() / count as f64,
        n_failed,
    })
}

/// One cell of the sample-size sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    /// Particles per trial for this cell.
    pub n_samples: usize,
    /// The cell's grid output.
    pub grid: GridResult,
}

/// Runs the full grid for every requested sample size, keeping the
/// configured clipping policy (the default resolves the clip count as
/// `round(ln M)` per cell).
///
/// Observation realizations are keyed by realization index only, so every
/// cell sees the same P observation sets; sampling streams are keyed by
/// (realization, trial), so trials reuse common random numbers across cells.
pub fn sweep_sample_size(
    config: &ExperimentConfig,
    sample_sizes: &[usize],
) -> Result<Vec<SweepCell>> {
    if sample_sizes.is_empty() {
        return Err(Error::InvalidParameter {
            name: "sample_sizes",
            reason: "need at least one sample size".into(),
        });
    }
    sample_sizes
        .iter()
        .map(|&m| {
            let cell_config = ExperimentConfig {
                n_samples: m,
                ..config.clone()
            };
            run_grid(&cell_config).map(|grid| SweepCell { n_samples: m, grid })
        })
        .collect()
}

/// One successful trial inside a clipping-sweep cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipRecord {
    /// Observation realization index.
    pub obs_idx: usize,
    /// Trial index within the realization.
    pub trial_idx: usize,
    /// The NIS estimate at this cell's clip count.
    pub estimate: TrialEstimate,
}

/// One (M_T, N) cell of the clipping sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipCell {
    /// Clip count for this cell.
    pub clip_count: usize,
    /// Observations per realization for this cell.
    pub n_observations: usize,
    /// Successful trials in (obs_idx, trial_idx) order.
    pub records: Vec<ClipRecord>,
    /// Trials lost to total weight degeneracy.
    pub n_failed: usize,
    /// Aggregates for this cell.
    pub stats: AggregateStats,
}

/// Runs the clipping sweep: the cross product of clip counts and
/// observation counts at the configured sample size.
///
/// Within one (realization, trial) pair the samples and unnormalized
/// log-weights are computed once and shared by every clip count, so the
/// `M_T = 1` column is bit-identical to a plain IS run with the same seed.
pub fn sweep_clipping(
    config: &ExperimentConfig,
    clip_counts: &[usize],
    obs_counts: &[usize],
) -> Result<Vec<ClipCell>> {
    config.validate()?;
    if clip_counts.is_empty() {
        return Err(Error::InvalidParameter {
            name: "clip_counts",
            reason: "need at least one clip count".into(),
        });
    }
    if obs_counts.is_empty() {
        return Err(Error::InvalidParameter {
            name: "obs_counts",
            reason: "need at least one observation count".into(),
        });
    }
    let m = config.n_samples;
    for &m_t in clip_counts {
        if m_t < 1 || m_t >= m {
            return Err(Error::ClipCountOutOfRange {
                clip_count: m_t,
                sample_size: m,
            });
        }
    }
    let p = config.n_obs_realizations;
    let j = config.n_mc_trials;

    let mut cells = Vec::with_capacity(clip_counts.len() * obs_counts.len());
    for &n in obs_counts {
        let obs_sets: Vec<ObservationSet> = (0..p)
            .map(|pi| {
                let mut rng = derive_stream(config.master_seed, pi, 0, StreamRole::Observations);
                sample_observations(&config.model, n, &mut rng)
            })
            .collect::<Result<_>>()?;

        let outcomes: Vec<(usize, usize, Result<Vec<TrialEstimate>>)> = (0..p * j)
            .into_par_iter()
            .map(|idx| {
                let (pi, ji) = (idx / j, idx % j);
                let mut rng = derive_stream(config.master_seed, pi, ji, StreamRole::Sampling);
                let result = (|| {
                    let samples = sample_prior(&config.prior, m, &mut rng)?;
                    let lw = compute_log_weights(&samples, &obs_sets[pi], &config.model)?;
                    clip_counts
                        .iter()
                        .map(|&m_t| {
                            let clipped = clip_log_weights(&lw, m_t)?;
                            let nw = normalize_weights(&clipped)?;
                            let ps = ParticleSet::from_parts(samples.clone(), clipped, nw)?;
                            Ok(TrialEstimate::from_particles(&ps, Method::Nis, Some(m_t)))
                        })
                        .collect::<Result<Vec<_>>>()
                })();
                (pi, ji, result)
            })
            .collect();

        for (k, &m_t) in clip_counts.iter().enumerate() {
            let mut records = Vec::with_capacity(p * j);
            let mut n_failed = 0usize;
            for (pi, ji, outcome) in &outcomes {
                match outcome {
                    Ok(per_clip) => records.push(ClipRecord {
                        obs_idx: *pi,
                        trial_idx: *ji,
                        estimate: per_clip[k],
                    }),
                    Err(Error::TotalDegeneracy) => n_failed += 1,
                    Err(e) => return Err(e.clone()),
                }
            }
            let stats = build_stats(
                Method::Nis,
                config,
                n,
                m_t,
                n_failed,
                records.iter().map(|r| (r.obs_idx, &r.estimate)),
            )?;
            cells.push(ClipCell {
                clip_count: m_t,
                n_observations: n,
                records,
                n_failed,
                stats,
            });
        }
    }
    Ok(cells)
}
