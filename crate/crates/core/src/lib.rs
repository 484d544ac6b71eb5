//! Importance sampling with clipped weights.
//!
//! Standard importance sampling weights a set of proposal draws by the
//! ratio of target to proposal density. When the target is concentrated —
//! here, the posterior of three Gaussian-mixture means given up to a
//! thousand observations — one draw tends to swallow nearly all of the
//! normalized weight and the estimator degenerates. The nonlinear variant
//! (NIS) clips the largest `M_T` unnormalized weights to their common
//! `M_T`-th largest value before normalizing, trading a small bias for a
//! large variance reduction.
//!
//! The crate provides the statistical model ([`model`]), the weighting
//! pipeline ([`weights`]), estimators and diagnostics ([`estimators`]), and
//! the benchmark grids and sweeps that compare IS against NIS
//! ([`experiment`]), with reproducible parallel execution ([`stream`]).
//!
//! ```
//! use nis_core::{run_grid, ExperimentConfig};
//!
//! let config = ExperimentConfig {
//!     n_observations: 50,
//!     n_samples: 100,
//!     n_obs_realizations: 2,
//!     n_mc_trials: 5,
//!     ..ExperimentConfig::default()
//! };
//! let grid = run_grid(&config).unwrap();
//! assert!(grid.nis_stats.mean_max_weight <= grid.is_stats.mean_max_weight + 1e-12);
//! ```

pub mod error;
pub mod estimators;
pub mod experiment;
pub mod model;
pub mod numeric;
pub mod stream;
pub mod weights;

pub use error::{Error, Result};
pub use estimators::{Method, TrialEstimate};
pub use experiment::{
    bias_statistic, mse_statistic, run_grid, run_trial, sweep_clipping, sweep_sample_size,
    variance_statistic, AggregateStats, BiasNorm, ClipCell, ClipRecord, ExperimentConfig,
    GridResult, SweepCell, TrialOutput, TrialRecord,
};
pub use model::{
    gmm_log_density, prior_log_density, sample_observations, sample_prior, GaussianPrior,
    GmmParams, ObservationSet, StateSample, STATE_DIM,
};
pub use stream::{derive_stream, Stream, StreamRole};
pub use weights::{
    clip_log_weights, compute_log_weights, normalize_weights, resolve_clip_count, run_is, run_nis,
    ClippingPolicy, LogWeights, NormalizedWeights, ParticleSet,
};
