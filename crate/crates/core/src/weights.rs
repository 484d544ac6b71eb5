//! The IS/NIS weighting pipeline: unnormalized log-weight computation,
//! the clipping transformation, and log-sum-exp normalization.
//!
//! Weights live in the log domain from the likelihood sum until the final
//! normalization. With 1000 observations the product of likelihood factors
//! is far below the smallest positive double, so linear-domain weights are
//! never materialized along the way.

use crate::error::{Error, Result};
use crate::model::{self, GmmParams, ObservationSet, StateSample};
use crate::numeric::{compensated_sum, CompensatedSum};

/// Unnormalized log importance weights, one per sample.
///
/// After the clipping transformation the same container holds the
/// transformed log-weights; clipping commutes with `log` because it is a
/// pointwise `min` against a common threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct LogWeights(Vec<f64>);

impl LogWeights {
    /// Wraps raw log-weights. `+inf` and NaN are rejected; `-inf` is
    /// tolerated (a sample with zero target density).
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySamples);
        }
        if values.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(Error::InvalidParameter {
                name: "log_weights",
                reason: "entries must not be NaN or +inf".into(),
            });
        }
        Ok(Self(values))
    }

    /// The log-weight values.
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Number of weights.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always false; the constructor rejects empty vectors.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Normalized importance weights: nonnegative, summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedWeights(Vec<f64>);

impl NormalizedWeights {
    /// Wraps weights, checking the `[0, 1]` range and that the total is one
    /// within `1e-12`.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySamples);
        }
        if values.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: "entries must lie in [0, 1]".into(),
            });
        }
        let total = compensated_sum(values.iter().copied());
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: format!("must sum to 1 within 1e-12, got {total}"),
            });
        }
        Ok(Self(values))
    }

    /// The weight values.
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Number of weights.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always false; the constructor rejects empty vectors.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// How the number of clipped weights `M_T` is chosen for a sample size `M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClippingPolicy {
    /// Clip a fixed number of top weights (clamped to `[1, M-1]` when
    /// resolved against a concrete sample size).
    Fixed(usize),
    /// Clip `round(log_base(M))` weights, clamped to `[1, M-1]`.
    LogOfSampleSize {
        /// Logarithm base; must exceed 1. `ClippingPolicy::log()` gives the
        /// natural-log rule.
        base: f64,
    },
}

impl ClippingPolicy {
    /// The natural-log rule `M_T = round(ln M)`.
    pub fn log() -> Self {
        ClippingPolicy::LogOfSampleSize {
            base: std::f64::consts::E,
        }
    }

    /// Checks the policy's own invariants.
    pub fn validate(&self) -> Result<()> {
        match *self {
            ClippingPolicy::Fixed(m_t) if m_t == 0 => Err(Error::InvalidParameter {
                name: "clipping.m_t",
                reason: "fixed clip count must be at least 1".into(),
            }),
            ClippingPolicy::LogOfSampleSize { base } if !(base > 1.0) || !base.is_finite() => {
                Err(Error::InvalidParameter {
                    name: "clipping.log_base",
                    reason: format!("log base must be a finite real > 1, got {base}"),
                })
            }
            _ => Ok(()),
        }
    }
}

/// A weighted sample set: the discrete approximation of the target.
#[derive(Debug, Clone)]
pub struct ParticleSet {
    samples: Vec<StateSample>,
    log_weights: LogWeights,
    normalized: NormalizedWeights,
}

impl ParticleSet {
    /// Assembles a particle set, checking that all three parts have equal length.
    pub fn from_parts(
        samples: Vec<StateSample>,
        log_weights: LogWeights,
        normalized: NormalizedWeights,
    ) -> Result<Self> {
        if samples.len() != log_weights.len() || samples.len() != normalized.len() {
            return Err(Error::InvalidParameter {
                name: "particle_set",
                reason: format!(
                    "length mismatch: {} samples, {} log-weights, {} weights",
                    samples.len(),
                    log_weights.len(),
                    normalized.len()
                ),
            });
        }
        Ok(Self {
            samples,
            log_weights,
            normalized,
        })
    }

    /// The samples.
    pub fn samples(&self) -> &[StateSample] {
        &self.samples
    }

    /// Unnormalized log-weights (transformed ones for an NIS set).
    pub fn log_weights(&self) -> &LogWeights {
        &self.log_weights
    }

    /// Normalized weights.
    pub fn weights(&self) -> &NormalizedWeights {
        &self.normalized
    }

    /// Number of particles.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Unnormalized log-weight of every sample against an observation set.
///
/// With the proposal equal to the prior the prior factors cancel, so the
/// log-weight is exactly the log-likelihood: the sum over observations of
/// the mixture log-density at the sample.
pub fn compute_log_weights(
    samples: &[StateSample],
    obs: &ObservationSet,
    params: &GmmParams,
) -> Result<LogWeights> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if obs.is_empty() {
        return Err(Error::EmptyObservations);
    }
    let density = model::GmmLogDensity::new(params);
    let values = samples
        .iter()
        .map(|s| model::log_likelihood_sum(&density, obs, &s.components()))
        .collect();
    LogWeights::new(values)
}

/// Resolves a clipping policy against a concrete sample size.
///
/// `Fixed(m)` clamps `m` to `[1, M-1]`; the log rule rounds `log_base(M)`
/// to the nearest integer before clamping. Requires `M >= 2`.
pub fn resolve_clip_count(policy: ClippingPolicy, sample_size: usize) -> Result<usize> {
    if sample_size < 2 {
        return Err(Error::SampleSizeTooSmall { sample_size });
    }
    policy.validate()?;
    let raw = match policy {
        ClippingPolicy::Fixed(m_t) => m_t,
        ClippingPolicy::LogOfSampleSize { base } => {
            ((sample_size as f64).ln() / base.ln()).round() as usize
        }
    };
    Ok(raw.clamp(1, sample_size - 1))
}

/// Clips the `clip_count` largest log-weights to their common
/// `clip_count`-th largest value.
///
/// The threshold is found by order-statistic selection, not a full sort;
/// every entry is then replaced by `min(entry, threshold)`, so index order
/// is preserved and entries at or below the threshold are untouched.
pub fn clip_log_weights(lw: &LogWeights, clip_count: usize) -> Result<LogWeights> {
    let m = lw.len();
    if clip_count < 1 || clip_count >= m {
        return Err(Error::ClipCountOutOfRange {
            clip_count,
            sample_size: m,
        });
    }
    let mut scratch = lw.values().to_vec();
    let (_, threshold, _) =
        scratch.select_nth_unstable_by(clip_count - 1, |a, b| b.total_cmp(a));
    let t = *threshold;
    Ok(LogWeights(lw.values().iter().map(|&v| v.min(t)).collect()))
}

/// Normalizes log-weights into probability weights via log-sum-exp.
///
/// Shift-invariant: adding any finite constant to all entries leaves the
/// output unchanged up to rounding. Errors with `TotalDegeneracy` when every
/// entry is `-inf`.
pub fn normalize_weights(lw: &LogWeights) -> Result<NormalizedWeights> {
    let max = lw.values().iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    if max == f64::NEG_INFINITY {
        return Err(Error::TotalDegeneracy);
    }
    let shifted: Vec<f64> = lw.values().iter().map(|&v| (v - max).exp()).collect();
    let mut total = CompensatedSum::new();
    for &e in &shifted {
        total.add(e);
    }
    let total = total.value();
    Ok(NormalizedWeights(shifted.into_iter().map(|e| e / total).collect()))
}

/// Standard importance sampling: weight, then normalize.
pub fn run_is(
    samples: Vec<StateSample>,
    obs: &ObservationSet,
    params: &GmmParams,
) -> Result<ParticleSet> {
    let lw = compute_log_weights(&samples, obs, params)?;
    let nw = normalize_weights(&lw)?;
    ParticleSet::from_parts(samples, lw, nw)
}

/// Nonlinear importance sampling: weight, clip the top `M_T` weights to
/// their common threshold, then normalize. With `M_T = 1` the threshold is
/// the maximum and the result equals standard IS.
pub fn run_nis(
    samples: Vec<StateSample>,
    obs: &ObservationSet,
    params: &GmmParams,
    policy: ClippingPolicy,
) -> Result<ParticleSet> {
    let m_t = resolve_clip_count(policy, samples.len())?;
    let lw = compute_log_weights(&samples, obs, params)?;
    let clipped = clip_log_weights(&lw, m_t)?;
    let nw = normalize_weights(&clipped)?;
    ParticleSet::from_parts(samples, clipped, nw)
}
