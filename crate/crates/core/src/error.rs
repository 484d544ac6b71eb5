//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Errors produced by model construction, the weighting pipeline and the
/// experiment runners.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A constructor or configuration field received a value outside its
    /// domain. `name` identifies the offending field.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        /// Field or argument name.
        name: &'static str,
        /// Human-readable description of the violation.
        reason: String,
    },

    /// An observation set with zero entries was supplied.
    #[error("observation set is empty")]
    EmptyObservations,

    /// A sample set with zero entries was supplied.
    #[error("sample set is empty")]
    EmptySamples,

    /// Clipping needs at least two samples.
    #[error("sample size {sample_size} is too small for clipping; need M >= 2")]
    SampleSizeTooSmall {
        /// Offending sample count.
        sample_size: usize,
    },

    /// The requested clip count does not satisfy `1 <= M_T < M`.
    #[error("clip count {clip_count} out of range for sample size {sample_size}")]
    ClipCountOutOfRange {
        /// Requested number of clipped weights.
        clip_count: usize,
        /// Number of samples in the weight vector.
        sample_size: usize,
    },

    /// Every log-weight is negative infinity: all samples have zero target
    /// density and no normalization exists.
    #[error("all log-weights are -inf: total weight degeneracy")]
    TotalDegeneracy,

    /// A statistic was requested over an empty estimate grid.
    #[error("estimate grid is empty")]
    EmptyGrid,

    /// A statistic needs more trials per realization than are available.
    #[error("realization {obs_index} has {got} trials, need at least {need}")]
    NotEnoughTrials {
        /// Index of the observation realization.
        obs_index: usize,
        /// Trials available after excluding failures.
        got: usize,
        /// Minimum required.
        need: usize,
    },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
