//! The statistical model behind the benchmark: a three-component Gaussian
//! mixture likelihood with known coefficients and variance, an independent
//! Gaussian prior over the unknown component means, and synthetic
//! observation generation.
//!
//! All density arithmetic stays in the log domain. The mixture log-density
//! is evaluated with log-sum-exp over the component terms, so it is finite
//! for every finite input even when the naive linear-domain evaluation would
//! underflow.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Dimension of the unknown state (one mean per mixture component).
pub const STATE_DIM: usize = 3;

/// Parameters of the three-component Gaussian mixture likelihood.
///
/// Holds the component means (the unknown state when used as ground truth),
/// the first two mixture coefficients and the shared component variance.
/// The third coefficient is implied: `1 - coeff1 - coeff2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmmParams {
    means: [f64; STATE_DIM],
    coeff1: f64,
    coeff2: f64,
    variance: f64,
}

impl GmmParams {
    /// Validates and builds mixture parameters.
    ///
    /// Requires `coeff1 >= 0`, `coeff2 >= 0`, `coeff1 + coeff2 <= 1`,
    /// `variance > 0` and finite means.
    pub fn new(means: [f64; STATE_DIM], coeff1: f64, coeff2: f64, variance: f64) -> Result<Self> {
        if means.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "means",
                reason: "all component means must be finite".into(),
            });
        }
        if !(coeff1 >= 0.0 && coeff1.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "coeff1",
                reason: format!("must be in [0, 1], got {coeff1}"),
            });
        }
        if !(coeff2 >= 0.0 && coeff2.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "coeff2",
                reason: format!("must be in [0, 1], got {coeff2}"),
            });
        }
        if coeff1 + coeff2 > 1.0 {
            return Err(Error::InvalidParameter {
                name: "coeff2",
                reason: format!("coeff1 + coeff2 must not exceed 1, got {}", coeff1 + coeff2),
            });
        }
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "variance",
                reason: format!("must be a positive real, got {variance}"),
            });
        }
        Ok(Self {
            means,
            coeff1,
            coeff2,
            variance,
        })
    }

    /// Component means.
    pub fn means(&self) -> [f64; STATE_DIM] {
        self.means
    }

    /// First mixture coefficient.
    pub fn coeff1(&self) -> f64 {
        self.coeff1
    }

    /// Second mixture coefficient.
    pub fn coeff2(&self) -> f64 {
        self.coeff2
    }

    /// Implied third coefficient, `1 - coeff1 - coeff2`.
    pub fn coeff3(&self) -> f64 {
        1.0 - self.coeff1 - self.coeff2
    }

    /// Shared component variance.
    pub fn variance(&self) -> f64 {
        self.variance
    }
}

impl Default for GmmParams {
    /// The bundled experiment's ground truth: means `[0, 2, 4]`,
    /// coefficients `(0.2, 0.3)` and unit variance.
    fn default() -> Self {
        Self {
            means: [0.0, 2.0, 4.0],
            coeff1: 0.2,
            coeff2: 0.3,
            variance: 1.0,
        }
    }
}

/// Independent Gaussian prior over the three unknown means: each dimension
/// is `N(mean_d, variance)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPrior {
    mean: [f64; STATE_DIM],
    variance: f64,
}

impl GaussianPrior {
    /// Validates and builds the prior. Requires `variance > 0` and finite
    /// location.
    pub fn new(mean: [f64; STATE_DIM], variance: f64) -> Result<Self> {
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "prior.mean",
                reason: "all components must be finite".into(),
            });
        }
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "prior.variance",
                reason: format!("must be a positive real, got {variance}"),
            });
        }
        Ok(Self { mean, variance })
    }

    /// Prior location.
    pub fn mean(&self) -> [f64; STATE_DIM] {
        self.mean
    }

    /// Per-dimension prior variance.
    pub fn variance(&self) -> f64 {
        self.variance
    }
}

impl Default for GaussianPrior {
    /// The bundled experiment's prior: `N(1, 10)` per dimension.
    fn default() -> Self {
        Self {
            mean: [1.0; STATE_DIM],
            variance: 10.0,
        }
    }
}

/// A sequence of scalar observations `y_1 .. y_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    values: Vec<f64>,
}

impl ObservationSet {
    /// Wraps observation values; rejects empty or non-finite input.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyObservations);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "observations",
                reason: "all values must be finite".into(),
            });
        }
        Ok(Self { values })
    }

    /// Observation values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of observations.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; the constructor rejects empty sets.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// One draw from the proposal in state space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateSample {
    components: [f64; STATE_DIM],
}

impl StateSample {
    /// Wraps a state vector.
    pub fn new(components: [f64; STATE_DIM]) -> Self {
        Self { components }
    }

    /// The state vector.
    pub fn components(&self) -> [f64; STATE_DIM] {
        self.components
    }
}

/// Precomputed constants for repeated mixture log-density evaluation.
///
/// `parts` splits the log-sum-exp into the component maximum `m` and the
/// shifted sum `s` (with `s` in `[1, 3]` by construction) so that callers
/// summing over many observations can accumulate `m` directly and fold the
/// bounded `s` factors into chunked products, saving one `ln` per term.
#[derive(Debug, Clone, Copy)]
pub(crate) struct GmmLogDensity {
    log_coeffs: [f64; STATE_DIM],
    neg_half_inv_var: f64,
    log_norm: f64,
}

impl GmmLogDensity {
    pub(crate) fn new(params: &GmmParams) -> Self {
        // ln(0) = -inf is the correct log coefficient for a switched-off
        // component; the -inf term contributes exp(-inf - m) = 0 below.
        let log_coeffs = [
            params.coeff1().ln(),
            params.coeff2().ln(),
            params.coeff3().ln(),
        ];
        Self {
            log_coeffs,
            neg_half_inv_var: -0.5 / params.variance(),
            log_norm: -0.5 * (2.0 * PI * params.variance()).ln(),
        }
    }

    /// Normalization constant `-0.5 ln(2 pi var)`, shared by all components.
    #[inline]
    pub(crate) fn log_norm(&self) -> f64 {
        self.log_norm
    }

    /// Returns `(m, s)` with `log p(y | x) = m + log_norm + ln(s)`, where
    /// `m` is the largest component term and `s` the shifted exponential sum.
    #[inline]
    pub(crate) fn parts(&self, y: f64, x: &[f64; STATE_DIM]) -> (f64, f64) {
        let mut t = [0.0; STATE_DIM];
        for k in 0..STATE_DIM {
            let d = y - x[k];
            t[k] = self.log_coeffs[k] + self.neg_half_inv_var * (d * d);
        }
        let m = t[0].max(t[1]).max(t[2]);
        // Terms more than 45 nats below the maximum contribute < 3e-20 to a
        // sum that is at least 1; skipping the exp cannot change the rounded
        // result.
        let mut s = 0.0;
        for tk in t {
            let d = tk - m;
            if d > -45.0 {
                s += d.exp();
            }
        }
        (m, s)
    }

    /// Full mixture log-density at one observation.
    #[inline]
    pub(crate) fn log_density(&self, y: f64, x: &[f64; STATE_DIM]) -> f64 {
        let (m, s) = self.parts(y, x);
        m + self.log_norm + s.ln()
    }
}

/// Log-density of the mixture likelihood `p(y | x)` for a candidate state
/// `x` (the three component means), evaluated via log-sum-exp.
///
/// Finite for every finite input: the mixture has full support.
pub fn gmm_log_density(y: f64, x: &StateSample, params: &GmmParams) -> f64 {
    GmmLogDensity::new(params).log_density(y, &x.components())
}

/// Log-density of the independent Gaussian prior at `x`: the sum of the
/// three per-dimension `N(mean_d, variance)` log-densities.
pub fn prior_log_density(x: &StateSample, prior: &GaussianPrior) -> f64 {
    let log_norm = -0.5 * (2.0 * PI * prior.variance()).ln();
    let half_inv_var = 0.5 / prior.variance();
    x.components()
        .iter()
        .zip(prior.mean())
        .map(|(xd, md)| {
            let d = xd - md;
            log_norm - half_inv_var * (d * d)
        })
        .sum()
}

/// Draws `count` independent samples from the prior. Each dimension is an
/// independent Gaussian; output is fully determined by the stream state.
pub fn sample_prior<R: Rng + ?Sized>(
    prior: &GaussianPrior,
    count: usize,
    rng: &mut R,
) -> Result<Vec<StateSample>> {
    if count == 0 {
        return Err(Error::InvalidParameter {
            name: "count",
            reason: "must draw at least one sample".into(),
        });
    }
    let sd = prior.variance().sqrt();
    let mean = prior.mean();
    Ok((0..count)
        .map(|_| {
            let mut c = [0.0; STATE_DIM];
            for (d, m) in c.iter_mut().zip(mean) {
                let z: f64 = rng.sample(StandardNormal);
                *d = m + sd * z;
            }
            StateSample::new(c)
        })
        .collect())
}

/// Draws `count` i.i.d. observations from the mixture by ancestral sampling.
///
/// The component index comes from inverse-CDF on a single uniform draw per
/// observation, so component selection consumes exactly one stream value no
/// matter which branch is taken.
pub fn sample_observations<R: Rng + ?Sized>(
    params: &GmmParams,
    count: usize,
    rng: &mut R,
) -> Result<ObservationSet> {
    if count == 0 {
        return Err(Error::InvalidParameter {
            name: "count",
            reason: "must draw at least one observation".into(),
        });
    }
    let sd = params.variance().sqrt();
    let means = params.means();
    let c1 = params.coeff1();
    let c12 = params.coeff1() + params.coeff2();
    let values = (0..count)
        .map(|_| {
            let u: f64 = rng.random();
            let mean = if u < c1 {
                means[0]
            } else if u < c12 {
                means[1]
            } else {
                means[2]
            };
            let z: f64 = rng.sample(StandardNormal);
            mean + sd * z
        })
        .collect();
    ObservationSet::new(values)
}

/// Compensated sum of `gmm_log_density` over a whole observation set for a
/// fixed candidate state. Shared by the weighting pipeline.
pub(crate) fn log_likelihood_sum(
    density: &GmmLogDensity,
    obs: &ObservationSet,
    x: &[f64; STATE_DIM],
) -> f64 {
    // The per-observation density is m + log_norm + ln(s) with s in [1, 3].
    // Accumulate the maxima compensated, fold the bounded s factors into
    // products of at most 512 terms (3^512 < f64::MAX), and add the shared
    // normalization once at the end.
    let mut max_acc = CompensatedSum::new();
    let mut log_acc = 0.0;
    let mut prod = 1.0;
    let mut in_chunk = 0u32;
    for &y in obs.values() {
        let (m, s) = density.parts(y, x);
        max_acc.add(m);
        prod *= s;
        in_chunk += 1;
        if in_chunk == 512 {
            log_acc += prod.ln();
            prod = 1.0;
            in_chunk = 0;
        }
    }
    log_acc += prod.ln();
    max_acc.value() + log_acc + obs.len() as f64 * density.log_norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::{derive_stream, StreamRole};

    // Frozen against a 50-digit evaluation of the three-term mixture sum.
    const GMM_LOG_AT_0: f64 = -2.3428586842989467;
    const GMM_LOG_AT_2: f64 = -1.8484799229040035;
    const GMM_LOG_AT_10: f64 = -19.612085214847506;
    const PRIOR_LOG_AT_024: f64 = -6.7606932391050868;
    const HALF_LOG_2PI: f64 = 0.9189385332046727;

    fn paper_params() -> GmmParams {
        GmmParams::default()
    }

    /// Independent linear-domain evaluation of the three-term mixture sum.
    fn naive_gmm_log_density(y: f64, x: [f64; 3], params: &GmmParams) -> f64 {
        let coeffs = [params.coeff1(), params.coeff2(), params.coeff3()];
        let var = params.variance();
        let norm = 1.0 / (2.0 * PI * var).sqrt();
        let total: f64 = coeffs
            .iter()
            .zip(x)
            .map(|(c, m)| c * norm * (-(y - m) * (y - m) / (2.0 * var)).exp())
            .sum();
        total.ln()
    }

    #[test]
    fn gmm_params_invariants_enforced() {
        assert!(GmmParams::new([0.0, 2.0, 4.0], 0.2, 0.3, 1.0).is_ok());
        assert!(GmmParams::new([0.0, 2.0, 4.0], -0.1, 0.3, 1.0).is_err());
        assert!(GmmParams::new([0.0, 2.0, 4.0], 0.8, 0.5, 1.0).is_err());
        assert!(GmmParams::new([0.0, 2.0, 4.0], 0.2, 0.3, 0.0).is_err());
        assert!(GmmParams::new([0.0, f64::NAN, 4.0], 0.2, 0.3, 1.0).is_err());
    }

    #[test]
    fn gmm_log_density_collapsed_mixture_is_single_gaussian() {
        let params = GmmParams::new([0.0; 3], 0.2, 0.3, 1.0).unwrap();
        let got = gmm_log_density(0.0, &StateSample::new([0.0; 3]), &params);
        assert!((got - (-HALF_LOG_2PI)).abs() < 1e-14);
    }

    #[test]
    fn gmm_log_density_matches_frozen_oracle() {
        let params = paper_params();
        let x = StateSample::new([0.0, 2.0, 4.0]);
        assert!((gmm_log_density(0.0, &x, &params) - GMM_LOG_AT_0).abs() < 1e-13);
        assert!((gmm_log_density(2.0, &x, &params) - GMM_LOG_AT_2).abs() < 1e-13);
        let at_10 = gmm_log_density(10.0, &x, &params);
        assert!((at_10 - GMM_LOG_AT_10).abs() < 1e-12);
        // A point among the modes must outscore a tail point.
        assert!(gmm_log_density(2.0, &x, &params) > at_10);
    }

    #[test]
    fn gmm_log_density_agrees_with_naive_when_no_underflow() {
        let params = paper_params();
        let x = [0.0, 2.0, 4.0];
        for i in 0..200 {
            let y = -10.0 + 0.1 * i as f64;
            let naive = naive_gmm_log_density(y, x, &params);
            let lse = gmm_log_density(y, &StateSample::new(x), &params);
            assert!(
                (lse - naive).abs() <= 1e-12 * naive.abs(),
                "mismatch at y={y}: {lse} vs {naive}"
            );
        }
    }

    #[test]
    fn gmm_log_density_finite_where_naive_underflows() {
        let params = paper_params();
        let x = StateSample::new([0.0, 2.0, 4.0]);
        let far = gmm_log_density(1.0e4, &x, &params);
        assert!(far.is_finite());
        // Naive evaluation underflows to ln(0) here.
        assert_eq!(naive_gmm_log_density(1.0e4, [0.0, 2.0, 4.0], &params), f64::NEG_INFINITY);
    }

    #[test]
    fn gmm_log_density_handles_zero_coefficients() {
        // alpha = (1, 0): only the first component matters, even where the
        // dead components would dominate a max taken over raw exponents.
        let params = GmmParams::new([0.0, 100.0, 0.0], 1.0, 0.0, 1.0).unwrap();
        let got = gmm_log_density(100.0, &StateSample::new([0.0, 100.0, 0.0]), &params);
        let expected = -HALF_LOG_2PI - 100.0 * 100.0 / 2.0;
        assert!(
            (got - expected).abs() <= 1e-12 * expected.abs(),
            "{got} vs {expected}"
        );
    }

    #[test]
    fn gmm_density_integrates_to_one() {
        // Simpson's rule over y in [-20, 30] at the default parameters.
        let params = paper_params();
        let x = [0.0, 2.0, 4.0];
        let n = 50_000usize; // even
        let (a, b) = (-20.0, 30.0);
        let h = (b - a) / n as f64;
        let density = GmmLogDensity::new(&params);
        let mut acc = CompensatedSum::new();
        for i in 0..=n {
            let y = a + h * i as f64;
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc.add(w * density.log_density(y, &x).exp());
        }
        let integral = acc.value() * h / 3.0;
        assert!((integral - 1.0).abs() < 1e-6, "integral = {integral}");
    }

    #[test]
    fn prior_log_density_at_mean() {
        let prior = GaussianPrior::default();
        let got = prior_log_density(&StateSample::new([1.0; 3]), &prior);
        let expected = 3.0 * (-0.5 * (2.0 * PI * 10.0).ln());
        assert!((got - expected).abs() < 1e-14);
    }

    #[test]
    fn prior_log_density_one_sigma_shift_costs_half() {
        let prior = GaussianPrior::default();
        let at_mean = prior_log_density(&StateSample::new([1.0; 3]), &prior);
        let shifted = StateSample::new([1.0, 1.0, 1.0 + 10.0f64.sqrt()]);
        let got = prior_log_density(&shifted, &prior);
        assert!((got - (at_mean - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn prior_log_density_matches_frozen_oracle() {
        let prior = GaussianPrior::default();
        let got = prior_log_density(&StateSample::new([0.0, 2.0, 4.0]), &prior);
        assert!((got - PRIOR_LOG_AT_024).abs() < 1e-13);
    }

    #[test]
    fn prior_log_density_separates_across_dimensions() {
        // Equals the sum of three scalar Gaussian log-densities.
        let prior = GaussianPrior::new([1.0, -2.0, 0.5], 3.5).unwrap();
        let x = [0.3, -1.1, 2.2];
        let scalar = |v: f64, m: f64| -0.5 * (2.0 * PI * 3.5).ln() - (v - m) * (v - m) / (2.0 * 3.5);
        let expected: f64 = x.iter().zip(prior.mean()).map(|(v, m)| scalar(*v, m)).sum();
        let got = prior_log_density(&StateSample::new(x), &prior);
        assert!((got - expected).abs() < 1e-14);
    }

    #[test]
    fn sample_prior_is_deterministic() {
        let prior = GaussianPrior::default();
        let mut a = derive_stream(7, 0, 0, StreamRole::Sampling);
        let mut b = derive_stream(7, 0, 0, StreamRole::Sampling);
        let xs = sample_prior(&prior, 100, &mut a).unwrap();
        let ys = sample_prior(&prior, 100, &mut b).unwrap();
        assert_eq!(xs, ys);
    }

    #[test]
    fn sample_prior_moments() {
        let prior = GaussianPrior::default();
        let mut rng = derive_stream(42, 0, 0, StreamRole::Sampling);
        let n = 100_000usize;
        let xs = sample_prior(&prior, n, &mut rng).unwrap();
        for d in 0..3 {
            let mean: f64 = xs.iter().map(|s| s.components()[d]).sum::<f64>() / n as f64;
            let bound = 3.0 * (10.0 / n as f64).sqrt();
            assert!((mean - 1.0).abs() < bound, "dim {d}: mean {mean}");
            let var: f64 =
                xs.iter().map(|s| (s.components()[d] - mean).powi(2)).sum::<f64>() / n as f64;
            assert!((var - 10.0).abs() < 0.05 * 10.0, "dim {d}: var {var}");
        }
    }

    #[test]
    fn sample_prior_rejects_zero_count() {
        let prior = GaussianPrior::default();
        let mut rng = derive_stream(7, 0, 0, StreamRole::Sampling);
        assert!(sample_prior(&prior, 0, &mut rng).is_err());
    }

    #[test]
    fn sample_observations_degenerate_mixture() {
        let params = GmmParams::new([5.0, 0.0, 0.0], 1.0, 0.0, 1.0).unwrap();
        let mut rng = derive_stream(3, 0, 0, StreamRole::Observations);
        let n = 100_000usize;
        let obs = sample_observations(&params, n, &mut rng).unwrap();
        let mean: f64 = obs.values().iter().sum::<f64>() / n as f64;
        assert!((mean - 5.0).abs() < 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn sample_observations_mixture_mean() {
        let params = paper_params();
        let mut rng = derive_stream(11, 0, 0, StreamRole::Observations);
        let n = 100_000usize;
        let obs = sample_observations(&params, n, &mut rng).unwrap();
        let mean: f64 = obs.values().iter().sum::<f64>() / n as f64;
        assert!((mean - 2.6).abs() < 0.02 * 2.6, "mean {mean}");
    }

    #[test]
    fn sample_observations_is_deterministic() {
        let params = paper_params();
        let mut a = derive_stream(9, 4, 0, StreamRole::Observations);
        let mut b = derive_stream(9, 4, 0, StreamRole::Observations);
        let oa = sample_observations(&params, 1000, &mut a).unwrap();
        let ob = sample_observations(&params, 1000, &mut b).unwrap();
        assert_eq!(oa, ob);
    }

    #[test]
    fn sample_observations_component_frequencies() {
        // Tiny component variance separates the components so draws can be
        // classified by nearest mean; frequencies must sit in a 4-SE band.
        let params = GmmParams::new([0.0, 100.0, 200.0], 0.2, 0.3, 1e-6).unwrap();
        let mut rng = derive_stream(123, 0, 0, StreamRole::Observations);
        let n = 100_000usize;
        let obs = sample_observations(&params, n, &mut rng).unwrap();
        let mut counts = [0usize; 3];
        for &y in obs.values() {
            let k = [0.0f64, 100.0, 200.0]
                .iter()
                .enumerate()
                .min_by(|a, b| (y - a.1).abs().total_cmp(&(y - b.1).abs()))
                .unwrap()
                .0;
            counts[k] += 1;
        }
        for (k, alpha) in [0.2, 0.3, 0.5].iter().enumerate() {
            let freq = counts[k] as f64 / n as f64;
            let se = (alpha * (1.0 - alpha) / n as f64).sqrt();
            assert!(
                (freq - alpha).abs() < 4.0 * se,
                "component {k}: freq {freq}, alpha {alpha}"
            );
        }
    }

    #[test]
    fn observation_set_rejects_bad_input() {
        assert!(matches!(ObservationSet::new(vec![]), Err(Error::EmptyObservations)));
        assert!(ObservationSet::new(vec![1.0, f64::INFINITY]).is_err());
        assert!(ObservationSet::new(vec![0.5]).is_ok());
    }
}
