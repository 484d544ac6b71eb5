//! Point estimates and degeneracy diagnostics over a weighted particle set.

use std::fmt;

use crate::numeric::CompensatedSum;
use crate::weights::ParticleSet;

/// Which weighting scheme produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Standard importance sampling.
    Is,
    /// Nonlinear importance sampling (clipped weights).
    Nis,
}

impl Method {
    /// Canonical name used in CSV output.
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Is => "IS",
            Method::Nis => "NIS",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One posterior-mean estimate plus its degeneracy diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialEstimate {
    /// Weighted posterior-mean estimate of the three component means.
    pub posterior_mean: [f64; 3],
    /// Largest normalized weight in the particle set.
    pub max_weight: f64,
    /// Effective sample size, in `[1, M]`.
    pub ess: f64,
    /// Producing scheme.
    pub method: Method,
    /// Clip count `M_T` used; `None` for plain IS.
    pub clip_count: Option<usize>,
}

impl TrialEstimate {
    /// Reads the estimate and diagnostics off a normalized particle set.
    pub fn from_particles(ps: &ParticleSet, method: Method, clip_count: Option<usize>) -> Self {
        Self {
            posterior_mean: ps.posterior_mean(),
            max_weight: ps.max_weight(),
            ess: ps.effective_sample_size(),
            method,
            clip_count,
        }
    }
}

impl ParticleSet {
    /// Weighted expectation of `f` under the particle approximation:
    /// the weight-weighted sum of `f` over the samples.
    ///
    /// Accumulation is compensated so the result stays exact to ~1e-15
    /// relative even for particle counts beyond 10^4.
    pub fn expectation<const K: usize>(&self, f: impl Fn(&[f64; 3]) -> [f64; K]) -> [f64; K] {
        let mut acc = [CompensatedSum::new(); K];
        for (sample, &w) in self.samples().iter().zip(self.weights().values()) {
            let v = f(&sample.components());
            for k in 0..K {
                acc[k].add(w * v[k]);
            }
        }
        std::array::from_fn(|k| acc[k].value())
    }

    /// Posterior-mean estimate: the expectation of the identity.
    pub fn posterior_mean(&self) -> [f64; 3] {
        self.expectation(|x| *x)
    }

    /// Largest normalized weight; 1/M for uniform weights, 1 for a one-hot
    /// set. The standard degeneracy read-out.
    pub fn max_weight(&self) -> f64 {
        self.weights().values().iter().fold(0.0f64, |a, &b| a.max(b))
    }

    /// Effective sample size `1 / sum_i w_i^2`, between 1 and M.
    pub fn effective_sample_size(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        for &w in self.weights().values() {
            acc.add(w * w);
        }
        1.0 / acc.value()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Result;
    use crate::model::StateSample;
    use crate::weights::{LogWeights, NormalizedWeights};
    use proptest::prelude::*;

    fn particles(samples: Vec<[f64; 3]>, weights: Vec<f64>) -> Result<ParticleSet> {
        let log_w = LogWeights::new(weights.iter().map(|w| w.ln()).collect())?;
        let norm = NormalizedWeights::new(weights)?;
        ParticleSet::from_parts(samples.into_iter().map(StateSample::new).collect(), log_w, norm)
    }

    #[test]
    fn expectation_of_constant_is_one() {
        let ps = particles(vec![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]], vec![0.3, 0.7]).unwrap();
        let one = ps.expectation(|_| [1.0]);
        assert!((one[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn point_mass_returns_that_sample() {
        let ps = particles(vec![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]], vec![1.0, 0.0]).unwrap();
        assert_eq!(ps.posterior_mean(), [1.0, 2.0, 3.0]);
    }

    #[test]
    fn three_sample_expectation_matches_dot_product() {
        let samples = vec![[0.5, -1.0, 2.0], [1.5, 0.25, -0.75], [3.0, 1.0, 0.0]];
        let weights = [0.2, 0.3, 0.5];
        let ps = particles(samples.clone(), weights.to_vec()).unwrap();
        let got = ps.posterior_mean();
        for d in 0..3 {
            let want: f64 = samples.iter().zip(weights).map(|(s, w)| w * s[d]).sum();
            assert!((got[d] - want).abs() < 1e-14);
        }
    }

    #[test]
    fn uniform_weights_give_arithmetic_mean() {
        let samples = vec![[0.0, 0.0, 0.0], [2.0, 4.0, 6.0]];
        let ps = particles(samples, vec![0.5, 0.5]).unwrap();
        assert_eq!(ps.posterior_mean(), [1.0, 2.0, 3.0]);
    }

    #[test]
    fn convex_combination_example() {
        let ps =
            particles(vec![[0.0; 3], [2.0; 3]], vec![0.25, 0.75]).unwrap();
        assert_eq!(ps.posterior_mean(), [1.5, 1.5, 1.5]);
    }

    #[test]
    fn max_weight_examples() {
        let m = 100;
        let uniform = particles(vec![[0.0; 3]; m], vec![1.0 / m as f64; m]).unwrap();
        assert!((uniform.max_weight() - 0.01).abs() < 1e-15);
        let mut one_hot = vec![0.0; 4];
        one_hot[2] = 1.0;
        let hot = particles(vec![[0.0; 3]; 4], one_hot).unwrap();
        assert_eq!(hot.max_weight(), 1.0);
    }

    #[test]
    fn ess_examples() {
        let m = 10;
        let uniform = particles(vec![[0.0; 3]; m], vec![1.0 / m as f64; m]).unwrap();
        assert!((uniform.effective_sample_size() - m as f64).abs() < 1e-12);
        let mut one_hot = vec![0.0; 5];
        one_hot[0] = 1.0;
        let hot = particles(vec![[0.0; 3]; 5], one_hot).unwrap();
        assert!((hot.effective_sample_size() - 1.0).abs() < 1e-15);
        let skew = particles(vec![[0.0; 3]; 3], vec![0.5, 0.25, 0.25]).unwrap();
        assert!((skew.effective_sample_size() - 8.0 / 3.0).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn prop_expectation_is_linear(
            raw in proptest::collection::vec((any::<bool>(), -10.0f64..10.0), 2..50),
            a in -3.0f64..3.0,
            b in -3.0f64..3.0
        ) {
            let n = raw.len();
            let samples: Vec<[f64; 3]> =
                raw.iter().map(|(_, v)| [*v, v * 0.5, v - 1.0]).collect();
            let raw_w: Vec<f64> = raw.iter().map(|(hot, _)| if *hot { 2.0 } else { 1.0 }).collect();
            let total: f64 = raw_w.iter().sum();
            let weights: Vec<f64> = raw_w.iter().map(|w| w / total).collect();
            let ps = particles(samples, weights).unwrap();

            let f = |x: &[f64; 3]| [x[0] + x[2]];
            let g = |x: &[f64; 3]| [x[1] * x[1]];
            let combined = ps.expectation(|x| [a * f(x)[0] + b * g(x)[0]]);
            let separate = a * ps.expectation(f)[0] + b * ps.expectation(g)[0];
            prop_assert!((combined[0] - separate).abs() < 1e-12);
            let _ = n;
        }

        #[test]
        fn prop_mean_in_convex_hull_and_diagnostics_bounded(
            raw in proptest::collection::vec(0.01f64..1.0, 2..60)
        ) {
            let m = raw.len();
            let total: f64 = raw.iter().sum();
            let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
            let samples: Vec<[f64; 3]> = (0..m)
                .map(|i| [i as f64, (i as f64).sin(), -(i as f64)])
                .collect();
            let ps = particles(samples.clone(), weights).unwrap();
            let mean = ps.posterior_mean();
            for d in 0..3 {
                let lo = samples.iter().map(|s| s[d]).fold(f64::INFINITY, f64::min);
                let hi = samples.iter().map(|s| s[d]).fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(mean[d] >= lo - 1e-12 && mean[d] <= hi + 1e-12);
            }
            let ess = ps.effective_sample_size();
            prop_assert!(ess >= 1.0 - 1e-12 && ess <= m as f64 + 1e-9);
            prop_assert!(ps.max_weight() >= 1.0 / m as f64 - 1e-15);
        }

        #[test]
        fn prop_ess_equals_m_iff_uniform(m in 2usize..40) {
            let uniform = particles(vec![[0.0; 3]; m], vec![1.0 / m as f64; m]).unwrap();
            prop_assert!((uniform.effective_sample_size() - m as f64).abs() < 1e-9);
            // Any detectable skew pulls the ESS strictly below M.
            let mut skew = vec![1.0; m];
            skew[0] = 2.0;
            let total: f64 = skew.iter().sum();
            let skewed =
                particles(vec![[0.0; 3]; m], skew.into_iter().map(|w| w / total).collect())
                    .unwrap();
            prop_assert!(skewed.effective_sample_size() < m as f64 - 1e-6);
        }
    }
}
