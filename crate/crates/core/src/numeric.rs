//! Small numerical helpers used across the crate.

/// Neumaier-compensated summation accumulator.
///
/// Keeps a running correction term so that long sums (weight normalizations,
/// expectations over 10^4+ particles, per-sample log-likelihood sums) do not
/// lose digits to cancellation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    correction: f64,
}

impl CompensatedSum {
    /// Empty accumulator.
    pub fn new() -> Self {
        Self::default()
    }

    /// Add one term.
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.correction += (self.sum - t) + x;
        } else {
            self.correction += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Current compensated value.
    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.correction
    }
}

/// Compensated sum of an iterator of terms.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// `log(sum_i exp(values_i))` without leaving the log domain.
///
/// Returns `-inf` for an empty slice or when every entry is `-inf`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values.iter().map(|&v| (v - max).exp()).sum();
    max + sum.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancellation() {
        // 1 + 1e-16 repeated: naive summation drops every small term.
        let mut acc = CompensatedSum::new();
        acc.add(1.0);
        for _ in 0..1000 {
            acc.add(1e-16);
        }
        let exact = 1.0 + 1000.0 * 1e-16;
        assert!((acc.value() - exact).abs() < 1e-18);
    }

    #[test]
    fn log_sum_exp_matches_naive_when_safe() {
        let vals = [-1.0, 0.5, 2.0, -3.25];
        let naive: f64 = vals.iter().map(|v: &f64| v.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&vals) - naive).abs() <= 1e-12 * naive.abs());
    }

    #[test]
    fn log_sum_exp_survives_large_negatives() {
        let vals = [-10000.0, -10001.0];
        // exact: -10000 + ln(1 + e^-1)
        let expected = -10000.0 + (1.0 + (-1.0f64).exp()).ln();
        assert!((log_sum_exp(&vals) - expected).abs() < 1e-9);
    }

    #[test]
    fn log_sum_exp_all_neg_inf() {
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY; 3]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }
}
