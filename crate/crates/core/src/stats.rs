//! Small statistics helpers shared by the verification suites and tests.

use statrs::function::gamma::gamma_ur;

/// Result of a Pearson goodness-of-fit test.
#[derive(Clone, Copy, Debug)]
pub struct ChiSquaredTest {
    pub statistic: f64,
    pub degrees_of_freedom: u64,
    pub p_value: f64,
}

impl ChiSquaredTest {
    pub fn rejects_at(&self, significance: f64) -> bool {
        self.p_value < significance
    }
}

/// Pearson chi-squared statistic of observed counts against expected counts.
///
/// Bins with zero expectation must have zero observations (the caller is
/// comparing against an exact model, so anything else is a hard failure);
/// they contribute no degrees of freedom.
pub fn chi_squared_gof(observed: &[u64], expected: &[f64]) -> ChiSquaredTest {
    assert_eq!(observed.len(), expected.len(), "bin count mismatch");
    let mut statistic = 0.0;
    let mut bins = 0u64;
    for (&o, &e) in observed.iter().zip(expected) {
        if e <= 0.0 {
            assert_eq!(o, 0, "observation in a zero-probability bin");
            continue;
        }
        let diff = o as f64 - e;
        statistic += diff * diff / e;
        bins += 1;
    }
    assert!(bins >= 2, "need at least two bins");
    let degrees_of_freedom = bins - 1;
    let p_value = gamma_ur(degrees_of_freedom as f64 / 2.0, statistic / 2.0);
    ChiSquaredTest {
        statistic,
        degrees_of_freedom,
        p_value,
    }
}

/// Chi-squared test of counts against a uniform distribution.
pub fn chi_squared_uniform(observed: &[u64]) -> ChiSquaredTest {
    let total: u64 = observed.iter().sum();
    let expected = vec![total as f64 / observed.len() as f64; observed.len()];
    chi_squared_gof(observed, &expected)
}

/// Sample mean and unbiased sample variance.
pub fn mean_and_variance(samples: &[f64]) -> (f64, f64) {
    assert!(!samples.is_empty());
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, ss / (n - 1.0))
}
