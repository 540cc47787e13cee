//! Empirical statistics for the Monte Carlo harness: two-sample and
//! one-sample Kolmogorov-Smirnov distances, total variation on finite
//! supports, and a chi-square goodness-of-fit statistic.

use crate::error::{Error, Result};

/// A sorted sample of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSample {
    sorted: Vec<f64>,
}

impl EmpiricalSample {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        values.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in samples"));
        Ok(Self { sorted: values })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    /// Right-continuous empirical CDF.
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.sorted.partition_point(|&v| v <= x);
        k as f64 / self.sorted.len() as f64
    }
}

/// `sup |F_a - F_b|` over the merged support.
pub fn ks_two_sample(a: &EmpiricalSample, b: &EmpiricalSample) -> f64 {
    let (xs, ys) = (a.values(), b.values());
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut sup: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let x = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= x {
            i += 1;
        }
        while j < ys.len() && ys[j] <= x {
            j += 1;
        }
        sup = sup.max((i as f64 / na - j as f64 / nb).abs());
    }
    sup
}

/// One-sample Kolmogorov-Smirnov statistic against an analytic CDF.
pub fn ks_statistic_vs_cdf<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in samples"));
    let n = xs.len() as f64;
    let mut sup: f64 = 0.0;
    for (k, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        sup = sup.max((f - k as f64 / n).abs());
        sup = sup.max(((k + 1) as f64 / n - f).abs());
    }
    sup
}

/// Total variation distance `0.5 * sum |a_i - b_i|` between two pmfs on the
/// same support index set.
pub fn tv_finite(pmf_a: &[f64], pmf_b: &[f64]) -> Result<f64> {
    if pmf_a.len() != pmf_b.len() {
        return Err(Error::SupportMismatch(pmf_a.len(), pmf_b.len()));
    }
    Ok(0.5
        * pmf_a
            .iter()
            .zip(pmf_b)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>())
}

/// Chi-square goodness-of-fit statistic for observed counts against
/// expected cell probabilities.
pub fn chi_square_stat(observed: &[u64], expected_probs: &[f64]) -> Result<f64> {
    if observed.len() != expected_probs.len() {
        return Err(Error::SupportMismatch(observed.len(), expected_probs.len()));
    }
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return Err(Error::EmptySample);
    }
    Ok(observed
        .iter()
        .zip(expected_probs)
        .map(|(&o, &p)| {
            let e = p * total as f64;
            (o as f64 - e) * (o as f64 - e) / e
        })
        .sum())
}
