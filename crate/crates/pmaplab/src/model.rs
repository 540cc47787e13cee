//! Probability vectors, theta sequences, the hub-family constructor, and
//! regime diagnostics.
//!
//! A ranked probability `p` on `[n]` drives every discrete law in the crate.
//! The hub family realizes, at every finite `n`, the asymptotic regime in
//! which `p_i / sigma(p)` equals a prescribed `theta_i` exactly for the first
//! `I` atoms while the tail stays uniform.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::neumaier_sum;

/// Tolerance for "sums to one" checks on probability vectors.
pub const PROB_SUM_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// RankedProb
// ---------------------------------------------------------------------------

/// A ranked probability vector: positive, non-increasing, summing to 1.
///
/// Vectors are renormalized once on construction and never silently
/// afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedProb {
    values: Vec<f64>,
}

impl RankedProb {
    /// Validate and renormalize a ranked vector.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidProbability("empty vector".into()));
        }
        for w in values.windows(2) {
            if w[0] < w[1] {
                return Err(Error::InvalidProbability(format!(
                    "not non-increasing: {} < {}",
                    w[0], w[1]
                )));
            }
        }
        if *values.last().unwrap() <= 0.0 {
            return Err(Error::InvalidProbability("entries must be positive".into()));
        }
        let total = neumaier_sum(&values);
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidProbability(format!("bad total {total}")));
        }
        let values: Vec<f64> = if (total - 1.0).abs() <= PROB_SUM_TOL {
            values
        } else {
            values.iter().map(|v| v / total).collect()
        };
        Ok(Self { values })
    }

    /// The uniform distribution on `[n]`.
    pub fn uniform(n: usize) -> Self {
        assert!(n > 0);
        Self {
            values: vec![1.0 / n as f64; n],
        }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mass of the 1-based atom `i`.
    pub fn mass(&self, i: usize) -> f64 {
        self.values[i - 1]
    }

    /// `sigma(p) = (sum_i p_i^2)^(1/2)`, the scale parameter of the regime.
    pub fn sigma(&self) -> f64 {
        euclidean_norm(&self.values)
    }

    /// Total mass of a set of 1-based atoms.
    pub fn mass_of(&self, atoms: &[usize]) -> f64 {
        atoms.iter().map(|&i| self.values[i - 1]).sum()
    }

    /// A reusable sampler over the atoms `1..=n`.
    pub fn sampler(&self) -> CdfSampler {
        CdfSampler::new(&self.values)
    }
}

/// Euclidean norm of an arbitrary (not necessarily normalized) vector.
pub fn euclidean_norm(xs: &[f64]) -> f64 {
    xs.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `sigma(p)` as a free function, for call sites that read like the formula.
pub fn sigma(p: &RankedProb) -> f64 {
    p.sigma()
}

/// Inverse-CDF sampler with binary search; returns 1-based atoms.
#[derive(Debug, Clone)]
pub struct CdfSampler {
    cum: Vec<f64>,
}

impl CdfSampler {
    pub fn new(weights: &[f64]) -> Self {
        let mut cum = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for &w in weights {
            acc += w;
            cum.push(acc);
        }
        let total = *cum.last().expect("non-empty weights");
        for c in &mut cum {
            *c /= total;
        }
        Self { cum }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let v: f64 = rng.random();
        match self.cum.binary_search_by(|c| c.partial_cmp(&v).unwrap()) {
            Ok(k) => k + 2, // v == cum[k]: the step to its right
            Err(k) => k + 1,
        }
        .min(self.cum.len())
    }
}

// ---------------------------------------------------------------------------
// ThetaVector
// ---------------------------------------------------------------------------

/// A finite-length theta sequence with `theta_0 = sqrt(1 - sum theta_i^2) > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ThetaVector {
    thetas: Vec<f64>,
    theta0: f64,
}

impl ThetaVector {
    pub fn new(thetas: Vec<f64>) -> Result<Self> {
        if thetas.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidTheta("entries must be finite".into()));
        }
        for w in thetas.windows(2) {
            if w[0] < w[1] {
                return Err(Error::InvalidTheta(format!(
                    "not non-increasing: {} < {}",
                    w[0], w[1]
                )));
            }
        }
        if let Some(&last) = thetas.last() {
            if last <= 0.0 {
                return Err(Error::InvalidTheta("entries must be positive".into()));
            }
        }
        let sq: f64 = thetas.iter().map(|t| t * t).sum();
        if sq >= 1.0 {
            return Err(Error::InvalidTheta(format!(
                "sum of squares {sq} must be < 1"
            )));
        }
        Ok(Self {
            thetas,
            theta0: (1.0 - sq).sqrt(),
        })
    }

    /// The Brownian case: no hubs, `theta_0 = 1`.
    pub fn brownian() -> Self {
        Self {
            thetas: Vec::new(),
            theta0: 1.0,
        }
    }

    /// Number of hubs `I`.
    pub fn hub_count(&self) -> usize {
        self.thetas.len()
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }
}

impl TryFrom<Vec<f64>> for ThetaVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ThetaVector> for Vec<f64> {
    fn from(t: ThetaVector) -> Vec<f64> {
        t.thetas
    }
}

// ---------------------------------------------------------------------------
// FamilySpec and the hub family
// ---------------------------------------------------------------------------

/// Tail shape for the hub family. Uniform is the unique closed form that
/// makes `p_i / sigma(p) = theta_i` exact at every `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailShape {
    #[default]
    Uniform,
}

/// Parameters of the finite-`n` member of the sequence `p_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub theta: ThetaVector,
    pub n: usize,
    #[serde(default)]
    pub tail: TailShape,
}

impl FamilySpec {
    pub fn new(theta: ThetaVector, n: usize) -> Self {
        Self {
            theta,
            n,
            tail: TailShape::Uniform,
        }
    }
}

/// Build the hub family: `p_i = theta_i * s` for `i <= I` and a uniform tail,
/// with `s = 1 / (theta_0 * sqrt(n - I) + sum_i theta_i)`.
///
/// By construction `sigma(p) = s`, so `p_i / sigma(p) = theta_i` exactly.
pub fn make_hub_family(spec: &FamilySpec) -> Result<RankedProb> {
    let hubs = spec.theta.hub_count();
    let n = spec.n;
    if n <= hubs {
        return Err(Error::DegenerateTail { n, hubs });
    }
    let tail_count = n - hubs;
    let root = (tail_count as f64).sqrt();
    let theta_sum: f64 = spec.theta.thetas().iter().sum();
    let s = 1.0 / (spec.theta.theta0() * root + theta_sum);
    let tail_value = s * spec.theta.theta0() / root;
    if let Some(&last) = spec.theta.thetas().last() {
        if last * s < tail_value {
            return Err(Error::NotRanked {
                hub: last * s,
                tail: tail_value,
            });
        }
    }
    let mut values = Vec::with_capacity(n);
    values.extend(spec.theta.thetas().iter().map(|t| t * s));
    values.extend(std::iter::repeat_n(tail_value, tail_count));
    RankedProb::new(values)
}

// ---------------------------------------------------------------------------
// Regime diagnostics
// ---------------------------------------------------------------------------

/// Numeric report on how close a finite `p` sits to the limit regime.
///
/// `log_min_scale` is `sigma(p) * log(1 / min_i p_i)`; small values indicate
/// that no atom is exponentially small on the scale `sigma`. `tail_mgf` holds
/// Monte Carlo estimates of `E[exp(lambda * pbar_xi / sigma^2)]` where `xi ~ p`
/// and `pbar` zeroes the first `I` entries.
#[derive(Debug, Clone, Serialize)]
pub struct RegimeDiagnostics {
    pub sigma: f64,
    pub hub_ratios: Vec<f64>,
    pub max_p: f64,
    pub min_p: f64,
    pub log_min_scale: f64,
    pub tail_mgf: Vec<(f64, f64)>,
}

/// Default lambda grid for the tail moment-generating diagnostic.
pub const MGF_LAMBDAS: [f64; 4] = [-1.0, -0.5, 0.5, 1.0];

pub fn regime_diagnostics<R: Rng>(
    p: &RankedProb,
    hubs: usize,
    mc_samples: usize,
    rng: &mut R,
) -> RegimeDiagnostics {
    assert!(hubs <= p.n());
    let sigma = p.sigma();
    let values = p.values();
    let hub_ratios = values[..hubs].iter().map(|v| v / sigma).collect();
    let max_p = values[0];
    let min_p = *values.last().unwrap();
    let sampler = p.sampler();
    let sig2 = sigma * sigma;
    let tail_mgf = MGF_LAMBDAS
        .iter()
        .map(|&lambda| {
            let mut acc = 0.0;
            for _ in 0..mc_samples {
                let xi = sampler.sample(rng);
                let pbar = if xi > hubs { values[xi - 1] } else { 0.0 };
                acc += (lambda * pbar / sig2).exp();
            }
            (lambda, acc / mc_samples as f64)
        })
        .collect();
    RegimeDiagnostics {
        sigma,
        hub_ratios,
        max_p,
        min_p,
        log_min_scale: sigma * (1.0 / min_p).ln(),
        tail_mgf,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use proptest::prelude::*;

    #[test]
    fn sigma_direct_values() {
        let p = RankedProb::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(p.sigma(), std::f64::consts::FRAC_1_SQRT_2); // 0.7071067811865476
        let p = RankedProb::new(vec![1.0]).unwrap();
        assert_eq!(p.sigma(), 1.0);
        let p = RankedProb::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        assert!((p.sigma() - 0.5477225575051661).abs() < 1e-15);
    }

    #[test]
    fn ranked_validation() {
        assert!(RankedProb::new(vec![0.3, 0.7]).is_err());
        assert!(RankedProb::new(vec![0.5, 0.5, 0.0]).is_err());
        assert!(RankedProb::new(vec![]).is_err());
        // Renormalized once on construction.
        let p = RankedProb::new(vec![2.0, 1.0, 1.0]).unwrap();
        assert!((neumaier_sum(p.values()) - 1.0).abs() <= PROB_SUM_TOL);
    }

    #[test]
    fn hub_family_closed_form() {
        let spec = FamilySpec::new(ThetaVector::new(vec![0.5]).unwrap(), 101);
        let p = make_hub_family(&spec).unwrap();
        let s = p.sigma();
        assert!((s - 0.1091668).abs() < 1e-6);
        assert!((p.mass(1) - 0.0545834).abs() < 1e-6);
        assert!((p.mass(2) - 0.0094541).abs() < 1e-6);
        // Constructor identities, at full precision.
        assert!((p.mass(1) / s - 0.5).abs() < 1e-12);
        assert!((neumaier_sum(p.values()) - 1.0).abs() <= PROB_SUM_TOL);
    }

    #[test]
    fn hub_family_no_hubs_is_uniform() {
        let spec = FamilySpec::new(ThetaVector::brownian(), 4);
        let p = make_hub_family(&spec).unwrap();
        for &v in p.values() {
            assert!((v - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn hub_family_small_n_checked_by_ranking_predicate() {
        let spec = FamilySpec::new(ThetaVector::new(vec![0.9]).unwrap(), 2);
        // theta_1 = 0.9 >= theta_0 / sqrt(1), so this one is valid.
        let p = make_hub_family(&spec).unwrap();
        assert!(p.mass(1) >= p.mass(2));
        // A flat theta close to the constraint boundary fails ranking.
        let spec = FamilySpec::new(ThetaVector::new(vec![0.1]).unwrap(), 3);
        assert!(matches!(
            make_hub_family(&spec),
            Err(Error::NotRanked { .. })
        ));
    }

    #[test]
    fn hub_family_max_p_decreases_as_n_doubles() {
        let theta = ThetaVector::new(vec![0.5]).unwrap();
        let mut prev = f64::INFINITY;
        for n in [50, 100, 200, 400, 800] {
            let p = make_hub_family(&FamilySpec::new(theta.clone(), n)).unwrap();
            let max = p.values()[0];
            assert!(max < prev);
            prev = max;
        }
    }

    #[test]
    fn diagnostics_uniform_and_two_atom() {
        let mut rng = RngStream::new(3, 0);
        let d = regime_diagnostics(&RankedProb::uniform(4), 0, 100, &mut rng);
        assert_eq!(d.sigma, 0.5);
        assert_eq!(d.max_p, 0.25);
        assert_eq!(d.min_p, 0.25);

        let p = RankedProb::new(vec![0.7, 0.3]).unwrap();
        let d = regime_diagnostics(&p, 1, 100, &mut rng);
        assert!((d.sigma - 0.76158).abs() < 1e-5);
        assert!((d.hub_ratios[0] - 0.91915).abs() < 1e-5);
    }

    #[test]
    fn diagnostics_hub_ratio_exact() {
        let spec = FamilySpec::new(ThetaVector::new(vec![0.5]).unwrap(), 101);
        let p = make_hub_family(&spec).unwrap();
        let mut rng = RngStream::new(3, 1);
        let d = regime_diagnostics(&p, 1, 10, &mut rng);
        assert!((d.hub_ratios[0] - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn theta_validation() {
        assert!(ThetaVector::new(vec![0.5, 0.6]).is_err());
        assert!(ThetaVector::new(vec![1.0]).is_err());
        assert!(ThetaVector::new(vec![0.8, 0.6]).is_err()); // sum of squares = 1
        assert!(ThetaVector::new(vec![f64::NAN]).is_err());
        assert!(ThetaVector::new(vec![-0.2]).is_err());
        let t = ThetaVector::new(vec![0.6]).unwrap();
        assert!((t.theta0() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn family_spec_json_round_trip() {
        let spec = FamilySpec::new(ThetaVector::new(vec![0.5, 0.25]).unwrap(), 64);
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, r#"{"theta":[0.5,0.25],"n":64,"tail":"uniform"}"#);
        let back: FamilySpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        let from_plain: FamilySpec =
            serde_json::from_str(r#"{"theta":[0.5,0.25],"n":64}"#).unwrap();
        assert_eq!(from_plain, spec);
    }

    #[test]
    fn cdf_sampler_hits_every_atom() {
        let p = RankedProb::new(vec![0.5, 0.3, 0.2]).unwrap();
        let sampler = p.sampler();
        let mut rng = RngStream::new(11, 0);
        let mut counts = [0usize; 3];
        for _ in 0..30_000 {
            counts[sampler.sample(&mut rng) - 1] += 1;
        }
        for (k, &c) in counts.iter().enumerate() {
            let expect = p.values()[k] * 30_000.0;
            assert!((c as f64 - expect).abs() < 5.0 * expect.sqrt());
        }
    }

    proptest! {
        #[test]
        fn sigma_permutation_invariant_and_homogeneous(
            xs in proptest::collection::vec(0.01f64..10.0, 1..20),
            scale in 0.01f64..100.0,
        ) {
            let mut shuffled = xs.clone();
            shuffled.reverse();
            prop_assert!((euclidean_norm(&xs) - euclidean_norm(&shuffled)).abs() < 1e-12);
            let scaled: Vec<f64> = xs.iter().map(|x| x * scale).collect();
            prop_assert!(
                (euclidean_norm(&scaled) - scale * euclidean_norm(&xs)).abs()
                    <= 1e-12 * scale * euclidean_norm(&xs).max(1.0)
            );
        }

        #[test]
        fn hub_family_identities(
            theta1 in 0.3f64..0.9,
            n in 10usize..500,
        ) {
            let theta = ThetaVector::new(vec![theta1]).unwrap();
            if let Ok(p) = make_hub_family(&FamilySpec::new(theta, n)) {
                let tail = p.values().last().unwrap();
                let root = ((n - 1) as f64).sqrt();
                let s = 1.0 / ((1.0f64 - theta1 * theta1).sqrt() * root + theta1);
                prop_assert!((p.sigma() - s).abs() <= 1e-12);
                prop_assert!((neumaier_sum(p.values()) - 1.0).abs() <= PROB_SUM_TOL);
                prop_assert!(p.mass(1) >= *tail);
            }
        }
    }
}
