//! Random testing as a coupon-collector process.
//!
//! Every drawn test case independently hits target `i` (a fault) with fixed
//! probability `p_i`, or no target at all with the remaining miss mass. The
//! module gives the exact expected number of draws needed to detect the
//! first `n` targets, the exact expected number of targets detected after
//! `t` draws, and a seeded Monte Carlo simulation of detection curves.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};

use crate::curves::AggregateCurve;
use crate::{par, Error, Result};

/// Largest `n` for which [`expected_tau_exact`] enumerates all subsets.
pub const EXACT_TAU_LIMIT: usize = 20;

const MASS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TargetDistribution {
    probabilities: Vec<f64>,
    miss_mass: f64,
}

impl TargetDistribution {
    /// Targets with the given hit probabilities; whatever mass is left is
    /// the miss mass.
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::InvalidDistribution("no targets".into()));
        }
        if let Some(i) = probabilities.iter().position(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::InvalidDistribution(format!(
                "target {} has probability {}, expected > 0",
                i + 1,
                probabilities[i]
            )));
        }
        let mass: f64 = probabilities.iter().sum();
        if mass > 1.0 + MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("total mass {mass} exceeds 1")));
        }
        Ok(Self {
            probabilities,
            miss_mass: (1.0 - mass).max(0.0),
        })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn miss_mass(&self) -> f64 {
        self.miss_mass
    }

    pub fn targets(&self) -> usize {
        self.probabilities.len()
    }
}

/// `targets` targets, each hit with probability `theta`.
pub fn uniform_distribution(targets: usize, theta: f64) -> Result<TargetDistribution> {
    geometric_distribution(targets, theta, 1.0)
}

/// Exponentially decreasing probabilities `p_i = theta / base^(i-1)`.
pub fn geometric_distribution(targets: usize, theta: f64, base: f64) -> Result<TargetDistribution> {
    if !(base.is_finite() && base > 0.0) {
        return Err(Error::InvalidDistribution(format!("base {base} must be positive")));
    }
    let probabilities = (0..targets).map(|i| theta / base.powi(i as i32)).collect();
    TargetDistribution::new(probabilities)
}

/// Kahan-compensated running sum.
#[derive(Default, Clone, Copy)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Exact expected number of draws until targets `1..=n` have all been hit,
/// by inclusion-exclusion over the `2^n` subsets of those targets.
pub fn expected_tau_exact(dist: &TargetDistribution, n: usize) -> Result<f64> {
    if n == 0 || n > dist.targets() {
        return Err(Error::InvalidArgument(format!(
            "n = {n} outside 1..={}",
            dist.targets()
        )));
    }
    if n > EXACT_TAU_LIMIT {
        return Err(Error::Capacity {
            n,
            limit: EXACT_TAU_LIMIT,
        });
    }
    let p = &dist.probabilities[..n];
    let subsets = 1usize << n;
    let mut mass = vec![0.0f64; subsets];
    let mut by_size = vec![Compensated::default(); n + 1];
    for mask in 1..subsets {
        let low = mask.trailing_zeros() as usize;
        mass[mask] = mass[mask & (mask - 1)] + p[low];
        by_size[mask.count_ones() as usize].add(1.0 / mass[mask]);
    }
    let mut total = Compensated::default();
    for (size, acc) in by_size.iter().enumerate().skip(1) {
        if size % 2 == 1 {
            total.add(acc.sum);
        } else {
            total.add(-acc.sum);
        }
    }
    Ok(total.sum)
}

/// Exact expected number of distinct targets hit in `draws` draws.
pub fn expected_detected_at(dist: &TargetDistribution, draws: u64) -> f64 {
    if draws == 0 {
        return 0.0;
    }
    let t = draws as f64;
    dist.probabilities
        .iter()
        .map(|&p| if p >= 1.0 { 1.0 } else { -(t * (-p).ln_1p()).exp_m1() })
        .sum()
}

/// Upper bound on the variance of the number of targets detected after
/// `draws` draws: detections are negatively correlated, so the variance is
/// at most the sum of the per-target Bernoulli variances.
pub fn detected_variance_bound(dist: &TargetDistribution, draws: u64) -> f64 {
    if draws == 0 {
        return 0.0;
    }
    let t = draws as f64;
    dist.probabilities
        .iter()
        .map(|&p| {
            let q = if p >= 1.0 { 1.0 } else { -(t * (-p).ln_1p()).exp_m1() };
            q * (1.0 - q)
        })
        .sum()
}

/// Mean number of detected targets after each draw `0..=T`.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionCurve {
    pub expected_detected: Vec<f64>,
}

impl DetectionCurve {
    pub fn draws(&self) -> usize {
        self.expected_detected.len() - 1
    }

    pub fn into_aggregate(self) -> AggregateCurve {
        AggregateCurve::new(self.expected_detected).expect("detection curves start at 0 and never decrease")
    }
}

const RUN_CHUNK: usize = 1024;

fn run_rng(seed: u64, run: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run);
    rng
}

/// Draw numbers at which targets are first hit in one run, up to `limit`.
///
/// Draws that miss or re-hit a known target are skipped in bulk: the wait
/// for the next new target is geometric in the remaining undetected mass,
/// and which target it is follows the undetected probabilities.
fn detection_times(p: &[f64], limit: u64, rng: &mut ChaCha8Rng, out: &mut Vec<u64>) {
    let mut undetected: Vec<f64> = p.to_vec();
    let mut t: u64 = 0;
    loop {
        let mass: f64 = undetected.iter().sum();
        if mass <= 0.0 {
            return;
        }
        let wait = match Geometric::new(mass.min(1.0)) {
            Ok(g) => g.sample(rng).saturating_add(1),
            Err(_) => return,
        };
        t = t.saturating_add(wait);
        if t > limit {
            return;
        }
        let mut pick = rng.random::<f64>() * mass;
        let mut chosen = None;
        for (i, &q) in undetected.iter().enumerate() {
            if q == 0.0 {
                continue;
            }
            chosen = Some(i);
            if pick < q {
                break;
            }
            pick -= q;
        }
        let Some(i) = chosen else { return };
        undetected[i] = 0.0;
        out.push(t);
    }
}

/// Monte Carlo estimate of the mean detection curve over `runs` independent
/// runs of `draws` draws. Run `r` uses its own stream of the seeded
/// generator, so the result does not depend on scheduling.
pub fn simulate_detection_curve(
    dist: &TargetDistribution,
    draws: usize,
    runs: usize,
    seed: u64,
) -> Result<DetectionCurve> {
    if draws == 0 || runs == 0 {
        return Err(Error::InvalidArgument("draws and runs must be at least 1".into()));
    }
    let chunks = par::map_chunks(runs, RUN_CHUNK, |range| {
        let mut times = Vec::new();
        for run in range {
            let mut rng = run_rng(seed, run as u64);
            detection_times(&dist.probabilities, draws as u64, &mut rng, &mut times);
        }
        times
    });
    let mut hits = vec![0u64; draws + 1];
    for t in chunks.into_iter().flatten() {
        hits[t as usize] += 1;
    }
    let mut cumulative = 0u64;
    let expected_detected = hits
        .into_iter()
        .map(|h| {
            cumulative += h;
            cumulative as f64 / runs as f64
        })
        .collect();
    Ok(DetectionCurve { expected_detected })
}

/// Sample mean and standard error of a Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub runs: usize,
}

/// Monte Carlo estimate of the expected draws to hit targets `1..=n`.
pub fn simulate_tau(dist: &TargetDistribution, n: usize, runs: usize, seed: u64) -> Result<MonteCarloEstimate> {
    if n == 0 || n > dist.targets() || runs < 2 {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= n <= {} and at least 2 runs",
            dist.targets()
        )));
    }
    let p = &dist.probabilities[..n];
    let sums = par::map_chunks(runs, RUN_CHUNK, |range| {
        let mut times = Vec::with_capacity(n);
        let (mut s, mut s2) = (0.0f64, 0.0f64);
        for run in range {
            times.clear();
            let mut rng = run_rng(seed, run as u64);
            detection_times(p, u64::MAX, &mut rng, &mut times);
            let tau = *times.last().expect("every target is eventually hit") as f64;
            s += tau;
            s2 += tau * tau;
        }
        (s, s2)
    });
    let (s, s2) = sums.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let r = runs as f64;
    let mean = s / r;
    let var = (s2 - r * mean * mean) / (r - 1.0);
    Ok(MonteCarloEstimate {
        mean,
        std_error: (var.max(0.0) / r).sqrt(),
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_examples() {
        let d = uniform_distribution(2, 0.5).unwrap();
        assert_eq!(d.probabilities(), &[0.5, 0.5]);
        assert_eq!(d.miss_mass(), 0.0);
        let d = uniform_distribution(3, 0.1).unwrap();
        assert!((d.miss_mass() - 0.7).abs() < 1e-15);
        let d = uniform_distribution(1, 1.0).unwrap();
        assert_eq!(expected_tau_exact(&d, 1).unwrap(), 1.0);
        assert!(uniform_distribution(3, 0.5).is_err());
        assert!(uniform_distribution(0, 0.5).is_err());
        assert!(uniform_distribution(2, 0.0).is_err());
    }

    #[test]
    fn geometric_examples() {
        let d = geometric_distribution(2, 0.5, 10.0).unwrap();
        assert_eq!(d.probabilities(), &[0.5, 0.05]);
        assert!((d.miss_mass() - 0.45).abs() < 1e-15);
        assert_eq!(geometric_distribution(1, 0.3, 10.0).unwrap().probabilities(), &[0.3]);
        assert_eq!(
            geometric_distribution(4, 0.2, 1.0).unwrap(),
            uniform_distribution(4, 0.2).unwrap()
        );
        assert!(geometric_distribution(3, 0.9, 2.0).is_err());
    }

    #[test]
    fn tau_examples() {
        let d = uniform_distribution(2, 0.5).unwrap();
        assert!((expected_tau_exact(&d, 2).unwrap() - 3.0).abs() < 1e-12);
        let d = TargetDistribution::new(vec![0.5, 0.25]).unwrap();
        assert!((expected_tau_exact(&d, 2).unwrap() - 14.0 / 3.0).abs() < 1e-12);
        // n = 1 is the mean of a geometric wait.
        let d = TargetDistribution::new(vec![0.2, 0.3]).unwrap();
        assert!((expected_tau_exact(&d, 1).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn tau_capacity_and_range() {
        let d = uniform_distribution(21, 0.01).unwrap();
        assert!(matches!(expected_tau_exact(&d, 21), Err(Error::Capacity { n: 21, .. })));
        assert!(expected_tau_exact(&d, 20).is_ok());
        assert!(expected_tau_exact(&d, 0).is_err());
        assert!(expected_tau_exact(&uniform_distribution(2, 0.1).unwrap(), 3).is_err());
    }

    #[test]
    fn uniform_tau_matches_harmonic_sum() {
        // With equal probabilities theta, tau(N) = (1/theta) * H_N.
        let d = uniform_distribution(12, 0.05).unwrap();
        let harmonic: f64 = (1..=12).map(|k| 1.0 / k as f64).sum();
        let exact = expected_tau_exact(&d, 12).unwrap();
        assert!((exact - harmonic / 0.05).abs() < 1e-9 * exact);
    }

    #[test]
    fn detected_examples() {
        let d = uniform_distribution(2, 0.5).unwrap();
        assert_eq!(expected_detected_at(&d, 0), 0.0);
        assert!((expected_detected_at(&d, 1) - 1.0).abs() < 1e-15);
        let d = geometric_distribution(2, 0.5, 10.0).unwrap();
        let expected = (1.0 - 0.5f64.powi(10)) + (1.0 - 0.95f64.powi(10));
        assert!((expected_detected_at(&d, 10) - expected).abs() < 1e-12);
        assert!((expected - 1.4003).abs() < 1e-4);
    }

    #[test]
    fn simulation_is_deterministic_and_bounded() {
        let d = geometric_distribution(4, 0.3, 10.0).unwrap();
        let a = simulate_detection_curve(&d, 500, 300, 9).unwrap();
        let b = simulate_detection_curve(&d, 500, 300, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.expected_detected[0], 0.0);
        assert!(a.expected_detected.windows(2).all(|w| w[0] <= w[1]));
        assert!(a.expected_detected.iter().all(|&v| v <= 4.0));
        let c = simulate_detection_curve(&d, 500, 300, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn near_zero_mass_detects_almost_nothing() {
        let d = TargetDistribution::new(vec![1e-12]).unwrap();
        let c = simulate_detection_curve(&d, 1000, 1000, 1).unwrap();
        assert!(c.expected_detected.iter().all(|&v| v <= 1e-3));
    }

    #[test]
    fn simulation_rejects_empty_work() {
        let d = uniform_distribution(2, 0.5).unwrap();
        assert!(simulate_detection_curve(&d, 0, 10, 1).is_err());
        assert!(simulate_detection_curve(&d, 10, 0, 1).is_err());
    }

    #[test]
    fn simulated_tau_is_close_to_exact() {
        let d = TargetDistribution::new(vec![0.5, 0.25]).unwrap();
        let mc = simulate_tau(&d, 2, 200_000, 3).unwrap();
        let exact = expected_tau_exact(&d, 2).unwrap();
        assert!((mc.mean - exact).abs() < 4.0 * mc.std_error);
    }
}
