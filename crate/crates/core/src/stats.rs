//! Paired comparison of model scores across subjects.
//!
//! [`wilcoxon_signed_rank`] tests whether paired scores differ; the effect
//! size is `|Z| / sqrt(2N)` with `N` the number of pairs, read with the
//! usual bands 0.1 (small), 0.3 (medium) and 0.5 (large).

use std::collections::BTreeMap;
use std::fmt;

use statrs::function::erf::erfc;

use crate::fitting::Ranking;
use crate::models::ModelId;
use crate::{Error, Result};

/// Largest effective sample for which the exact null distribution is used.
pub const EXACT_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    NormalApproximation,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::NormalApproximation => "normal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilcoxonResult {
    /// Pairs analysed, after dropping pairs with a `NaN` side.
    pub n_pairs: usize,
    /// Pairs with a nonzero difference.
    pub n_effective: usize,
    /// Pairs dropped because one side was `NaN`.
    pub excluded: usize,
    /// Sum of ranks of positive differences.
    pub w_plus: f64,
    /// `min(W+, W-)`.
    pub w_statistic: f64,
    /// Normal-approximation Z of `W+`; positive when `xs` tends to exceed `ys`.
    pub z_statistic: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    pub effect_size: f64,
    pub method: Method,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EffectMagnitude {
    Negligible,
    Small,
    Medium,
    Large,
}

impl EffectMagnitude {
    pub fn of(effect: f64) -> Self {
        let e = effect.abs();
        if e >= 0.5 {
            EffectMagnitude::Large
        } else if e >= 0.3 {
            EffectMagnitude::Medium
        } else if e >= 0.1 {
            EffectMagnitude::Small
        } else {
            EffectMagnitude::Negligible
        }
    }
}

/// Average ranks (1-based) of `values`, ties sharing the mean of their
/// positions. Returned doubled so that every rank is an integer.
fn doubled_ranks(values: &[f64]) -> (Vec<u64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0u64; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i+1 ..= j share rank (i + 1 + j) / 2
        let doubled = (i + 1 + j) as u64;
        for &o in &order[i..j] {
            ranks[o] = doubled;
        }
        if j - i > 1 {
            ties.push(j - i);
        }
        i = j;
    }
    (ranks, ties)
}

/// Exact two-sided p-value: the fraction of the `2^n` equally likely sign
/// assignments whose `min(W+, W-)` is at most the observed one.
///
/// Counts come from the generating function of `W+` over doubled ranks.
fn exact_p(doubled: &[u64], observed_min: u64) -> f64 {
    let total: u64 = doubled.iter().sum();
    let mut counts = vec![0f64; total as usize + 1];
    counts[0] = 1.0;
    let mut reach = 0usize;
    for &r in doubled {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let hits: f64 = counts
        .iter()
        .enumerate()
        .filter(|&(w, _)| (w as u64).min(total - w as u64) <= observed_min)
        .map(|(_, c)| c)
        .sum();
    (hits / 2f64.powi(doubled.len() as i32)).min(1.0)
}

/// Wilcoxon signed-rank test on `xs - ys`.
///
/// Pairs with a `NaN` side are dropped and counted in `excluded`; zero
/// differences are dropped before ranking. The exact null distribution is
/// used up to [`EXACT_LIMIT`] nonzero differences, the tie-corrected normal
/// approximation with continuity correction beyond. `Z` always comes from
/// the normal approximation.
pub fn wilcoxon_signed_rank(xs: &[f64], ys: &[f64]) -> Result<WilcoxonResult> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(xs.len(), ys.len()));
    }
    let valid: Vec<f64> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| !x.is_nan() && !y.is_nan())
        // Equal infinite scores tie rather than producing a NaN difference.
        .map(|(x, y)| if x == y { 0.0 } else { x - y })
        .collect();
    let excluded = xs.len() - valid.len();
    let n_pairs = valid.len();
    if n_pairs == 0 {
        return Err(Error::InvalidArgument("no comparable pairs".into()));
    }

    let diffs: Vec<f64> = valid.into_iter().filter(|&d| d != 0.0).collect();
    let n = diffs.len();
    if n == 0 {
        return Ok(WilcoxonResult {
            n_pairs,
            n_effective: 0,
            excluded,
            w_plus: 0.0,
            w_statistic: 0.0,
            z_statistic: 0.0,
            p_value: 1.0,
            effect_size: 0.0,
            method: Method::Exact,
        });
    }

    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let (doubled, ties) = doubled_ranks(&magnitudes);
    let total: u64 = doubled.iter().sum();
    let w_plus2: u64 = doubled
        .iter()
        .zip(&diffs)
        .filter(|(_, d)| **d > 0.0)
        .map(|(r, _)| r)
        .sum();
    let w_min2 = w_plus2.min(total - w_plus2);

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
    let w_plus = w_plus2 as f64 / 2.0;
    let diff = w_plus - mean;
    let z = if var <= 0.0 || diff.abs() <= 0.5 {
        0.0
    } else {
        diff.signum() * (diff.abs() - 0.5) / var.sqrt()
    };

    let (p_value, method) = if n <= EXACT_LIMIT {
        (exact_p(&doubled, w_min2), Method::Exact)
    } else {
        ((erfc(z.abs() / std::f64::consts::SQRT_2)).min(1.0), Method::NormalApproximation)
    };

    Ok(WilcoxonResult {
        n_pairs,
        n_effective: n,
        excluded,
        w_plus,
        w_statistic: w_min2 as f64 / 2.0,
        z_statistic: z,
        p_value,
        effect_size: z.abs() / (2.0 * n_pairs as f64).sqrt(),
        method,
    })
}

/// Two-sided p-value of the normal approximation for an already computed
/// result.
pub fn normal_p_value(result: &WilcoxonResult) -> f64 {
    erfc(result.z_statistic.abs() / std::f64::consts::SQRT_2).min(1.0)
}

/// Signed-rank comparison of a reference model's score against another
/// model's, paired by subject.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelComparison {
    pub subjects: usize,
    pub test: WilcoxonResult,
}

/// Runs the signed-rank test on per-subject `(reference, other)` scores.
pub fn compare_models_across_subjects(scores: &BTreeMap<String, (f64, f64)>) -> Result<ModelComparison> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = scores.values().copied().unzip();
    Ok(ModelComparison {
        subjects: scores.len(),
        test: wilcoxon_signed_rank(&xs, &ys)?,
    })
}

/// How often the reference model comes first or in the top two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankFractions {
    pub subjects: usize,
    pub best: f64,
    pub top_two: f64,
}

pub fn reference_rank_fractions(rankings: &[Ranking], reference: ModelId) -> RankFractions {
    let subjects = rankings.len();
    if subjects == 0 {
        return RankFractions {
            subjects,
            best: f64::NAN,
            top_two: f64::NAN,
        };
    }
    let positions: Vec<Option<usize>> = rankings.iter().map(|r| r.position(reference)).collect();
    let count = |limit: usize| positions.iter().filter(|p| matches!(p, Some(i) if *i < limit)).count();
    RankFractions {
        subjects,
        best: count(1) as f64 / subjects as f64,
        top_two: count(2) as f64 / subjects as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_infinite_scores_tie() {
        let inf = f64::NEG_INFINITY;
        let r = wilcoxon_signed_rank(&[inf, inf, 0.5], &[inf, 0.2, 0.1]).unwrap();
        assert_eq!(r.n_pairs, 3);
        assert_eq!(r.n_effective, 2);
        assert!(r.p_value.is_finite());
    }
    use crate::fitting::FitResult;

    #[test]
    fn identical_samples_have_no_effect() {
        let xs = [0.3, 0.9, 0.1, 0.5];
        let r = wilcoxon_signed_rank(&xs, &xs).unwrap();
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.effect_size, 0.0);
        assert_eq!(r.method, Method::Exact);
        assert_eq!(r.n_effective, 0);
    }

    #[test]
    fn one_sided_extreme_of_six() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let ys: Vec<f64> = xs.iter().map(|x| x - 1.0).collect();
        let r = wilcoxon_signed_rank(&xs, &ys).unwrap();
        assert_eq!(r.p_value, 2.0 / 64.0);
        assert_eq!(r.w_statistic, 0.0);
        assert!(r.z_statistic > 0.0);
    }

    #[test]
    fn ranks_average_ties() {
        let (r, ties) = doubled_ranks(&[3.0, 1.0, 3.0, 2.0]);
        assert_eq!(r, vec![7, 2, 7, 4]);
        assert_eq!(ties, vec![2]);
    }

    #[test]
    fn nan_pairs_are_excluded() {
        let r = wilcoxon_signed_rank(&[1.0, f64::NAN, 3.0], &[0.0, 1.0, 1.0]).unwrap();
        assert_eq!(r.excluded, 1);
        assert_eq!(r.n_pairs, 2);
        assert!(wilcoxon_signed_rank(&[f64::NAN], &[1.0]).is_err());
        assert!(wilcoxon_signed_rank(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn large_samples_use_normal_approximation() {
        let xs: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let ys: Vec<f64> = (0..30).map(|i| i as f64 + if i % 3 == 0 { 0.5 } else { -1.0 - i as f64 / 100.0 }).collect();
        let r = wilcoxon_signed_rank(&xs, &ys).unwrap();
        assert_eq!(r.method, Method::NormalApproximation);
        assert_eq!(r.p_value, normal_p_value(&r));
    }

    #[test]
    fn magnitude_bands() {
        assert_eq!(EffectMagnitude::of(0.05), EffectMagnitude::Negligible);
        assert_eq!(EffectMagnitude::of(0.1), EffectMagnitude::Small);
        assert_eq!(EffectMagnitude::of(0.3), EffectMagnitude::Medium);
        assert_eq!(EffectMagnitude::of(0.5), EffectMagnitude::Large);
        assert_eq!(EffectMagnitude::of(0.62), EffectMagnitude::Large);
    }

    #[test]
    fn single_subject_equal_scores() {
        let mut m = BTreeMap::new();
        m.insert("c".to_string(), (0.9, 0.9));
        let c = compare_models_across_subjects(&m).unwrap();
        assert_eq!(c.test.p_value, 1.0);
        assert_eq!(c.subjects, 1);
    }

    #[test]
    fn fraction_best_for_single_winner() {
        let fit = |model, r2| FitResult {
            model,
            params: None,
            r_squared: r2,
            rmse: 1.0 - r2,
            converged: true,
            iterations: 1,
            starts_converged: 1,
        };
        let ranking = Ranking::from_results(
            vec![fit(ModelId::Phi1, 0.8), fit(ModelId::Phi5, 0.99)],
            ModelId::Phi5,
        )
        .unwrap();
        let f = reference_rank_fractions(&[ranking], ModelId::Phi5);
        assert_eq!((f.best, f.top_two), (1.0, 1.0));
    }
}
