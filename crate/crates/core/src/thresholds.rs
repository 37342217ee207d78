//! Multiple thresholding.
//!
//! Stage one finds uncontaminated inliers: the surviving scores are sorted,
//! a straight line is fitted to the sorted curve, the prefix of positions
//! lying before the last point where the line is above the curve is taken as
//! the inlier estimate, and everything above that prefix's 3-sigma bound is
//! filtered out. The loop stops at the first iteration that removes nothing.
//!
//! Stage two picks the outlier threshold. A MAD cut gives provisional
//! outliers, whose centroid is the Shell reference for a second score
//! function. The rank correlation between the Shell and Ergodic scores
//! selects one of three candidate bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fallback::Fallback;
use crate::matrix::{FeatureMatrix, ScoreVector};
use crate::scoring::{initial_scores_detailed, shell_scores};
use crate::stats::{mean_std, median_mad, pearson};

/// Multiplier of the 3-sigma rule used for every outlier bound.
pub const SIGMA_MULTIPLIER: f64 = 3.0;
/// Consistency constant turning a MAD into a Gaussian standard deviation.
pub const MAD_SCALE: f64 = 1.4826;
/// Number of scaled MADs above the median for a provisional outlier.
pub const MAD_MULTIPLIER: f64 = 3.0;
/// Above this rank correlation the converged bound is used.
pub const RHO_HIGH: f64 = 0.3;
/// Below this rank correlation the whole-distribution bound is used.
pub const RHO_LOW: f64 = 0.1;
/// Filtering stops early once fewer samples than this survive.
pub const MIN_SURVIVING: usize = 4;
pub const DEFAULT_MAX_ITER: usize = 100;

/// Scores restricted to a subset, in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedScores {
    pub values: Vec<f64>,
    /// Sample index of each sorted position.
    pub original_index: Vec<usize>,
}

impl SortedScores {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `g(a) = beta0 + beta1 * a` over sorted positions `a = 0, 1, ...`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub beta0: f64,
    pub beta1: f64,
}

impl LinearFit {
    #[inline]
    pub fn at(&self, a: f64) -> f64 {
        self.beta0 + self.beta1 * a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    High,
    Mid,
    Low,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::High => "high",
            Regime::Mid => "mid",
            Regime::Low => "low",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiTConfig {
    pub max_iter: usize,
}

impl Default for MultiTConfig {
    fn default() -> Self {
        Self { max_iter: DEFAULT_MAX_ITER }
    }
}

/// Both thresholds, every candidate bound and the two predicted sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub phi_in: f64,
    pub phi_out: f64,
    pub phi_out_first: f64,
    pub phi_out_star: f64,
    pub phi_out_zero: f64,
    pub rho: f64,
    pub regime: Regime,
    /// `{i : F_init(x_i) <= phi_in}`, ascending.
    pub inlier_idx: Vec<usize>,
    /// `{i : F_init(x_i) > phi_out}`, ascending.
    pub outlier_idx: Vec<usize>,
    pub iterations: usize,
    pub fallbacks: Vec<Fallback>,
    /// The initial score the thresholds apply to.
    pub initial_scores: ScoreVector,
}

/// Ascending sort of `s` restricted to `alive`; ties keep index order.
pub fn sort_transform(s: &[f64], alive: &[usize]) -> SortedScores {
    let mut idx = alive.to_vec();
    idx.sort_by(|&a, &b| s[a].total_cmp(&s[b]).then(a.cmp(&b)));
    SortedScores { values: idx.iter().map(|&i| s[i]).collect(), original_index: idx }
}

/// Ordinary least squares of the sorted values against their positions.
pub fn fit_line(ss: &SortedScores) -> Result<LinearFit> {
    let m = ss.len();
    if m < 2 {
        return Err(Error::InsufficientPoints { needed: 2, found: m });
    }
    let mean_a = (m - 1) as f64 / 2.0;
    let mean_y = ss.values.iter().sum::<f64>() / m as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in ss.values.iter().enumerate() {
        let da = i as f64 - mean_a;
        sxy += da * (y - mean_y);
        sxx += da * da;
    }
    let beta1 = sxy / sxx;
    Ok(LinearFit { beta0: mean_y - beta1 * mean_a, beta1 })
}

/// Result of [`below_line_prefix`].
#[derive(Debug, Clone, PartialEq)]
pub struct LinePrefix {
    /// Sample indices of the prefix, in sorted-score order.
    pub indices: Vec<usize>,
    /// No usable crossing existed and the whole set was returned.
    pub fallback: bool,
}

/// Sorted positions before the last position where the line is strictly
/// above the curve, mapped back to sample indices.
pub fn below_line_prefix(ss: &SortedScores, fit: &LinearFit) -> LinePrefix {
    let last_above = ss.values.iter().enumerate().rev().find(|(i, v)| fit.at(*i as f64) > **v).map(|(i, _)| i);
    match last_above {
        Some(end) if end > 0 => LinePrefix { indices: ss.original_index[..end].to_vec(), fallback: false },
        _ => LinePrefix { indices: ss.original_index.clone(), fallback: true },
    }
}

/// Outcome of the inlier-filtering loop.
#[derive(Debug, Clone, PartialEq)]
pub struct InlierIteration {
    /// Converged inlier estimate, ascending sample indices.
    pub i_star: Vec<usize>,
    pub phi_out_first: f64,
    pub phi_out_star: f64,
    pub iterations: usize,
    pub fallbacks: Vec<Fallback>,
}

/// Iterative line-fit and 3-sigma filtering.
///
/// Each iteration re-sorts and re-fits the surviving set. The bound is kept
/// as a running minimum, so `phi_out_star <= phi_out_first` always holds; a
/// larger raw bound at some step would remove nothing that the previous bound
/// had not already removed.
pub fn iterate_inliers(s: &[f64], max_iter: usize) -> Result<InlierIteration> {
    if s.len() < MIN_SURVIVING {
        return Err(Error::InsufficientPoints { needed: MIN_SURVIVING, found: s.len() });
    }
    if max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    let mut alive: Vec<usize> = (0..s.len()).collect();
    let mut fallbacks = Vec::new();
    let mut bound = f64::INFINITY;
    let mut first = None;
    let mut iteration = 0;
    loop {
        iteration += 1;
        let sorted = sort_transform(s, &alive);
        let fit = fit_line(&sorted)?;
        let prefix = below_line_prefix(&sorted, &fit);
        if prefix.fallback {
            fallbacks.push(Fallback::NoBelowLineCrossing { iteration });
        }
        let values: Vec<f64> = prefix.indices.iter().map(|&i| s[i]).collect();
        let (mean, std) = mean_std(&values);
        bound = bound.min(mean + SIGMA_MULTIPLIER * std);
        let phi_out_first = *first.get_or_insert(bound);

        let before = alive.len();
        alive.retain(|&i| s[i] <= bound);
        let removed = alive.len() != before;
        let stop = if !removed {
            true
        } else if alive.len() < MIN_SURVIVING {
            fallbacks.push(Fallback::EarlyStop { iteration, surviving: alive.len() });
            true
        } else if iteration == max_iter {
            fallbacks.push(Fallback::MaxIterations { iterations: iteration });
            true
        } else {
            false
        };
        if stop {
            let mut i_star: Vec<usize> = prefix.indices.into_iter().filter(|&i| s[i] <= bound).collect();
            i_star.sort_unstable();
            return Ok(InlierIteration {
                i_star,
                phi_out_first,
                phi_out_star: bound,
                iterations: iteration,
                fallbacks,
            });
        }
    }
}

/// Provisional outliers from a median/MAD cut.
#[derive(Debug, Clone, PartialEq)]
pub struct MadOutcome {
    /// Ascending sample indices.
    pub outliers: Vec<usize>,
    pub threshold: f64,
    /// MAD was zero and the cut fell back to the median.
    pub mad_zero: bool,
}

/// `{i : s_i > median + 3 * 1.4826 * MAD}`, or `{i : s_i > median}` when MAD is zero.
pub fn mad_threshold(s: &[f64]) -> Result<MadOutcome> {
    if s.len() < 2 {
        return Err(Error::InsufficientPoints { needed: 2, found: s.len() });
    }
    let (median, mad) = median_mad(s);
    let mad_zero = mad == 0.0;
    let threshold = if mad_zero { median } else { median + MAD_MULTIPLIER * MAD_SCALE * mad };
    let outliers = (0..s.len()).filter(|&i| s[i] > threshold).collect();
    Ok(MadOutcome { outliers, threshold, mad_zero })
}

/// Ordinal ranks `0..n` under a stable ascending sort.
pub fn rank_vector(s: &[f64]) -> Vec<usize> {
    let all: Vec<usize> = (0..s.len()).collect();
    let sorted = sort_transform(s, &all);
    let mut ranks = vec![0; s.len()];
    for (rank, &i) in sorted.original_index.iter().enumerate() {
        ranks[i] = rank;
    }
    ranks
}

/// Pearson correlation of the ordinal rank vectors of two score functions.
pub fn rho_similarity(shell: &[f64], ergodic: &[f64]) -> Result<f64> {
    if shell.len() != ergodic.len() {
        return Err(Error::DimensionMismatch { expected: shell.len(), found: ergodic.len() });
    }
    if shell.len() < 2 {
        return Err(Error::InsufficientPoints { needed: 2, found: shell.len() });
    }
    let ra: Vec<f64> = rank_vector(shell).into_iter().map(|r| r as f64).collect();
    let rb: Vec<f64> = rank_vector(ergodic).into_iter().map(|r| r as f64).collect();
    // Ordinal ranks are permutations of 0..n, so neither side is constant.
    Ok(pearson(&ra, &rb).expect("rank vectors of length >= 2 have positive variance"))
}

/// Chooses the outlier bound from the rank correlation.
pub fn select_outlier_threshold(rho: f64, phi_out_star: f64, phi_out_first: f64, phi_out_zero: f64) -> (f64, Regime) {
    if rho > RHO_HIGH {
        (phi_out_star, Regime::High)
    } else if rho >= RHO_LOW {
        (phi_out_first, Regime::Mid)
    } else {
        (phi_out_zero, Regime::Low)
    }
}

/// Runs both thresholding stages on the initial score of `x`.
pub fn run_multi_t(x: &FeatureMatrix, config: &MultiTConfig) -> Result<ThresholdResult> {
    if x.n() < MIN_SURVIVING {
        return Err(Error::InsufficientPoints { needed: MIN_SURVIVING, found: x.n() });
    }
    let initial = initial_scores_detailed(x)?;
    let mut fallbacks = initial.fallbacks;
    let s = initial.scores;

    let inliers = iterate_inliers(&s, config.max_iter)?;
    fallbacks.extend(inliers.fallbacks.iter().cloned());
    let phi_in = inliers.i_star.iter().map(|&i| s[i]).fold(f64::NEG_INFINITY, f64::max);
    let inlier_idx: Vec<usize> = (0..s.len()).filter(|&i| s[i] <= phi_in).collect();

    let mad = mad_threshold(&s)?;
    if mad.mad_zero {
        fallbacks.push(Fallback::MadZero);
    }
    let rho = if mad.outliers.is_empty() {
        fallbacks.push(Fallback::EmptyProvisionalOutliers);
        0.0
    } else {
        let shell = shell_scores(x, &mad.outliers)?;
        rho_similarity(&shell, &s)?
    };

    let (mean, std) = mean_std(&s);
    let phi_out_zero = mean + SIGMA_MULTIPLIER * std;
    let (mut phi_out, regime) =
        select_outlier_threshold(rho, inliers.phi_out_star, inliers.phi_out_first, phi_out_zero);
    if phi_out < phi_in {
        fallbacks.push(Fallback::OutlierThresholdRaised { from: phi_out, to: phi_in });
        phi_out = phi_in;
    }
    let outlier_idx: Vec<usize> = (0..s.len()).filter(|&i| s[i] > phi_out).collect();

    Ok(ThresholdResult {
        phi_in,
        phi_out,
        phi_out_first: inliers.phi_out_first,
        phi_out_star: inliers.phi_out_star,
        phi_out_zero,
        rho,
        regime,
        inlier_idx,
        outlier_idx,
        iterations: inliers.iterations,
        fallbacks,
        initial_scores: s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn sorted(values: &[f64]) -> SortedScores {
        let all: Vec<usize> = (0..values.len()).collect();
        sort_transform(values, &all)
    }

    #[test]
    fn sort_transform_examples() {
        let ss = sorted(&[3.0, 1.0, 2.0]);
        assert_eq!(ss.values, vec![1.0, 2.0, 3.0]);
        assert_eq!(ss.original_index, vec![1, 2, 0]);
        assert_eq!(sorted(&[1.0, 2.0, 5.0]).original_index, vec![0, 1, 2]);
        assert_eq!(sorted(&[7.0; 4]).original_index, vec![0, 1, 2, 3]);
        let sub = sort_transform(&[5.0, 0.0, 4.0, 1.0], &[0, 2, 3]);
        assert_eq!(sub.original_index, vec![3, 2, 0]);
    }

    #[test]
    fn fit_line_examples() {
        let line: Vec<f64> = (0..10).map(|i| 2.0 + 3.0 * i as f64).collect();
        assert_eq!(fit_line(&sorted(&line)).unwrap(), LinearFit { beta0: 2.0, beta1: 3.0 });
        assert_eq!(fit_line(&sorted(&[4.5; 6])).unwrap(), LinearFit { beta0: 4.5, beta1: 0.0 });
        let f = fit_line(&sorted(&[0.0, 1.0, 4.0])).unwrap();
        assert!((f.beta1 - 2.0).abs() < 1e-15);
        assert!((f.beta0 + 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(fit_line(&sorted(&[1.0])), Err(Error::InsufficientPoints { needed: 2, found: 1 })));
    }

    #[test]
    fn below_line_prefix_examples() {
        let line: Vec<f64> = (0..10).map(|i| 2.0 + 3.0 * i as f64).collect();
        let ss = sorted(&line);
        let p = below_line_prefix(&ss, &fit_line(&ss).unwrap());
        assert!(p.fallback);
        assert_eq!(p.indices.len(), 10);

        let ss = sorted(&[0.0, 0.0, 0.0, 10.0]);
        let fit = fit_line(&ss).unwrap();
        assert_eq!(fit, LinearFit { beta0: -2.0, beta1: 3.0 });
        let p = below_line_prefix(&ss, &fit);
        assert!(!p.fallback);
        assert_eq!(p.indices, vec![0, 1]);

        let mut ramp: Vec<f64> = (0..30).map(|i| i as f64).collect();
        ramp.push(500.0);
        let ss = sorted(&ramp);
        let p = below_line_prefix(&ss, &fit_line(&ss).unwrap());
        assert!(!p.indices.contains(&30));
    }

    #[test]
    fn iterate_constant_scores() {
        let it = iterate_inliers(&[2.5; 8], 100).unwrap();
        assert_eq!(it.iterations, 1);
        assert_eq!(it.phi_out_first, 2.5);
        assert_eq!(it.phi_out_star, 2.5);
        assert_eq!(it.i_star, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn iterate_clean_ramp() {
        let ramp: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let it = iterate_inliers(&ramp, 100).unwrap();
        assert!(it.iterations <= 2);
        // Exact line: no crossing, so the first prefix is the whole set.
        assert_eq!(it.i_star, (0..100).collect::<Vec<_>>());
        assert_eq!(it.fallbacks[0], Fallback::NoBelowLineCrossing { iteration: 1 });
    }

    #[test]
    fn iterate_planted_mixture() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let inl = Normal::new(10.0, 1.0).unwrap();
        let out = Normal::new(25.0, 1.0).unwrap();
        let mut s: Vec<f64> = (0..95).map(|_| inl.sample(&mut rng)).collect();
        s.extend((0..5).map(|_| out.sample(&mut rng)));
        let it = iterate_inliers(&s, 100).unwrap();
        assert!(it.i_star.iter().all(|&i| i < 95));
        let min_out = s[95..].iter().copied().fold(f64::INFINITY, f64::min);
        assert!(it.phi_out_star < min_out);
    }

    #[test]
    fn iterate_rejects_bad_input() {
        assert!(matches!(iterate_inliers(&[1.0, 2.0, 3.0], 10), Err(Error::InsufficientPoints { .. })));
        assert!(matches!(iterate_inliers(&[1.0, 2.0, 3.0, 4.0], 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn iterate_respects_max_iter() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let e = rand_distr::Exp::new(1.0).unwrap();
        let s: Vec<f64> = (0..500).map(|_| e.sample(&mut rng)).collect();
        let it = iterate_inliers(&s, 1).unwrap();
        assert_eq!(it.iterations, 1);
        assert_eq!(it.phi_out_first, it.phi_out_star);
    }

    #[test]
    fn mad_threshold_examples() {
        let m = mad_threshold(&[1.0, 2.0, 3.0, 4.0, 100.0]).unwrap();
        assert_eq!(m.outliers, vec![4]);
        assert!((m.threshold - 7.4478).abs() < 1e-12);
        let m = mad_threshold(&[2.0; 5]).unwrap();
        assert!(m.mad_zero);
        assert!(m.outliers.is_empty());
        assert!(mad_threshold(&[-1.0, 0.0, 1.0]).unwrap().outliers.is_empty());
        assert!(mad_threshold(&[1.0]).is_err());
    }

    #[test]
    fn mad_zero_falls_back_to_median() {
        let m = mad_threshold(&[1.0, 1.0, 1.0, 1.0, 5.0]).unwrap();
        assert!(m.mad_zero);
        assert_eq!(m.outliers, vec![4]);
    }

    #[test]
    fn rank_vector_examples() {
        assert_eq!(rank_vector(&[10.0, 30.0, 20.0]), vec![0, 2, 1]);
        assert_eq!(rank_vector(&[1.0, 2.0, 3.0, 4.0]), vec![0, 1, 2, 3]);
        assert_eq!(rank_vector(&[0.5; 4]), vec![0, 1, 2, 3]);
    }

    #[test]
    fn rho_examples() {
        let a = [0.3, 0.1, 0.9, 0.4];
        assert_eq!(rho_similarity(&a, &a).unwrap(), 1.0);
        let rev: Vec<f64> = a.iter().map(|v| -v).collect();
        assert_eq!(rho_similarity(&a, &rev).unwrap(), -1.0);
        assert!(matches!(rho_similarity(&[1.0], &[1.0]), Err(Error::InsufficientPoints { .. })));
        assert!(matches!(rho_similarity(&[1.0, 2.0], &[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn regime_selection() {
        let pick = |rho| select_outlier_threshold(rho, 1.0, 2.0, 3.0);
        assert_eq!(pick(0.5), (1.0, Regime::High));
        assert_eq!(pick(0.2), (2.0, Regime::Mid));
        assert_eq!(pick(0.05), (3.0, Regime::Low));
        assert_eq!(pick(0.3), (2.0, Regime::Mid));
        assert_eq!(pick(0.1), (2.0, Regime::Mid));
        assert_eq!(pick(-0.7), (3.0, Regime::Low));
    }

    #[test]
    fn run_multi_t_needs_four_rows() {
        let x = FeatureMatrix::from_rows(&[[1.0, 2.0], [2.0, 1.0], [0.0, 3.0]]).unwrap();
        assert!(matches!(run_multi_t(&x, &MultiTConfig::default()), Err(Error::InsufficientPoints { .. })));
    }
}
