//! Outlier score functions.
//!
//! All built-in scores are distance-to-the-mean scores in a normalized space:
//! each sample and a centroid are normalized against the same reference vector
//! and the score is the Euclidean distance between the two unit directions.
//! The reference and the centroid are what change between the initial score,
//! the Shell/Ergodic pair used for the contamination estimate, and the final
//! Multi-T score. [`enhance_detector`] generalizes the last one to any
//! [`Detector`].

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fallback::Fallback;
use crate::matrix::{check_indices, column_mean, subset_column_mean, FeatureMatrix, ScoreVector};
use crate::normalization::{
    ergodic_reference, normalize, normalize_into, normalize_rows, normalized_distance, shell_reference, ReferenceKind,
    ReferenceVector,
};

/// A fit/predict outlier scorer. Higher scores are more anomalous.
///
/// `predict` must only be called after `fit`; the fitted state is read-only
/// during prediction and may be shared across threads.
pub trait Detector: Send + Sync {
    fn name(&self) -> &str;

    fn fit(&mut self, train: &FeatureMatrix) -> Result<()>;

    /// One score per row of `test`.
    fn predict(&self, test: &FeatureMatrix) -> Result<ScoreVector>;
}

/// Distance to the mean of the training rows.
#[derive(Debug, Clone, Default)]
pub struct CentroidDetector {
    centroid: Option<Vec<f64>>,
}

impl CentroidDetector {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Detector for CentroidDetector {
    fn name(&self) -> &str {
        "centroid"
    }

    fn fit(&mut self, train: &FeatureMatrix) -> Result<()> {
        self.centroid = Some(column_mean(train));
        Ok(())
    }

    fn predict(&self, test: &FeatureMatrix) -> Result<ScoreVector> {
        let centroid = self.centroid.as_ref().ok_or_else(|| Error::NotFitted(self.name().into()))?;
        if centroid.len() != test.d() {
            return Err(Error::DimensionMismatch { expected: centroid.len(), found: test.d() });
        }
        let scores = test
            .rows()
            .map(|row| row.iter().zip(centroid).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
            .collect();
        ScoreVector::new(scores)
    }
}

/// Distance to the k-th nearest training row.
#[derive(Debug, Clone)]
pub struct KnnDetector {
    k: usize,
    effective_k: usize,
    train: Option<FeatureMatrix>,
}

/// Builds a k-nearest-neighbour detector. `k` must be at least 1.
pub fn knn_scorer(k: usize) -> Result<KnnDetector> {
    if k == 0 {
        return Err(Error::InvalidArgument("knn requires k >= 1".into()));
    }
    Ok(KnnDetector { k, effective_k: k, train: None })
}

impl KnnDetector {
    pub fn k(&self) -> usize {
        self.k
    }

    /// `k` after clamping to the training-set size; equals `k` before fit.
    pub fn effective_k(&self) -> usize {
        self.effective_k
    }
}

impl Detector for KnnDetector {
    fn name(&self) -> &str {
        "knn"
    }

    fn fit(&mut self, train: &FeatureMatrix) -> Result<()> {
        self.effective_k = if self.k > train.n() {
            warn!("knn: k = {} exceeds {} training rows; clamping", self.k, train.n());
            train.n()
        } else {
            self.k
        };
        self.train = Some(train.clone());
        Ok(())
    }

    fn predict(&self, test: &FeatureMatrix) -> Result<ScoreVector> {
        let train = self.train.as_ref().ok_or_else(|| Error::NotFitted(self.name().into()))?;
        if train.d() != test.d() {
            return Err(Error::DimensionMismatch { expected: train.d(), found: test.d() });
        }
        let kth = self.effective_k - 1;
        let scores: Vec<f64> = (0..test.n())
            .into_par_iter()
            .map_init(
                || vec![0.0; train.n()],
                |dists, i| {
                    let q = test.row(i);
                    for (slot, row) in dists.iter_mut().zip(train.rows()) {
                        *slot = q.iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum();
                    }
                    let (_, v, _) = dists.select_nth_unstable_by(kth, f64::total_cmp);
                    v.sqrt()
                },
            )
            .collect();
        ScoreVector::new(scores)
    }
}

/// What to do when the predicted outlier set is empty.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShellFallback {
    #[default]
    Ergodic,
}

/// Where the inlier centroid of the final score is taken.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CentroidSpace {
    /// Mean of the raw inlier rows, normalized afterwards.
    #[default]
    Raw,
    /// Mean of the already-normalized inlier rows. This is what a centroid
    /// detector fitted on Shell-normalized rows computes.
    Normalized,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScorerConfig {
    pub shell_fallback: ShellFallback,
    pub centroid: CentroidSpace,
}

/// Scores plus the reference actually used and any fallbacks taken.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredOutput {
    pub scores: ScoreVector,
    pub reference: ReferenceKind,
    pub fallbacks: Vec<Fallback>,
}

/// Distances of every normalized row to the normalized `centroid`.
fn distance_to_centroid(
    x: &FeatureMatrix,
    reference: &ReferenceVector,
    centroid: &[f64],
) -> Result<(ScoreVector, usize)> {
    // Means accumulated in different orders can differ by rounding alone; a
    // centroid within that noise of the reference has no usable direction.
    let magnitude = x.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let noise = 4.0 * f64::EPSILON * x.n() as f64 * magnitude;
    if centroid.iter().zip(&reference.values).all(|(c, v)| (c - v).abs() <= noise) {
        return Err(Error::DegenerateNormalization);
    }
    let target = normalize(centroid, reference)?;
    distance_to_target(x, reference, &target)
}

fn distance_to_target(x: &FeatureMatrix, reference: &ReferenceVector, target: &[f64]) -> Result<(ScoreVector, usize)> {
    let mut degenerate = 0;
    let scores = x
        .rows()
        .map(|row| {
            let (dist, deg) = normalized_distance(row, &reference.values, target);
            degenerate += deg as usize;
            dist
        })
        .collect();
    if degenerate > 0 {
        debug!("{degenerate} rows coincide with the {:?} reference; scored as zero vectors", reference.kind);
    }
    Ok((ScoreVector::new(scores)?, degenerate))
}

/// Distance of each Ergodic-normalized sample to the Ergodic-normalized
/// dataset mean.
pub fn initial_scores(x: &FeatureMatrix) -> Result<ScoreVector> {
    initial_scores_detailed(x).map(|s| s.scores)
}

pub(crate) fn initial_scores_detailed(x: &FeatureMatrix) -> Result<ScoredOutput> {
    if x.n() < 2 {
        return Err(Error::InsufficientPoints { needed: 2, found: x.n() });
    }
    let reference = ergodic_reference(x);
    let (scores, degenerate) = distance_to_centroid(x, &reference, &column_mean(x))?;
    let fallbacks = degenerate_event(degenerate).into_iter().collect();
    Ok(ScoredOutput { scores, reference: ReferenceKind::Ergodic, fallbacks })
}

/// Shell-normalized and Ergodic-normalized distance-to-the-mean scores.
///
/// The Shell reference is the centroid of `provisional_outliers`. The second
/// element equals [`initial_scores`].
pub fn score_pair(x: &FeatureMatrix, provisional_outliers: &[usize]) -> Result<(ScoreVector, ScoreVector)> {
    let shell = shell_scores(x, provisional_outliers)?;
    Ok((shell, initial_scores(x)?))
}

pub(crate) fn shell_scores(x: &FeatureMatrix, provisional_outliers: &[usize]) -> Result<ScoreVector> {
    if x.n() < 2 {
        return Err(Error::InsufficientPoints { needed: 2, found: x.n() });
    }
    let reference = shell_reference(x, provisional_outliers)?;
    Ok(distance_to_centroid(x, &reference, &column_mean(x))?.0)
}

fn validate_sets(n: usize, inlier_idx: &[usize], outlier_idx: &[usize]) -> Result<()> {
    if inlier_idx.is_empty() {
        return Err(Error::InvalidThresholdResult("inlier index set is empty".into()));
    }
    check_indices(inlier_idx, n)?;
    check_indices(outlier_idx, n)?;
    let mut is_inlier = vec![false; n];
    for &i in inlier_idx {
        is_inlier[i] = true;
    }
    if let Some(&i) = outlier_idx.iter().find(|&&i| is_inlier[i]) {
        return Err(Error::InvalidThresholdResult(format!("sample {i} is in both the inlier and outlier sets")));
    }
    Ok(())
}

fn final_reference(x: &FeatureMatrix, outlier_idx: &[usize], fallbacks: &mut Vec<Fallback>) -> Result<ReferenceVector> {
    if outlier_idx.is_empty() {
        debug!("no predicted outliers; using the Ergodic reference");
        fallbacks.push(Fallback::ErgodicReference);
        Ok(ergodic_reference(x))
    } else {
        shell_reference(x, outlier_idx)
    }
}

fn degenerate_event(count: usize) -> Option<Fallback> {
    (count > 0).then_some(Fallback::DegenerateRows { count })
}

/// Multi-T score: distance of each Shell-normalized sample to the
/// Shell-normalized centroid of the predicted inliers, with the Shell
/// reference taken from the predicted outliers.
pub fn multi_t_scores(x: &FeatureMatrix, inlier_idx: &[usize], outlier_idx: &[usize]) -> Result<ScoredOutput> {
    multi_t_scores_with(x, inlier_idx, outlier_idx, &ScorerConfig::default())
}

pub fn multi_t_scores_with(
    x: &FeatureMatrix,
    inlier_idx: &[usize],
    outlier_idx: &[usize],
    config: &ScorerConfig,
) -> Result<ScoredOutput> {
    validate_sets(x.n(), inlier_idx, outlier_idx)?;
    let mut fallbacks = Vec::new();
    let reference = final_reference(x, outlier_idx, &mut fallbacks)?;
    let (scores, degenerate) = match config.centroid {
        CentroidSpace::Raw => distance_to_centroid(x, &reference, &subset_column_mean(x, inlier_idx))?,
        CentroidSpace::Normalized => {
            let mut target = vec![0.0; x.d()];
            let mut buf = vec![0.0; x.d()];
            for &i in inlier_idx {
                normalize_into(x.row(i), &reference.values, &mut buf);
                target.iter_mut().zip(&buf).for_each(|(t, b)| *t += b);
            }
            let inv = 1.0 / inlier_idx.len() as f64;
            target.iter_mut().for_each(|t| *t *= inv);
            distance_to_target(x, &reference, &target)?
        }
    };
    fallbacks.extend(degenerate_event(degenerate));
    Ok(ScoredOutput { scores, reference: reference.kind, fallbacks })
}

/// Fits `detector` on the Shell-normalized predicted inliers and scores every
/// Shell-normalized sample. Scores are aligned with the rows of `x`.
pub fn enhance_detector(
    detector: &mut dyn Detector,
    x: &FeatureMatrix,
    inlier_idx: &[usize],
    outlier_idx: &[usize],
) -> Result<ScoredOutput> {
    validate_sets(x.n(), inlier_idx, outlier_idx)?;
    let mut fallbacks = Vec::new();
    let reference = final_reference(x, outlier_idx, &mut fallbacks)?;
    let (normalized, degenerate) = normalize_rows(x, &reference);
    fallbacks.extend(degenerate_event(degenerate));
    let train = normalized.select_rows(inlier_idx)?;
    let name = detector.name().to_string();
    detector.fit(&train).map_err(|e| Error::Detector {
        detector: name.clone(),
        message: format!("fit on {} normalized inlier rows: {e}", train.n()),
    })?;
    let scores = detector.predict(&normalized).map_err(|e| Error::Detector {
        detector: name.clone(),
        message: format!("predict on {} normalized rows: {e}", normalized.n()),
    })?;
    if scores.len() != x.n() {
        return Err(Error::Detector {
            detector: name,
            message: format!("predict returned {} scores for {} rows", scores.len(), x.n()),
        });
    }
    Ok(ScoredOutput { scores, reference: reference.kind, fallbacks })
}
