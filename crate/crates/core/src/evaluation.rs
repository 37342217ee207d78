//! Ranking and thresholding metrics, with outliers as the positive class.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{LabelVector, ScoreVector};
use crate::stats::mean_std;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionCounts {
    pub fn from_labels(pred: &[u8], truth: &[u8]) -> Result<Self> {
        if pred.len() != truth.len() {
            return Err(Error::DimensionMismatch { expected: truth.len(), found: pred.len() });
        }
        let mut c = Self::default();
        for (&p, &t) in pred.iter().zip(truth) {
            match (p, t) {
                (1, 1) => c.tp += 1,
                (1, _) => c.fp += 1,
                (_, 1) => c.fn_ += 1,
                _ => c.tn += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn precision(&self) -> Option<f64> {
        let denom = self.tp + self.fp;
        (denom > 0).then(|| self.tp as f64 / denom as f64)
    }

    pub fn recall(&self) -> Option<f64> {
        let denom = self.tp + self.fn_;
        (denom > 0).then(|| self.tp as f64 / denom as f64)
    }
}

/// F-beta of the outlier class. Zero when nothing was correctly flagged.
pub fn f_beta(pred: &LabelVector, truth: &LabelVector, beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidArgument(format!("beta must be positive and finite, got {beta}")));
    }
    let c = ConfusionCounts::from_labels(pred, truth)?;
    if c.tp + c.fn_ == 0 {
        return Err(Error::UndefinedMetric("f_beta: truth has no positives"));
    }
    if c.tp == 0 {
        return Ok(0.0);
    }
    let p = c.tp as f64 / (c.tp + c.fp) as f64;
    let r = c.tp as f64 / (c.tp + c.fn_) as f64;
    let b2 = beta * beta;
    Ok((1.0 + b2) * p * r / (b2 * p + r))
}

/// Area under the ROC curve as the Mann-Whitney statistic; tied
/// outlier/inlier pairs earn half credit.
pub fn roc_auc(scores: &ScoreVector, truth: &LabelVector) -> Result<f64> {
    auc_slice(scores, truth)
}

pub(crate) fn auc_slice(scores: &[f64], truth: &[u8]) -> Result<f64> {
    if scores.len() != truth.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), found: scores.len() });
    }
    let n_out = truth.iter().filter(|&&t| t == 1).count();
    let n_in = truth.len() - n_out;
    if n_out == 0 || n_in == 0 {
        return Err(Error::UndefinedMetric("roc_auc: truth needs both classes"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Sweep groups of equal scores; each outlier beats every inlier in a
    // strictly lower group and ties with the inliers of its own group.
    let mut wins = 0.0;
    let mut inliers_below = 0usize;
    let mut start = 0;
    while start < order.len() {
        let value = scores[order[start]];
        let mut end = start;
        let (mut group_out, mut group_in) = (0usize, 0usize);
        while end < order.len() && scores[order[end]] == value {
            if truth[order[end]] == 1 {
                group_out += 1;
            } else {
                group_in += 1;
            }
            end += 1;
        }
        wins += group_out as f64 * inliers_below as f64 + 0.5 * group_out as f64 * group_in as f64;
        inliers_below += group_in;
        start = end;
    }
    Ok(wins / (n_out as f64 * n_in as f64))
}

/// Labels 1 where `s_i >= mean(s) + k * std(s)`.
pub fn k_sigma_labels(s: &ScoreVector, k: f64) -> Result<LabelVector> {
    if s.len() < 2 {
        return Err(Error::InsufficientPoints { needed: 2, found: s.len() });
    }
    if k.is_nan() || k <= 0.0 {
        return Err(Error::InvalidArgument(format!("k must be positive, got {k}")));
    }
    let (mean, std) = mean_std(s);
    // A constant score has no tail; `s_i >= mean` would flag everything.
    if std == 0.0 {
        return LabelVector::new(vec![0; s.len()]);
    }
    let cut = mean + k * std;
    LabelVector::new(s.iter().map(|&v| u8::from(v >= cut)).collect())
}
