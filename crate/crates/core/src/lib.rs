//! Multiple thresholding for unsupervised outlier detection.
//!
//! The pipeline scores an unlabeled feature matrix with a distance-to-the-mean
//! score under Ergodic-set normalization, derives an inlier threshold and an
//! outlier threshold from that score, and then uses the two resulting index
//! sets to re-score the data: predicted outliers supply the Shell
//! normalization reference, predicted inliers supply an uncontaminated
//! manifold for any plug-in detector.
//!
//! ```
//! use multit::{run_multi_t, multi_t_scores, FeatureMatrix, MultiTConfig};
//!
//! let rows: Vec<Vec<f64>> = (0..40)
//!     .map(|i| {
//!         let t = i as f64 * 0.1;
//!         if i < 36 { vec![1.0 + t.sin() * 0.1, 2.0 + t.cos() * 0.1, 3.0] }
//!         else { vec![4.0, -1.0 + t, 0.5] }
//!     })
//!     .collect();
//! let x = FeatureMatrix::from_rows(&rows).unwrap();
//! let result = run_multi_t(&x, &MultiTConfig::default()).unwrap();
//! let scored = multi_t_scores(&x, &result.inlier_idx, &result.outlier_idx).unwrap();
//! assert_eq!(scored.scores.len(), 40);
//! ```

pub mod error;
pub mod evaluation;
pub mod fallback;
pub mod harness;
pub mod matrix;
pub mod normalization;
pub mod scoring;
pub mod stats;
pub mod thresholds;

pub use error::{Error, Result};
pub use evaluation::{f_beta, k_sigma_labels, roc_auc, ConfusionCounts};
pub use fallback::Fallback;
pub use matrix::{column_mean, euclidean_distance, grand_mean, FeatureMatrix, LabelVector, ScoreVector};
pub use normalization::{ergodic_reference, normalize, shell_reference, ReferenceKind, ReferenceVector};
pub use scoring::{
    enhance_detector, initial_scores, knn_scorer, multi_t_scores, multi_t_scores_with, score_pair, CentroidDetector,
    CentroidSpace, Detector, KnnDetector, ScoredOutput, ScorerConfig, ShellFallback,
};
pub use stats::{mean_std, median_mad};
pub use thresholds::{
    below_line_prefix, fit_line, iterate_inliers, mad_threshold, rank_vector, rho_similarity, run_multi_t,
    select_outlier_threshold, sort_transform, InlierIteration, LinearFit, MadOutcome, MultiTConfig, Regime,
    SortedScores, ThresholdResult,
};
