use serde::{Deserialize, Serialize};

/// A non-fatal event where the pipeline took a documented fallback path.
///
/// These are carried on results rather than swallowed so that rare cases stay
/// visible to callers and tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Fallback {
    /// The fitted line was above the sorted scores at no usable position, so
    /// the whole surviving set was taken as the inlier prefix.
    NoBelowLineCrossing { iteration: usize },
    /// The surviving set fell below the minimum size and filtering stopped.
    EarlyStop { iteration: usize, surviving: usize },
    /// Filtering hit the iteration cap before reaching a fixed point.
    MaxIterations { iterations: usize },
    /// MAD was zero; provisional outliers were taken as everything above the median.
    MadZero,
    /// MAD produced no provisional outliers; rho was set to zero.
    EmptyProvisionalOutliers,
    /// No predicted outliers; the Ergodic reference replaced the Shell reference.
    ErgodicReference,
    /// Samples that coincided with the reference vector were given a zero
    /// normalized form.
    DegenerateRows { count: usize },
    /// The selected outlier threshold was below the inlier threshold and was
    /// raised to it so that the predicted sets stay disjoint.
    OutlierThresholdRaised { from: f64, to: f64 },
}
