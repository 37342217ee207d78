//! Target datasets: one class as inliers plus a random outlier subset.

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::harness::{LabeledFeatureSet, TargetDatasetSpec};
use crate::matrix::{FeatureMatrix, LabelVector};

/// `ceil(gamma / (1 - gamma) * n_in)`, at least 1.
///
/// The product is nudged down by a relative 1e-12 first so that exact
/// integers such as `0.25 * 800` do not round up through representation
/// error in `gamma`.
pub fn outlier_count(gamma: f64, n_in: usize) -> usize {
    let exact = gamma / (1.0 - gamma) * n_in as f64;
    ((exact * (1.0 - 1e-12)).ceil() as usize).max(1)
}

/// All rows of the inlier class plus a seeded uniform subset of the other
/// classes sized by [`outlier_count`], shuffled by the same seed.
pub fn build_target(set: &LabeledFeatureSet, spec: &TargetDatasetSpec) -> Result<(FeatureMatrix, LabelVector)> {
    if !(spec.gamma > 0.0 && spec.gamma < 1.0) {
        return Err(Error::InvalidArgument(format!("gamma must lie in (0, 1), got {}", spec.gamma)));
    }
    let (inliers, pool): (Vec<usize>, Vec<usize>) =
        (0..set.class_id.len()).partition(|&i| set.class_id[i] == spec.inlier_class);
    if inliers.is_empty() {
        return Err(Error::InvalidArgument(format!("class {} has no samples", spec.inlier_class)));
    }
    let needed = outlier_count(spec.gamma, inliers.len());
    if needed > pool.len() {
        return Err(Error::InsufficientOutlierPool {
            needed,
            available: pool.len(),
            max_gamma: pool.len() as f64 / (inliers.len() + pool.len()) as f64,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut chosen: Vec<(usize, u8)> = inliers.iter().map(|&i| (i, 0)).collect();
    chosen.extend(index::sample(&mut rng, pool.len(), needed).into_iter().map(|j| (pool[j], 1)));
    chosen.shuffle(&mut rng);

    let rows: Vec<usize> = chosen.iter().map(|&(i, _)| i).collect();
    let labels = LabelVector::new(chosen.iter().map(|&(_, l)| l).collect())?;
    Ok((set.features.select_rows(&rows)?, labels))
}
