//! Ergodic-set and Shell normalization.
//!
//! Both map a sample `x` to the unit direction `(x - v) / ||x - v||`; they
//! differ only in the reference vector `v`. The Ergodic reference replicates
//! the grand mean of all entries and does not depend on the contamination
//! ratio. The Shell reference is the centroid of a designated outlier subset.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{check_indices, grand_mean, subset_column_mean, FeatureMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    Ergodic,
    Shell,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceVector {
    pub values: Vec<f64>,
    pub kind: ReferenceKind,
}

impl ReferenceVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Grand mean of `x` replicated across all `d` dimensions.
pub fn ergodic_reference(x: &FeatureMatrix) -> ReferenceVector {
    ReferenceVector { values: vec![grand_mean(x); x.d()], kind: ReferenceKind::Ergodic }
}

/// Per-dimension mean of the rows in `outlier_idx`, divided by the subset size.
pub fn shell_reference(x: &FeatureMatrix, outlier_idx: &[usize]) -> Result<ReferenceVector> {
    if outlier_idx.is_empty() {
        return Err(Error::EmptyOutlierSet);
    }
    check_indices(outlier_idx, x.n())?;
    Ok(ReferenceVector { values: subset_column_mean(x, outlier_idx), kind: ReferenceKind::Shell })
}

/// `(x - v) / ||x - v||_2`.
pub fn normalize(x: &[f64], v: &ReferenceVector) -> Result<Vec<f64>> {
    if x.len() != v.len() {
        return Err(Error::DimensionMismatch { expected: v.len(), found: x.len() });
    }
    let mut out = vec![0.0; x.len()];
    if normalize_into(x, &v.values, &mut out) {
        Ok(out)
    } else {
        Err(Error::DegenerateNormalization)
    }
}

/// Writes the normalized direction into `out`. Returns `false` and leaves
/// `out` zeroed when `x == v`.
pub(crate) fn normalize_into(x: &[f64], v: &[f64], out: &mut [f64]) -> bool {
    let mut sq = 0.0;
    for ((o, a), b) in out.iter_mut().zip(x).zip(v) {
        let diff = a - b;
        *o = diff;
        sq += diff * diff;
    }
    if sq == 0.0 {
        out.iter_mut().for_each(|o| *o = 0.0);
        return false;
    }
    let inv = 1.0 / sq.sqrt();
    out.iter_mut().for_each(|o| *o *= inv);
    true
}

/// Distance between the normalized form of `x` and `target` without
/// materializing the normalized row. A degenerate `x` is treated as the zero
/// vector; the second element reports whether that happened.
#[inline]
pub(crate) fn normalized_distance(x: &[f64], v: &[f64], target: &[f64]) -> (f64, bool) {
    let sq: f64 = x.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
    if sq == 0.0 {
        return (target.iter().map(|t| t * t).sum::<f64>().sqrt(), true);
    }
    let inv = 1.0 / sq.sqrt();
    let dist: f64 = x
        .iter()
        .zip(v)
        .zip(target)
        .map(|((a, b), t)| {
            let e = (a - b) * inv - t;
            e * e
        })
        .sum();
    (dist.sqrt(), false)
}

/// Normalizes every row of `x`. Degenerate rows become zero rows; their count
/// is returned alongside the matrix.
pub(crate) fn normalize_rows(x: &FeatureMatrix, v: &ReferenceVector) -> (FeatureMatrix, usize) {
    let d = x.d();
    let mut data = vec![0.0; x.n() * d];
    let mut degenerate = 0;
    for (row, out) in x.rows().zip(data.chunks_exact_mut(d)) {
        if !normalize_into(row, &v.values, out) {
            degenerate += 1;
        }
    }
    let m = FeatureMatrix::new(data, x.n(), d).expect("normalized rows are finite with the input's shape");
    (m, degenerate)
}
