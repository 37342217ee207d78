//! Dense containers shared by every stage of the pipeline.
//!
//! Row `i` of a [`FeatureMatrix`] is sample `i` everywhere: score vectors,
//! label vectors and index sets all use the same index space.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major `n x d` matrix of finite `f64` features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: Vec<f64>,
    n: usize,
    d: usize,
}

impl FeatureMatrix {
    pub fn new(data: Vec<f64>, n: usize, d: usize) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidMatrix(format!("shape {n}x{d} has an empty axis")));
        }
        let expected = n.checked_mul(d).ok_or_else(|| Error::InvalidMatrix(format!("shape {n}x{d} overflows")))?;
        if data.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: data.len() });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: pos / d, col: pos % d });
        }
        Ok(Self { data, n, d })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(n * d);
        for row in rows {
            let row = row.as_ref();
            if row.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: row.len() });
            }
            data.extend_from_slice(row);
        }
        Self::new(data, n, d)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.d)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// New matrix holding the given rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Result<Self> {
        check_indices(idx, self.n)?;
        let mut data = Vec::with_capacity(idx.len() * self.d);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self::new(data, idx.len(), self.d)
    }

    /// Every entry multiplied by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        Self::new(self.data.iter().map(|v| v * alpha).collect(), self.n, self.d)
    }
}

/// Per-sample outlier scores; higher means more anomalous.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScoreVector(Vec<f64>);

impl ScoreVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: pos, col: 0 });
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ScoreVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// 0/1 labels: 0 = inlier, 1 = outlier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelVector(Vec<u8>);

impl LabelVector {
    pub fn new(values: Vec<u8>) -> Result<Self> {
        if let Some(pos) = values.iter().position(|&v| v > 1) {
            return Err(Error::InvalidArgument(format!("label at index {pos} is {}, expected 0 or 1", values[pos])));
        }
        Ok(Self(values))
    }

    /// Labels of length `n` with 1 at every listed index.
    pub fn from_outlier_indices(n: usize, outliers: &[usize]) -> Result<Self> {
        check_indices(outliers, n)?;
        let mut values = vec![0u8; n];
        for &i in outliers {
            values[i] = 1;
        }
        Ok(Self(values))
    }

    /// Labels of length `n` with 0 at every listed index and 1 elsewhere.
    pub fn from_inlier_indices(n: usize, inliers: &[usize]) -> Result<Self> {
        check_indices(inliers, n)?;
        let mut values = vec![1u8; n];
        for &i in inliers {
            values[i] = 0;
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn positives(&self) -> usize {
        self.0.iter().filter(|&&v| v == 1).count()
    }

    /// Fraction of outlier labels.
    pub fn outlier_ratio(&self) -> f64 {
        self.positives() as f64 / self.0.len().max(1) as f64
    }
}

impl Deref for LabelVector {
    type Target = [u8];

    fn deref(&self) -> &[u8] {
        &self.0
    }
}

pub(crate) fn check_indices(idx: &[usize], n: usize) -> Result<()> {
    match idx.iter().find(|&&i| i >= n) {
        Some(&index) => Err(Error::IndexOutOfRange { index, len: n }),
        None => Ok(()),
    }
}

/// Per-column mean, accumulated row by row in index order.
pub fn column_mean(x: &FeatureMatrix) -> Vec<f64> {
    let mut acc = vec![0.0; x.d()];
    for row in x.rows() {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += v;
        }
    }
    let inv = 1.0 / x.n() as f64;
    acc.iter_mut().for_each(|a| *a *= inv);
    acc
}

/// Per-column mean over a subset of rows. `idx` must be non-empty and in range.
pub(crate) fn subset_column_mean(x: &FeatureMatrix, idx: &[usize]) -> Vec<f64> {
    debug_assert!(!idx.is_empty());
    let mut acc = vec![0.0; x.d()];
    for &i in idx {
        for (a, v) in acc.iter_mut().zip(x.row(i)) {
            *a += v;
        }
    }
    let inv = 1.0 / idx.len() as f64;
    acc.iter_mut().for_each(|a| *a *= inv);
    acc
}

/// Mean of all `n * d` entries.
pub fn grand_mean(x: &FeatureMatrix) -> f64 {
    x.as_slice().iter().sum::<f64>() / x.as_slice().len() as f64
}

pub fn euclidean_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
}
