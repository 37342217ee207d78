//! Data ingestion, target-dataset construction and experiment grids.

mod csv_io;
mod experiment;
mod idx;
mod report;
mod synth;
mod target;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

pub use csv_io::{read_features_csv, write_features_csv};
pub use experiment::{
    ablation, cell_seed, run_experiment, AblationRecord, DetectorChoice, ExperimentConfig, DEFAULT_GAMMA_GRID,
    DEFAULT_SEEDS_PER_CELL,
};
pub use idx::{read_idx, write_idx};
pub use report::{
    export_report, read_report_json, Aggregate, AggregateScope, CellFailure, ExperimentRecord, ExperimentReport,
    ReportFormat, CSV_COLUMNS, REPORT_SCHEMA_VERSION,
};
pub use synth::{synth_benchmark, synth_with, SynthParams};
pub use target::{build_target, outlier_count};

/// Feature rows with one class label each.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledFeatureSet {
    pub features: FeatureMatrix,
    pub class_id: Vec<u32>,
    pub source: String,
}

impl LabeledFeatureSet {
    pub fn new(features: FeatureMatrix, class_id: Vec<u32>, source: impl Into<String>) -> Result<Self> {
        if class_id.len() != features.n() {
            return Err(Error::DimensionMismatch { expected: features.n(), found: class_id.len() });
        }
        Ok(Self { features, class_id, source: source.into() })
    }

    /// Distinct class labels, ascending.
    pub fn classes(&self) -> Vec<u32> {
        self.class_id.iter().copied().collect::<BTreeSet<_>>().into_iter().collect()
    }

    pub fn class_size(&self, class: u32) -> usize {
        self.class_id.iter().filter(|&&c| c == class).count()
    }
}

/// One target dataset: an inlier class contaminated at ratio `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetDatasetSpec {
    pub inlier_class: u32,
    pub gamma: f64,
    pub seed: u64,
}

impl TargetDatasetSpec {
    pub fn new(inlier_class: u32, gamma: f64, seed: u64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidArgument(format!("gamma must lie in (0, 1), got {gamma}")));
        }
        Ok(Self { inlier_class, gamma, seed })
    }
}
