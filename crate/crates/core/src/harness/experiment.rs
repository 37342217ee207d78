//! Grid runner over (inlier class, contamination ratio, repetition) cells.

use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{f_beta, k_sigma_labels, roc_auc};
use crate::harness::report::{CellFailure, ExperimentRecord, ExperimentReport};
use crate::harness::{build_target, LabeledFeatureSet, TargetDatasetSpec};
use crate::matrix::{FeatureMatrix, LabelVector, ScoreVector};
use crate::scoring::{enhance_detector, knn_scorer, multi_t_scores, CentroidDetector, Detector};
use crate::thresholds::{run_multi_t, MultiTConfig, Regime};

pub const DEFAULT_GAMMA_GRID: [f64; 5] = [0.05, 0.1, 0.2, 0.3, 0.4];
pub const DEFAULT_SEEDS_PER_CELL: usize = 3;

/// Which score is evaluated by AUC. Thresholding metrics always come from
/// the initial score's thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum DetectorChoice {
    MultiT,
    Knn { k: usize },
    Centroid,
    KnnMultiT { k: usize },
    CentroidMultiT,
}

impl DetectorChoice {
    /// Parses the command-line names `multi-t`, `knn`, `centroid`,
    /// `knn+multi-t` and `centroid+multi-t`.
    pub fn parse(name: &str, knn_k: usize) -> Result<Self> {
        match name {
            "multi-t" => Ok(DetectorChoice::MultiT),
            "knn" => Ok(DetectorChoice::Knn { k: knn_k }),
            "centroid" => Ok(DetectorChoice::Centroid),
            "knn+multi-t" => Ok(DetectorChoice::KnnMultiT { k: knn_k }),
            "centroid+multi-t" => Ok(DetectorChoice::CentroidMultiT),
            other => Err(Error::InvalidArgument(format!(
                "unknown detector `{other}` (multi-t, knn, centroid, knn+multi-t, centroid+multi-t)"
            ))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            DetectorChoice::MultiT => "multi-t",
            DetectorChoice::Knn { .. } => "knn",
            DetectorChoice::Centroid => "centroid",
            DetectorChoice::KnnMultiT { .. } => "knn+multi-t",
            DetectorChoice::CentroidMultiT => "centroid+multi-t",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Inlier classes to run; empty means every class in the set.
    pub classes: Vec<u32>,
    pub gammas: Vec<f64>,
    pub seeds_per_cell: usize,
    pub master_seed: u64,
    pub detector: DetectorChoice,
    pub max_iter: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            classes: Vec::new(),
            gammas: DEFAULT_GAMMA_GRID.to_vec(),
            seeds_per_cell: DEFAULT_SEEDS_PER_CELL,
            master_seed: 0,
            detector: DetectorChoice::MultiT,
            max_iter: MultiTConfig::default().max_iter,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one cell: the master seed, class, gamma bits and repetition
/// folded in that order through SplitMix64.
pub fn cell_seed(master: u64, class: u32, gamma: f64, rep: usize) -> u64 {
    let mut h = splitmix64(master);
    for word in [class as u64, gamma.to_bits(), rep as u64] {
        h = splitmix64(h ^ word);
    }
    h
}

fn detector_scores(
    choice: DetectorChoice,
    x: &FeatureMatrix,
    inliers: &[usize],
    outliers: &[usize],
) -> Result<ScoreVector> {
    let raw = |d: &mut dyn Detector| -> Result<ScoreVector> {
        d.fit(x)?;
        d.predict(x)
    };
    match choice {
        DetectorChoice::MultiT => Ok(multi_t_scores(x, inliers, outliers)?.scores),
        DetectorChoice::Knn { k } => raw(&mut knn_scorer(k)?),
        DetectorChoice::Centroid => raw(&mut CentroidDetector::new()),
        DetectorChoice::KnnMultiT { k } => Ok(enhance_detector(&mut knn_scorer(k)?, x, inliers, outliers)?.scores),
        DetectorChoice::CentroidMultiT => {
            Ok(enhance_detector(&mut CentroidDetector::new(), x, inliers, outliers)?.scores)
        }
    }
}

fn run_cell(
    set: &LabeledFeatureSet,
    config: &ExperimentConfig,
    class: u32,
    gamma: f64,
    rep: usize,
) -> Result<ExperimentRecord> {
    let start = Instant::now();
    let seed = cell_seed(config.master_seed, class, gamma, rep);
    let (x, truth) = build_target(set, &TargetDatasetSpec::new(class, gamma, seed)?)?;
    let t = run_multi_t(&x, &MultiTConfig { max_iter: config.max_iter })?;
    let scores = detector_scores(config.detector, &x, &t.inlier_idx, &t.outlier_idx)?;
    let s = &t.initial_scores;
    let n = x.n();
    let record = ExperimentRecord {
        inlier_class: class,
        gamma,
        rep,
        seed,
        n,
        n_outliers: truth.positives(),
        auc: roc_auc(&scores, &truth)?,
        auc_initial: roc_auc(s, &truth)?,
        f01: f_beta(&LabelVector::from_outlier_indices(n, &t.outlier_idx)?, &truth, 0.1)?,
        f10: f_beta(&LabelVector::from_inlier_indices(n, &t.inlier_idx)?, &truth, 10.0)?,
        f01_3sigma: f_beta(&k_sigma_labels(s, 3.0)?, &truth, 0.1)?,
        f10_1sigma: f_beta(&k_sigma_labels(s, 1.0)?, &truth, 10.0)?,
        rho: t.rho,
        regime: t.regime,
        iterations: t.iterations,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    Ok(record)
}

/// Runs every (class, gamma, repetition) cell. Cells run in parallel; the
/// report lists them in grid order regardless of completion order. A failing
/// cell is recorded in `failures` and the run continues.
pub fn run_experiment(set: &LabeledFeatureSet, config: &ExperimentConfig) -> Result<ExperimentReport> {
    if config.gammas.is_empty() || config.gammas.iter().any(|g| !(*g > 0.0 && *g < 1.0)) {
        return Err(Error::InvalidArgument(format!(
            "gamma grid must be non-empty and inside (0, 1): {:?}",
            config.gammas
        )));
    }
    if config.seeds_per_cell == 0 || config.max_iter == 0 {
        return Err(Error::InvalidArgument("seeds_per_cell and max_iter must be at least 1".into()));
    }
    let present = set.classes();
    let classes = if config.classes.is_empty() { present.clone() } else { config.classes.clone() };
    if let Some(c) = classes.iter().find(|c| !present.contains(c)) {
        return Err(Error::InvalidArgument(format!("class {c} does not occur in {}", set.source)));
    }

    let cells: Vec<(u32, f64, usize)> = classes
        .iter()
        .flat_map(|&c| config.gammas.iter().flat_map(move |&g| (0..config.seeds_per_cell).map(move |r| (c, g, r))))
        .collect();
    info!("running {} cells on {} ({})", cells.len(), set.source, config.detector.label());

    let results: Vec<_> = cells.par_iter().map(|&(c, g, r)| ((c, g, r), run_cell(set, config, c, g, r))).collect();

    let mut records = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for ((class, gamma, rep), result) in results {
        match result {
            Ok(record) => records.push(record),
            Err(e) => {
                warn!("cell class={class} gamma={gamma} rep={rep} failed: {e}");
                let seed = cell_seed(config.master_seed, class, gamma, rep);
                failures.push(CellFailure { inlier_class: class, gamma, rep, seed, error: e.to_string() });
            }
        }
    }
    Ok(ExperimentReport::new(set.source.clone(), config.clone(), records, failures))
}

/// AUCs of the full score, the score without the Shell reference, and the
/// initial score on one labeled target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRecord {
    pub auc_full: f64,
    pub auc_without_shell: f64,
    pub auc_initial: f64,
    pub rho: f64,
    pub regime: Regime,
}

pub fn ablation(x: &FeatureMatrix, truth: &LabelVector, config: &MultiTConfig) -> Result<AblationRecord> {
    let t = run_multi_t(x, config)?;
    let full = multi_t_scores(x, &t.inlier_idx, &t.outlier_idx)?;
    let without_shell = multi_t_scores(x, &t.inlier_idx, &[])?;
    Ok(AblationRecord {
        auc_full: roc_auc(&full.scores, truth)?,
        auc_without_shell: roc_auc(&without_shell.scores, truth)?,
        auc_initial: roc_auc(&t.initial_scores, truth)?,
        rho: t.rho,
        regime: t.regime,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::synth_benchmark;

    #[test]
    fn cell_seeds_differ_per_coordinate() {
        let base = cell_seed(1, 0, 0.1, 0);
        assert_eq!(base, cell_seed(1, 0, 0.1, 0));
        for other in
            [cell_seed(2, 0, 0.1, 0), cell_seed(1, 1, 0.1, 0), cell_seed(1, 0, 0.2, 0), cell_seed(1, 0, 0.1, 1)]
        {
            assert_ne!(base, other);
        }
    }

    #[test]
    fn detector_names_parse() {
        for name in ["multi-t", "knn", "centroid", "knn+multi-t", "centroid+multi-t"] {
            assert_eq!(DetectorChoice::parse(name, 5).unwrap().label(), name);
        }
        assert!(DetectorChoice::parse("lof", 5).is_err());
    }

    #[test]
    fn single_cell_report() {
        let set = synth_benchmark(60, 60, 8, 6.0, 3).unwrap();
        let config = ExperimentConfig { classes: vec![0], gammas: vec![0.2], seeds_per_cell: 1, ..Default::default() };
        let report = run_experiment(&set, &config).unwrap();
        assert_eq!(report.records.len(), 1);
        assert!(report.failures.is_empty());
        let r = &report.records[0];
        for a in &report.aggregates {
            assert_eq!(a.count, 1);
            assert_eq!(a.auc, r.auc);
            assert_eq!(a.f10, r.f10);
        }
    }

    #[test]
    fn failing_cells_are_recorded() {
        // Class 1 has 12 rows; the rest of the pool cannot reach gamma = 0.9.
        let set = synth_benchmark(40, 12, 4, 3.0, 1).unwrap();
        let config =
            ExperimentConfig { classes: vec![0], gammas: vec![0.1, 0.9], seeds_per_cell: 1, ..Default::default() };
        let report = run_experiment(&set, &config).unwrap();
        assert_eq!(report.records.len(), 1);
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].gamma, 0.9);
        assert!(run_experiment(&set, &ExperimentConfig { classes: vec![99], ..config.clone() }).is_err());
        assert!(run_experiment(&set, &ExperimentConfig { gammas: vec![1.0], ..config }).is_err());
    }
}
