//! Seeded Gaussian benchmark: one inlier class and several outlier clusters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::{Error, Result};
use crate::harness::LabeledFeatureSet;
use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub n_in: usize,
    pub n_out_pool: usize,
    pub d: usize,
    /// Distance from the inlier center to every outlier cluster center.
    pub spread: f64,
    pub clusters: usize,
    /// Per-coordinate standard deviation of every cluster.
    pub sigma: f64,
    /// Inlier center coordinates are drawn from `U(0, center_range)`.
    pub center_range: f64,
    pub seed: u64,
}

impl SynthParams {
    pub fn new(n_in: usize, n_out_pool: usize, d: usize, spread: f64, seed: u64) -> Self {
        Self { n_in, n_out_pool, d, spread, clusters: 5, sigma: 1.0, center_range: 4.0, seed }
    }
}

/// Class 0 is the inlier Gaussian; classes `1..=clusters` are outlier
/// clusters centered `spread` away in random directions.
pub fn synth_benchmark(n_in: usize, n_out_pool: usize, d: usize, spread: f64, seed: u64) -> Result<LabeledFeatureSet> {
    synth_with(&SynthParams::new(n_in, n_out_pool, d, spread, seed))
}

pub fn synth_with(p: &SynthParams) -> Result<LabeledFeatureSet> {
    if p.n_in == 0 || p.n_out_pool == 0 || p.clusters == 0 || p.d < 2 {
        return Err(Error::InvalidArgument(format!(
            "synthetic set needs n_in, n_out_pool, clusters >= 1 and d >= 2 (got {}, {}, {}, {})",
            p.n_in, p.n_out_pool, p.clusters, p.d
        )));
    }
    if !(p.spread >= 0.0 && p.sigma >= 0.0 && p.center_range >= 0.0) {
        return Err(Error::InvalidArgument("spread, sigma and center_range must be non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let center: Vec<f64> = Uniform::new_inclusive(0.0, p.center_range)
        .expect("range checked above")
        .sample_iter(&mut rng)
        .take(p.d)
        .collect();

    let directions: Vec<Vec<f64>> = (0..p.clusters)
        .map(|_| {
            let mut v: Vec<f64> = (0..p.d).map(|_| rng.sample(StandardNormal)).collect();
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            v.iter_mut().for_each(|a| *a /= norm);
            v
        })
        .collect();

    let n = p.n_in + p.n_out_pool;
    let mut data = Vec::with_capacity(n * p.d);
    let mut class_id = Vec::with_capacity(n);
    for _ in 0..p.n_in {
        data.extend(center.iter().map(|c| c + p.sigma * rng.sample::<f64, _>(StandardNormal)));
    }
    class_id.resize(p.n_in, 0);
    for _ in 0..p.n_out_pool {
        let k = rng.random_range(0..p.clusters);
        let dir = &directions[k];
        data.extend(
            center.iter().zip(dir).map(|(c, u)| c + p.spread * u + p.sigma * rng.sample::<f64, _>(StandardNormal)),
        );
        class_id.push(k as u32 + 1);
    }
    let features = FeatureMatrix::new(data, n, p.d)?;
    LabeledFeatureSet::new(features, class_id, format!("synthetic(spread={}, seed={})", p.spread, p.seed))
}
