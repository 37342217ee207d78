use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use multit::harness::{synth_with, SynthParams};
use multit::{
    enhance_detector, initial_scores, knn_scorer, multi_t_scores, roc_auc, run_multi_t, score_pair, Detector,
    FeatureMatrix, LabelVector, MultiTConfig, ReferenceKind, Regime,
};

fn gaussian_rows(rng: &mut ChaCha8Rng, n: usize, center: &[f64], sigma: f64) -> Vec<Vec<f64>> {
    (0..n).map(|_| center.iter().map(|c| c + sigma * rng.sample::<f64, _>(StandardNormal)).collect()).collect()
}

fn labels_from_classes(class_id: &[u32]) -> LabelVector {
    LabelVector::new(class_id.iter().map(|&c| u8::from(c != 0)).collect()).unwrap()
}

fn planted() -> multit::harness::LabeledFeatureSet {
    // 950 inliers, 50 outliers each in its own direction.
    synth_with(&SynthParams { clusters: 50, ..SynthParams::new(950, 50, 64, 10.0, 21) }).unwrap()
}

#[test]
fn planted_dataset_gives_pure_inliers() {
    let set = planted();
    let t = run_multi_t(&set.features, &MultiTConfig::default()).unwrap();
    let is_out = |i: &&usize| set.class_id[**i] != 0;
    let true_in = t.inlier_idx.iter().filter(|i| !is_out(i)).count();
    let true_out = t.outlier_idx.iter().filter(is_out).count();
    assert!(true_in as f64 / t.inlier_idx.len() as f64 >= 0.99);
    assert_eq!(t.regime, Regime::High);
    // Counts from an independent transcription run on the same rows. The
    // outlier bound sits inside the inlier tail, so 20 inliers land above it.
    assert_eq!((true_in, t.inlier_idx.len()), (858, 860));
    assert_eq!((true_out, t.outlier_idx.len()), (40, 60));
    assert_eq!(t.iterations, 4);
    assert!((t.rho - 0.496100).abs() < 1e-6, "rho {}", t.rho);
}

#[test]
fn two_identical_clusters_select_the_conservative_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let d = 16;
    let a: Vec<f64> = (0..d).map(|j| if j % 2 == 0 { 3.0 } else { 0.0 }).collect();
    let b: Vec<f64> = (0..d).map(|j| if j % 2 == 0 { 0.0 } else { 3.0 }).collect();
    let mut rows = gaussian_rows(&mut rng, 300, &a, 1.0);
    rows.extend(gaussian_rows(&mut rng, 300, &b, 1.0));
    let x = FeatureMatrix::from_rows(&rows).unwrap();
    let t = run_multi_t(&x, &MultiTConfig::default()).unwrap();
    assert_eq!(t.regime, Regime::Low, "rho = {}", t.rho);
    assert!(t.rho < 0.1);
    assert_eq!(t.phi_out, t.phi_out_zero.max(t.phi_in));
    assert!(t.outlier_idx.len() <= 15, "{} predicted outliers", t.outlier_idx.len());
}

#[test]
fn duplicated_rows_keep_scores_and_labels_paired() {
    let set = synth_with(&SynthParams::new(200, 20, 8, 8.0, 4)).unwrap();
    let x = &set.features;
    let n = x.n();
    let mut rows: Vec<&[f64]> = x.rows().collect();
    rows.extend(x.rows());
    let doubled = FeatureMatrix::from_rows(&rows).unwrap();
    let a = run_multi_t(x, &MultiTConfig::default()).unwrap();
    let b = run_multi_t(&doubled, &MultiTConfig::default()).unwrap();
    let close = |p: f64, q: f64| (p - q).abs() <= 1e-12 * p.abs().max(1.0);
    for i in 0..n {
        assert!(close(a.initial_scores[i], b.initial_scores[i]));
        assert_eq!(b.initial_scores[i], b.initial_scores[i + n]);
    }
    assert!(close(a.phi_out_zero, b.phi_out_zero));
    // The fitted line over a doubled staircase crosses at a different rank,
    // so the iterated thresholds are not exactly invariant; a row and its
    // copy always get the same label.
    assert!((a.phi_in - b.phi_in).abs() <= 0.01 * a.phi_in, "{} vs {}", a.phi_in, b.phi_in);
    for set in [&b.inlier_idx, &b.outlier_idx] {
        for i in 0..n {
            assert_eq!(set.binary_search(&i).is_ok(), set.binary_search(&(i + n)).is_ok());
        }
    }
}

fn oracle_initial_scores(rows: &[Vec<f64>]) -> Vec<f64> {
    let d = rows[0].len();
    let n = rows.len() as f64;
    let grand = rows.iter().flatten().sum::<f64>() / (n * d as f64);
    let mean: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let unit = |x: &[f64]| {
        let v: Vec<f64> = x.iter().map(|a| a - grand).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.into_iter().map(|a| a / norm).collect::<Vec<_>>()
    };
    let m = unit(&mean);
    rows.iter().map(|r| unit(r).iter().zip(&m).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()).collect()
}

#[test]
fn far_cluster_scores_above_near_cluster() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let near: Vec<f64> = (0..10).map(|j| j as f64).collect();
    let far: Vec<f64> = near.iter().enumerate().map(|(j, c)| if j % 2 == 0 { c + 6.0 } else { c - 6.0 }).collect();
    let mut rows = gaussian_rows(&mut rng, 90, &near, 0.3);
    rows.extend(gaussian_rows(&mut rng, 10, &far, 0.3));
    let s = initial_scores(&FeatureMatrix::from_rows(&rows).unwrap()).unwrap();
    for (a, b) in s.iter().zip(oracle_initial_scores(&rows)) {
        assert!((a - b).abs() <= 1e-12);
    }
    let near_max = s[..90].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let far_min = s[90..].iter().copied().fold(f64::INFINITY, f64::min);
    assert!(far_min > near_max, "{far_min} <= {near_max}");
}

#[test]
fn shell_score_ranks_planted_outlier_last() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let center: Vec<f64> = (0..8).map(|j| j as f64).collect();
    let mut rows = gaussian_rows(&mut rng, 60, &center, 0.5);
    rows.push(center.iter().map(|c| c + 20.0).collect());
    let x = FeatureMatrix::from_rows(&rows).unwrap();
    let (shell, ergodic) = score_pair(&x, &[60]).unwrap();
    let max = shell.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(shell[60], max);
    assert_eq!(ergodic.as_slice(), initial_scores(&x).unwrap().as_slice());
}

#[test]
fn true_index_sets_improve_auc() {
    let set = synth_with(&SynthParams { clusters: 9, ..SynthParams::new(400, 100, 64, 6.0, 13) }).unwrap();
    let truth = labels_from_classes(&set.class_id);
    let inl: Vec<usize> = (0..400).collect();
    let out: Vec<usize> = (400..500).collect();
    let full = roc_auc(&multi_t_scores(&set.features, &inl, &out).unwrap().scores, &truth).unwrap();
    let base = roc_auc(&initial_scores(&set.features).unwrap(), &truth).unwrap();
    assert!(full >= base, "{full} < {base}");
}

fn raw_knn_auc(x: &FeatureMatrix, truth: &LabelVector) -> f64 {
    let mut raw = knn_scorer(5).unwrap();
    raw.fit(x).unwrap();
    roc_auc(&raw.predict(x).unwrap(), truth).unwrap()
}

#[test]
fn knn_enhanced_with_true_sets_beats_raw_knn() {
    let set = synth_with(&SynthParams { clusters: 3, ..SynthParams::new(300, 60, 32, 5.0, 17) }).unwrap();
    let x = &set.features;
    let truth = labels_from_classes(&set.class_id);
    let inl: Vec<usize> = (0..300).collect();
    let out: Vec<usize> = (300..360).collect();
    let enhanced = enhance_detector(&mut knn_scorer(5).unwrap(), x, &inl, &out).unwrap();
    assert_eq!(enhanced.reference, ReferenceKind::Shell);
    let enhanced_auc = roc_auc(&enhanced.scores, &truth).unwrap();
    let raw_auc = raw_knn_auc(x, &truth);
    assert!(enhanced_auc >= raw_auc, "{enhanced_auc} < {raw_auc}");
}

#[test]
fn knn_enhanced_with_predicted_sets_matches_oracle() {
    // Values from an independent transcription on the same rows. With few
    // dispersed predicted outliers the enhancement does not beat raw kNN.
    let set = planted();
    let x = &set.features;
    let truth = labels_from_classes(&set.class_id);
    let t = run_multi_t(x, &MultiTConfig::default()).unwrap();
    let enhanced = enhance_detector(&mut knn_scorer(5).unwrap(), x, &t.inlier_idx, &t.outlier_idx).unwrap();
    let enhanced_auc = roc_auc(&enhanced.scores, &truth).unwrap();
    assert!((enhanced_auc - 0.896715789474).abs() < 1e-9, "{enhanced_auc}");
    assert_eq!(raw_knn_auc(x, &truth), 1.0);
}

#[test]
fn enhance_with_all_inliers_is_plain_detector_on_ergodic_rows() {
    let set = synth_with(&SynthParams::new(40, 10, 5, 4.0, 1)).unwrap();
    let x = &set.features;
    let all: Vec<usize> = (0..x.n()).collect();
    let out = enhance_detector(&mut knn_scorer(3).unwrap(), x, &all, &[]).unwrap();
    assert_eq!(out.reference, ReferenceKind::Ergodic);

    let v = multit::ergodic_reference(x);
    let rows: Vec<Vec<f64>> = x.rows().map(|r| multit::normalize(r, &v).unwrap()).collect();
    let normalized = FeatureMatrix::from_rows(&rows).unwrap();
    let mut plain = knn_scorer(3).unwrap();
    plain.fit(&normalized).unwrap();
    let expected = plain.predict(&normalized).unwrap();
    for (a, b) in out.scores.iter().zip(expected.iter()) {
        assert!((a - b).abs() <= 1e-12);
    }
}
