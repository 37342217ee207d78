use std::error::Error;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::Serialize;

use multit::harness::{
    export_report, read_features_csv, read_idx, run_experiment, synth_with, write_features_csv, DetectorChoice,
    ExperimentConfig, LabeledFeatureSet, ReportFormat, SynthParams, DEFAULT_SEEDS_PER_CELL,
};
use multit::{
    enhance_detector, knn_scorer, multi_t_scores, run_multi_t, CentroidDetector, Detector, MultiTConfig, ScoreVector,
    ThresholdResult,
};

type CliResult<T = ()> = Result<T, Box<dyn Error>>;

#[derive(Parser)]
#[command(name = "multit", version, about = "Multiple-threshold outlier scoring and benchmarking")]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score an unlabeled feature set and report thresholds and predicted sets.
    Score(ScoreArgs),
    /// Run the (class, gamma, seed) benchmark grid on a labeled feature set.
    Bench(BenchArgs),
    /// Generate a synthetic labeled feature set as CSV.
    Synth(SynthArgs),
    /// Convert IDX image/label files to feature CSV.
    Convert(ConvertArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Feature CSV with header `class,f0,f1,...`.
    #[arg(long, conflicts_with_all = ["images", "labels"])]
    features: Option<PathBuf>,
    /// IDX image file (requires --labels).
    #[arg(long, requires = "labels")]
    images: Option<PathBuf>,
    /// IDX label file (requires --images).
    #[arg(long, requires = "images")]
    labels: Option<PathBuf>,
}

impl InputArgs {
    fn load(&self) -> CliResult<LabeledFeatureSet> {
        let set = match (&self.features, &self.images, &self.labels) {
            (Some(f), _, _) => read_features_csv(f)?,
            (None, Some(i), Some(l)) => read_idx(i, l)?,
            _ => return Err("give --features, or --images with --labels".into()),
        };
        info!("loaded {} rows x {} features from {}", set.features.n(), set.features.d(), set.source);
        Ok(set)
    }
}

#[derive(Args)]
struct DetectorArgs {
    /// multi-t, knn, centroid, knn+multi-t or centroid+multi-t.
    #[arg(long, default_value = "multi-t")]
    detector: String,
    /// Neighbour count for the knn detectors.
    #[arg(long, default_value_t = 5)]
    knn_k: usize,
    #[arg(long, default_value_t = MultiTConfig::default().max_iter)]
    max_iter: usize,
}

#[derive(Args)]
struct ScoreArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    detector: DetectorArgs,
    /// csv (one row per sample) or json (thresholds, sets and scores).
    #[arg(long, default_value = "json")]
    format: String,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    detector: DetectorArgs,
    /// Comma-separated contamination ratios.
    #[arg(long, value_delimiter = ',', default_values_t = [0.05, 0.1, 0.2, 0.3, 0.4])]
    gamma_grid: Vec<f64>,
    /// Comma-separated inlier classes; all classes when omitted.
    #[arg(long, value_delimiter = ',')]
    classes: Vec<u32>,
    /// Master seed; every cell seed is derived from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_SEEDS_PER_CELL)]
    seeds_per_cell: usize,
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 1000)]
    n_in: usize,
    #[arg(long, default_value_t = 2000)]
    n_out_pool: usize,
    #[arg(long, default_value_t = 64)]
    d: usize,
    /// Distance between the inlier center and each outlier cluster center.
    #[arg(long, default_value_t = 10.0)]
    spread: f64,
    #[arg(long, default_value_t = 5)]
    clusters: usize,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ConvertArgs {
    #[arg(long)]
    images: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct ScoreOutput<'a> {
    detector: &'a str,
    thresholds: &'a ThresholdResult,
    scores: &'a ScoreVector,
}

fn writer(out: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| format!("{}: {e}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn score(args: &ScoreArgs) -> CliResult {
    let format: ReportFormat = args.format.parse()?;
    let choice = DetectorChoice::parse(&args.detector.detector, args.detector.knn_k)?;
    let set = args.input.load()?;
    let x = &set.features;
    let t = run_multi_t(x, &MultiTConfig { max_iter: args.detector.max_iter })?;
    let raw = |d: &mut dyn Detector| -> multit::Result<ScoreVector> {
        d.fit(x)?;
        d.predict(x)
    };
    let scores = match choice {
        DetectorChoice::MultiT => multi_t_scores(x, &t.inlier_idx, &t.outlier_idx)?.scores,
        DetectorChoice::Knn { k } => raw(&mut knn_scorer(k)?)?,
        DetectorChoice::Centroid => raw(&mut CentroidDetector::new())?,
        DetectorChoice::KnnMultiT { k } => {
            enhance_detector(&mut knn_scorer(k)?, x, &t.inlier_idx, &t.outlier_idx)?.scores
        }
        DetectorChoice::CentroidMultiT => {
            enhance_detector(&mut CentroidDetector::new(), x, &t.inlier_idx, &t.outlier_idx)?.scores
        }
    };
    info!(
        "phi_in = {:.6}, phi_out = {:.6}, rho = {:.4} ({}), {} inliers, {} outliers",
        t.phi_in,
        t.phi_out,
        t.rho,
        t.regime,
        t.inlier_idx.len(),
        t.outlier_idx.len()
    );

    let mut w = writer(&args.out)?;
    match format {
        ReportFormat::Json => {
            let out = ScoreOutput { detector: choice.label(), thresholds: &t, scores: &scores };
            serde_json::to_writer_pretty(&mut w, &out)?;
            writeln!(w)?;
        }
        ReportFormat::Csv => {
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record(["index", "initial_score", "score", "predicted"])?;
            for i in 0..x.n() {
                let s0 = t.initial_scores[i];
                let predicted = if s0 <= t.phi_in {
                    "inlier"
                } else if s0 > t.phi_out {
                    "outlier"
                } else {
                    "undecided"
                };
                csv.write_record([i.to_string(), s0.to_string(), scores[i].to_string(), predicted.to_string()])?;
            }
            csv.flush()?;
            return Ok(());
        }
    }
    w.flush()?;
    Ok(())
}

fn bench(args: &BenchArgs) -> CliResult {
    let format: ReportFormat = args.format.parse()?;
    let config = ExperimentConfig {
        classes: args.classes.clone(),
        gammas: args.gamma_grid.clone(),
        seeds_per_cell: args.seeds_per_cell,
        master_seed: args.seed,
        detector: DetectorChoice::parse(&args.detector.detector, args.detector.knn_k)?,
        max_iter: args.detector.max_iter,
    };
    let set = args.input.load()?;
    let report = run_experiment(&set, &config)?;
    export_report(&report, &args.out, format)?;
    if let Some(g) = report.grand_mean() {
        eprintln!(
            "{} cells, {} failed; grand mean AUC {:.4} (initial {:.4}), F0.1 {:.4}, F10 {:.4}",
            report.records.len() + report.failures.len(),
            report.failures.len(),
            g.auc,
            g.auc_initial,
            g.f01,
            g.f10
        );
    }
    if !report.failures.is_empty() {
        eprintln!("{} cells failed; see the report for details", report.failures.len());
    }
    Ok(())
}

fn synth(args: &SynthArgs) -> CliResult {
    let params = SynthParams {
        clusters: args.clusters,
        sigma: args.sigma,
        ..SynthParams::new(args.n_in, args.n_out_pool, args.d, args.spread, args.seed)
    };
    let set = synth_with(&params)?;
    write_features_csv(&set, &args.out)?;
    Ok(())
}

fn convert(args: &ConvertArgs) -> CliResult {
    let set = read_idx(&args.images, &args.labels)?;
    write_features_csv(&set, &args.out)?;
    info!("wrote {} rows to {}", set.features.n(), args.out.display());
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
    let result = match &cli.command {
        Command::Score(a) => score(a),
        Command::Bench(a) => bench(a),
        Command::Synth(a) => synth(a),
        Command::Convert(a) => convert(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
