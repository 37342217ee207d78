//! Experiment reports and their CSV/JSON serializations.
//!
//! CSV columns (fixed order, see [`CSV_COLUMNS`]):
//!
//! | column | record rows | aggregate rows |
//! |---|---|---|
//! | `row_type` | `record` | `class_mean`, `gamma_mean` or `grand_mean` |
//! | `inlier_class` | class | class for `class_mean`, else empty |
//! | `gamma` | contamination ratio | ratio for `gamma_mean`, else empty |
//! | `rep`, `seed` | repetition and derived cell seed | empty |
//! | `count` | 1 | number of averaged records |
//! | `n`, `n_outliers` | target size and true outliers | empty |
//! | `auc` ... `rho` | metric values | arithmetic means |
//! | `regime`, `iterations`, `wall_time_ms` | per-cell values | empty |
//!
//! Failed cells appear only in the JSON report.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::ExperimentConfig;
use crate::thresholds::Regime;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

pub const CSV_COLUMNS: [&str; 18] = [
    "row_type",
    "inlier_class",
    "gamma",
    "rep",
    "seed",
    "count",
    "n",
    "n_outliers",
    "auc",
    "auc_initial",
    "f01",
    "f10",
    "f01_3sigma",
    "f10_1sigma",
    "rho",
    "regime",
    "iterations",
    "wall_time_ms",
];

/// Metrics of one (class, gamma, repetition) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub inlier_class: u32,
    pub gamma: f64,
    pub rep: usize,
    pub seed: u64,
    pub n: usize,
    pub n_outliers: usize,
    /// AUC of the configured detector.
    pub auc: f64,
    /// AUC of the initial score alone.
    pub auc_initial: f64,
    pub f01: f64,
    pub f10: f64,
    pub f01_3sigma: f64,
    pub f10_1sigma: f64,
    pub rho: f64,
    pub regime: Regime,
    pub iterations: usize,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub inlier_class: u32,
    pub gamma: f64,
    pub rep: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregateScope {
    Class,
    Gamma,
    Grand,
}

impl AggregateScope {
    fn row_type(self) -> &'static str {
        match self {
            AggregateScope::Class => "class_mean",
            AggregateScope::Gamma => "gamma_mean",
            AggregateScope::Grand => "grand_mean",
        }
    }
}

/// Arithmetic means over a group of records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub scope: AggregateScope,
    pub inlier_class: Option<u32>,
    pub gamma: Option<f64>,
    pub count: usize,
    pub auc: f64,
    pub auc_initial: f64,
    pub f01: f64,
    pub f10: f64,
    pub f01_3sigma: f64,
    pub f10_1sigma: f64,
    pub rho: f64,
}

impl Aggregate {
    fn mean_of(
        scope: AggregateScope,
        inlier_class: Option<u32>,
        gamma: Option<f64>,
        records: &[&ExperimentRecord],
    ) -> Self {
        let count = records.len();
        let mean = |f: fn(&ExperimentRecord) -> f64| records.iter().map(|r| f(r)).sum::<f64>() / count as f64;
        Self {
            scope,
            inlier_class,
            gamma,
            count,
            auc: mean(|r| r.auc),
            auc_initial: mean(|r| r.auc_initial),
            f01: mean(|r| r.f01),
            f10: mean(|r| r.f10),
            f01_3sigma: mean(|r| r.f01_3sigma),
            f10_1sigma: mean(|r| r.f10_1sigma),
            rho: mean(|r| r.rho),
        }
    }
}

/// Per-class, per-gamma and grand means. Empty input gives no aggregates.
pub(crate) fn aggregate(records: &[ExperimentRecord]) -> Vec<Aggregate> {
    if records.is_empty() {
        return Vec::new();
    }
    let mut by_class: BTreeMap<u32, Vec<&ExperimentRecord>> = BTreeMap::new();
    let mut by_gamma: BTreeMap<u64, Vec<&ExperimentRecord>> = BTreeMap::new();
    for r in records {
        by_class.entry(r.inlier_class).or_default().push(r);
        // Positive finite f64 bit patterns sort like the values.
        by_gamma.entry(r.gamma.to_bits()).or_default().push(r);
    }
    let mut out: Vec<Aggregate> =
        by_class.iter().map(|(&c, rs)| Aggregate::mean_of(AggregateScope::Class, Some(c), None, rs)).collect();
    out.extend(
        by_gamma.iter().map(|(&g, rs)| Aggregate::mean_of(AggregateScope::Gamma, None, Some(f64::from_bits(g)), rs)),
    );
    let all: Vec<&ExperimentRecord> = records.iter().collect();
    out.push(Aggregate::mean_of(AggregateScope::Grand, None, None, &all));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub source: String,
    pub config: ExperimentConfig,
    pub records: Vec<ExperimentRecord>,
    pub failures: Vec<CellFailure>,
    pub aggregates: Vec<Aggregate>,
}

impl ExperimentReport {
    pub fn new(
        source: String,
        config: ExperimentConfig,
        records: Vec<ExperimentRecord>,
        failures: Vec<CellFailure>,
    ) -> Self {
        let aggregates = aggregate(&records);
        Self { schema_version: REPORT_SCHEMA_VERSION, source, config, records, failures, aggregates }
    }

    pub fn grand_mean(&self) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.scope == AggregateScope::Grand)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::InvalidArgument(format!("unknown report format `{other}` (csv or json)"))),
        }
    }
}

pub fn export_report(report: &ExperimentReport, path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    match format {
        ReportFormat::Json => {
            let mut w = BufWriter::new(file);
            serde_json::to_writer_pretty(&mut w, report)
                .map_err(|e| Error::Serialization { path: path.to_path_buf(), message: e.to_string() })?;
            w.flush().map_err(|e| Error::io(path, e))
        }
        ReportFormat::Csv => write_csv(report, file, path),
    }
}

fn write_csv(report: &ExperimentReport, file: File, path: &Path) -> Result<()> {
    let ser = |e: csv::Error| Error::Serialization { path: path.to_path_buf(), message: e.to_string() };
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(CSV_COLUMNS).map_err(ser)?;
    for r in &report.records {
        let row = [
            "record".to_string(),
            r.inlier_class.to_string(),
            r.gamma.to_string(),
            r.rep.to_string(),
            r.seed.to_string(),
            "1".to_string(),
            r.n.to_string(),
            r.n_outliers.to_string(),
            r.auc.to_string(),
            r.auc_initial.to_string(),
            r.f01.to_string(),
            r.f10.to_string(),
            r.f01_3sigma.to_string(),
            r.f10_1sigma.to_string(),
            r.rho.to_string(),
            r.regime.to_string(),
            r.iterations.to_string(),
            format!("{:.3}", r.wall_time_ms),
        ];
        w.write_record(&row).map_err(ser)?;
    }
    for a in &report.aggregates {
        let row = [
            a.scope.row_type().to_string(),
            a.inlier_class.map(|c| c.to_string()).unwrap_or_default(),
            a.gamma.map(|g| g.to_string()).unwrap_or_default(),
            String::new(),
            String::new(),
            a.count.to_string(),
            String::new(),
            String::new(),
            a.auc.to_string(),
            a.auc_initial.to_string(),
            a.f01.to_string(),
            a.f10.to_string(),
            a.f01_3sigma.to_string(),
            a.f10_1sigma.to_string(),
            a.rho.to_string(),
            String::new(),
            String::new(),
            String::new(),
        ];
        w.write_record(&row).map_err(ser)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_report_json(path: impl AsRef<Path>) -> Result<ExperimentReport> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let report: ExperimentReport = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| Error::Serialization { path: path.to_path_buf(), message: e.to_string() })?;
    if report.schema_version != REPORT_SCHEMA_VERSION {
        return Err(Error::Serialization {
            path: path.to_path_buf(),
            message: format!("schema version {}, expected {REPORT_SCHEMA_VERSION}", report.schema_version),
        });
    }
    Ok(report)
}
