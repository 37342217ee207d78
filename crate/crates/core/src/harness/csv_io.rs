//! Feature CSV: header `class,f0,f1,...`, one sample per row.

use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::LabeledFeatureSet;
use crate::matrix::FeatureMatrix;

fn row_error(path: &Path, row: usize, message: impl Into<String>) -> Error {
    Error::ParseAtRow { path: path.to_path_buf(), row, message: message.into() }
}

/// Reads a feature CSV. Row numbers in errors are 1-based file lines.
pub fn read_features_csv(path: impl AsRef<Path>) -> Result<LabeledFeatureSet> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| row_error(path, 1, e.to_string()))?;
    let header = reader.headers().map_err(|e| row_error(path, 1, e.to_string()))?.clone();
    if header.get(0).map(str::trim) != Some("class") {
        return Err(row_error(path, 1, "header must start with `class`"));
    }
    let d = header.len() - 1;
    if d == 0 {
        return Err(row_error(path, 1, "header has no feature columns"));
    }

    let mut data = Vec::new();
    let mut class_id = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            row_error(path, line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != d + 1 {
            return Err(row_error(path, line, format!("{} fields, expected {}", record.len(), d + 1)));
        }
        let class = record[0]
            .trim()
            .parse::<u32>()
            .map_err(|_| row_error(path, line, format!("class `{}` is not a non-negative integer", &record[0])))?;
        class_id.push(class);
        for (col, cell) in record.iter().skip(1).enumerate() {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| row_error(path, line, format!("column f{col}: `{cell}` is not a number")))?;
            if !v.is_finite() {
                return Err(row_error(path, line, format!("column f{col}: non-finite value `{cell}`")));
            }
            data.push(v);
        }
    }
    if class_id.is_empty() {
        return Err(row_error(path, 2, "no data rows"));
    }
    let features = FeatureMatrix::new(data, class_id.len(), d)?;
    LabeledFeatureSet::new(features, class_id, path.display().to_string())
}

/// Writes a feature CSV using shortest round-trip float formatting, so a
/// re-read gives bitwise-equal values.
pub fn write_features_csv(set: &LabeledFeatureSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let ser = |e: csv::Error| Error::Serialization { path: path.to_path_buf(), message: e.to_string() };
    let mut writer = csv::Writer::from_path(path).map_err(ser)?;
    let mut header = vec!["class".to_string()];
    header.extend((0..set.features.d()).map(|j| format!("f{j}")));
    writer.write_record(&header).map_err(ser)?;
    let mut fields = Vec::with_capacity(set.features.d() + 1);
    for (row, class) in set.features.rows().zip(&set.class_id) {
        fields.clear();
        fields.push(class.to_string());
        fields.extend(row.iter().map(|v| v.to_string()));
        writer.write_record(&fields).map_err(ser)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}
