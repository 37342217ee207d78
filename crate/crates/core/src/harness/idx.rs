//! MNIST IDX reader. Images are flattened row-major and scaled to [0, 1].

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::LabeledFeatureSet;
use crate::matrix::FeatureMatrix;

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;

fn parse_error(path: &Path, offset: u64, message: impl Into<String>) -> Error {
    Error::ParseAtOffset { path: path.to_path_buf(), offset, message: message.into() }
}

fn be_u32(bytes: &[u8], offset: usize, path: &Path, what: &str) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| parse_error(path, offset as u64, format!("file ends before the {what} field")))
}

fn check_magic(bytes: &[u8], expected: u32, path: &Path) -> Result<()> {
    let magic = be_u32(bytes, 0, path, "magic number")?;
    if magic != expected {
        return Err(parse_error(path, 0, format!("magic number {magic:#010x}, expected {expected:#010x}")));
    }
    Ok(())
}

fn check_payload(bytes: &[u8], header: usize, payload: usize, path: &Path) -> Result<()> {
    let needed = header + payload;
    if bytes.len() < needed {
        return Err(parse_error(
            path,
            bytes.len() as u64,
            format!("truncated: header declares {needed} bytes, file has {}", bytes.len()),
        ));
    }
    Ok(())
}

/// Reads an IDX image file and its matching label file.
pub fn read_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<LabeledFeatureSet> {
    let (images_path, labels_path) = (images_path.as_ref(), labels_path.as_ref());
    let images = fs::read(images_path).map_err(|e| Error::io(images_path, e))?;
    let labels = fs::read(labels_path).map_err(|e| Error::io(labels_path, e))?;

    check_magic(&images, IMAGE_MAGIC, images_path)?;
    let n = be_u32(&images, 4, images_path, "image count")? as usize;
    let rows = be_u32(&images, 8, images_path, "row count")? as usize;
    let cols = be_u32(&images, 12, images_path, "column count")? as usize;
    let d = rows * cols;
    if n == 0 || d == 0 {
        return Err(parse_error(images_path, 4, format!("empty image tensor {n}x{rows}x{cols}")));
    }
    check_payload(&images, 16, n * d, images_path)?;

    check_magic(&labels, LABEL_MAGIC, labels_path)?;
    let n_labels = be_u32(&labels, 4, labels_path, "label count")? as usize;
    if n_labels != n {
        return Err(parse_error(labels_path, 4, format!("{n_labels} labels for {n} images")));
    }
    check_payload(&labels, 8, n, labels_path)?;

    let data = images[16..16 + n * d].iter().map(|&p| p as f64 / 255.0).collect();
    let features = FeatureMatrix::new(data, n, d)?;
    let class_id = labels[8..8 + n].iter().map(|&l| l as u32).collect();
    LabeledFeatureSet::new(features, class_id, images_path.display().to_string())
}

/// Writes raw pixels and labels in IDX layout. `pixels` holds `labels.len()`
/// images of `rows * cols` bytes each.
pub fn write_idx(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
    pixels: &[u8],
    labels: &[u8],
    rows: u32,
    cols: u32,
) -> Result<()> {
    let n = labels.len();
    if pixels.len() != n * rows as usize * cols as usize {
        return Err(Error::DimensionMismatch { expected: n * rows as usize * cols as usize, found: pixels.len() });
    }
    let mut img = Vec::with_capacity(16 + pixels.len());
    for field in [IMAGE_MAGIC, n as u32, rows, cols] {
        img.extend_from_slice(&field.to_be_bytes());
    }
    img.extend_from_slice(pixels);
    let mut lab = Vec::with_capacity(8 + n);
    for field in [LABEL_MAGIC, n as u32] {
        lab.extend_from_slice(&field.to_be_bytes());
    }
    lab.extend_from_slice(labels);
    let (images_path, labels_path) = (images_path.as_ref(), labels_path.as_ref());
    fs::write(images_path, img).map_err(|e| Error::io(images_path, e))?;
    fs::write(labels_path, lab).map_err(|e| Error::io(labels_path, e))
}
