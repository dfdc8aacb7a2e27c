//! Dataset ingestion and partitioning.

use std::io::Read;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use super::OracleError;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPoint {
    pub features: Vec<f64>,
    pub label: f64,
}

/// Splits `samples` into `n` contiguous blocks in input order. Block sizes
/// differ by at most one; the remainder goes to the earliest nodes.
pub fn partition_dataset<T>(samples: Vec<T>, n: usize) -> Result<Vec<Vec<T>>, OracleError> {
    if n == 0 || samples.len() < n {
        return Err(OracleError::TooFewSamples {
            needed: n.max(1),
            n,
            got: samples.len(),
        });
    }
    let base = samples.len() / n;
    let extra = samples.len() % n;
    let mut it = samples.into_iter();
    Ok((0..n)
        .map(|i| {
            let size = base + usize::from(i < extra);
            it.by_ref().take(size).collect()
        })
        .collect())
}

/// Maps labels to `{−1, +1}`: `+1` for `positive`, `−1` otherwise.
pub fn to_binary_labels(points: Vec<LabeledPoint>, positive: f64) -> Vec<LabeledPoint> {
    points
        .into_iter()
        .map(|p| LabeledPoint {
            label: if p.label == positive { 1.0 } else { -1.0 },
            ..p
        })
        .collect()
}

/// Two Gaussian blobs in `dim` dimensions with unit covariance and centres
/// `±(separation/2)·1/√dim`. The first half of the output is labelled −1 and
/// the second half +1, so contiguous partitions are label-skewed.
pub fn two_class_gaussian<R: Rng + ?Sized>(
    count: usize,
    dim: usize,
    separation: f64,
    rng: &mut R,
) -> Vec<LabeledPoint> {
    let offset = 0.5 * separation / (dim as f64).sqrt();
    (0..count)
        .map(|k| {
            let label = if k < count / 2 { -1.0 } else { 1.0 };
            let features = (0..dim)
                .map(|_| {
                    let e: f64 = rng.sample(StandardNormal);
                    label * offset + e
                })
                .collect();
            LabeledPoint { features, label }
        })
        .collect()
}

/// Reads rows `label,f1,...,fd`. A first row whose label field is not a
/// number is treated as a header.
pub fn load_csv<R: Read>(reader: R) -> Result<Vec<LabeledPoint>, OracleError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    let mut dim = None;
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| OracleError::Data(e.to_string()))?;
        let mut fields = record.iter();
        let Some(first) = fields.next() else { continue };
        let label = match first.parse::<f64>() {
            Ok(v) => v,
            Err(_) if row == 0 => continue,
            Err(_) => {
                return Err(OracleError::Data(format!(
                    "row {}: label {first:?} is not a number",
                    row + 1
                )))
            }
        };
        let features = fields
            .enumerate()
            .map(|(col, f)| {
                f.parse::<f64>().map_err(|_| {
                    OracleError::Data(format!("row {}, column {}: {f:?} is not a number", row + 1, col + 2))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        match dim {
            None => dim = Some(features.len()),
            Some(d) if d != features.len() => {
                return Err(OracleError::Data(format!(
                    "row {} has {} features, expected {d}",
                    row + 1,
                    features.len()
                )))
            }
            _ => {}
        }
        out.push(LabeledPoint { features, label });
    }
    Ok(out)
}

pub fn load_csv_path(path: &Path) -> Result<Vec<LabeledPoint>, OracleError> {
    let file = std::fs::File::open(path)
        .map_err(|e| OracleError::Data(format!("{}: {e}", path.display())))?;
    load_csv(file)
}

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

fn be_u32(bytes: &[u8], at: usize) -> Result<u32, OracleError> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| OracleError::Data("truncated IDX header".into()))
}

/// Parses an IDX3 image file (MNIST layout). Pixels are scaled to `[0, 1]`
/// and each image is flattened row-major.
pub fn parse_idx_images(bytes: &[u8]) -> Result<Vec<Vec<f64>>, OracleError> {
    let magic = be_u32(bytes, 0)?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(OracleError::Data(format!(
            "bad IDX image magic {magic:#010x}"
        )));
    }
    let count = be_u32(bytes, 4)? as usize;
    let rows = be_u32(bytes, 8)? as usize;
    let cols = be_u32(bytes, 12)? as usize;
    let size = rows * cols;
    let body = &bytes[16..];
    if body.len() != count * size {
        return Err(OracleError::Data(format!(
            "IDX image body has {} bytes, header implies {}",
            body.len(),
            count * size
        )));
    }
    Ok(body
        .chunks_exact(size.max(1))
        .take(count)
        .map(|img| img.iter().map(|&p| f64::from(p) / 255.0).collect())
        .collect())
}

/// Parses an IDX1 label file.
pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>, OracleError> {
    let magic = be_u32(bytes, 0)?;
    if magic != IDX_LABELS_MAGIC {
        return Err(OracleError::Data(format!(
            "bad IDX label magic {magic:#010x}"
        )));
    }
    let count = be_u32(bytes, 4)? as usize;
    let body = &bytes[8..];
    if body.len() != count {
        return Err(OracleError::Data(format!(
            "IDX label body has {} bytes, header implies {count}",
            body.len()
        )));
    }
    Ok(body.to_vec())
}
