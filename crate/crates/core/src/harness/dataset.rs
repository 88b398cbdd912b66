//! Dataset files.
//!
//! Binary layout, little-endian, no padding:
//!
//! ```text
//! "CSAL"  u32 version=1  u32 n  u32 d  u32 C  u32 has_labels
//! n·d f32 values, row-major
//! n u32 labels (only when has_labels = 1)
//! ```
//!
//! CSV files have a header `f0,…,f{d−1}[,label]`; the class count is one
//! more than the largest label.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::FeatureSet;

pub const MAGIC: &[u8; 4] = b"CSAL";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    Binary,
    Csv,
}

impl DatasetFormat {
    /// CSV for a `.csv` extension, binary otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => DatasetFormat::Csv,
            _ => DatasetFormat::Binary,
        }
    }
}

pub fn encode_binary(features: &FeatureSet) -> Vec<u8> {
    let n = features.len();
    let labels = features.labels();
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * n * (features.dim() + 1));
    out.extend_from_slice(MAGIC);
    for v in [
        VERSION,
        n as u32,
        features.dim() as u32,
        features.num_classes() as u32,
        labels.is_some() as u32,
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for &v in features.points() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    if let Some(labels) = labels {
        for &y in labels {
            out.extend_from_slice(&y.to_le_bytes());
        }
    }
    out
}

fn u32_at(bytes: &[u8], offset: usize) -> u32 {
    u32::from_le_bytes(bytes[offset..offset + 4].try_into().expect("4 bytes"))
}

pub fn decode_binary(bytes: &[u8]) -> Result<FeatureSet> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(Error::BadMagic {
            found: bytes[..bytes.len().min(4)].to_vec(),
        });
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated {
            expected: HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    let version = u32_at(bytes, 4);
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let n = u32_at(bytes, 8) as u64;
    let d = u32_at(bytes, 12) as u64;
    let c = u32_at(bytes, 16) as usize;
    let has_labels = match u32_at(bytes, 20) {
        0 => false,
        1 => true,
        other => {
            return Err(Error::Format(format!(
                "has_labels must be 0 or 1, found {other}"
            )))
        }
    };
    let expected = HEADER_LEN as u64 + 4 * n * d + if has_labels { 4 * n } else { 0 };
    let found = bytes.len() as u64;
    if found < expected {
        return Err(Error::Truncated { expected, found });
    }
    if found > expected {
        return Err(Error::Format(format!(
            "{} trailing bytes after the dataset",
            found - expected
        )));
    }
    let values_end = HEADER_LEN + 4 * (n * d) as usize;
    let points = bytes[HEADER_LEN..values_end]
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes")))
        .collect();
    let labels = has_labels.then(|| {
        bytes[values_end..]
            .chunks_exact(4)
            .map(|b| u32::from_le_bytes(b.try_into().expect("4 bytes")))
            .collect()
    });
    FeatureSet::new(points, d as usize, labels, c)
}

pub fn write_csv<W: Write>(features: &FeatureSet, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let labels = features.labels();
    let mut header: Vec<String> = (0..features.dim()).map(|k| format!("f{k}")).collect();
    if labels.is_some() {
        header.push("label".into());
    }
    w.write_record(&header)?;
    for i in 0..features.len() {
        let mut record: Vec<String> = features.row(i).iter().map(|v| v.to_string()).collect();
        if let Some(labels) = labels {
            record.push(labels[i].to_string());
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(bytes: &[u8]) -> Result<FeatureSet> {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers()?.clone();
    let mut has_labels = false;
    for (k, name) in header.iter().enumerate() {
        if name == "label" && k + 1 == header.len() {
            has_labels = true;
        } else if name != format!("f{k}") {
            return Err(Error::Format(format!(
                "unexpected CSV column `{name}` at position {k}"
            )));
        }
    }
    let d = header.len() - has_labels as usize;
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (row, record) in r.records().enumerate() {
        let record = record?;
        for k in 0..d {
            let v: f32 = record[k].trim().parse().map_err(|_| {
                Error::Format(format!(
                    "row {row}, column f{k}: `{}` is not a number",
                    &record[k]
                ))
            })?;
            points.push(v);
        }
        if has_labels {
            let y: u32 = record[d].trim().parse().map_err(|_| {
                Error::Format(format!(
                    "row {row}: label `{}` is not a class index",
                    &record[d]
                ))
            })?;
            labels.push(y);
        }
    }
    let num_classes = labels.iter().max().map_or(0, |&m| m as usize + 1);
    FeatureSet::new(points, d, has_labels.then_some(labels), num_classes)
}

/// Loads a dataset. Files starting with the binary magic are read as binary;
/// otherwise a `.csv` extension selects CSV.
pub fn load_dataset(path: &Path) -> Result<FeatureSet> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(MAGIC) || DatasetFormat::from_path(path) == DatasetFormat::Binary {
        decode_binary(&bytes)
    } else {
        read_csv(&bytes)
    }
}

/// Saves in the format implied by the extension.
pub fn save_dataset(path: &Path, features: &FeatureSet) -> Result<()> {
    match DatasetFormat::from_path(path) {
        DatasetFormat::Binary => fs::write(path, encode_binary(features))?,
        DatasetFormat::Csv => {
            let mut buf = Vec::new();
            write_csv(features, &mut buf)?;
            fs::write(path, buf)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FeatureSet {
        FeatureSet::new(
            vec![0.1, -2.5, 3.0, 1e-7, f32::MAX, -0.0],
            2,
            Some(vec![0, 2, 1]),
            3,
        )
        .unwrap()
    }

    #[test]
    fn binary_round_trip() {
        let f = sample();
        let bytes = encode_binary(&f);
        assert_eq!(bytes.len(), 24 + 6 * 4 + 3 * 4);
        let g = decode_binary(&bytes).unwrap();
        assert_eq!(
            f.points().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            g.points().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        assert_eq!(f, g);
    }

    #[test]
    fn csv_round_trip() {
        let f = sample();
        let mut buf = Vec::new();
        write_csv(&f, &mut buf).unwrap();
        assert!(buf.starts_with(b"f0,f1,label\n"));
        assert_eq!(read_csv(&buf).unwrap(), f);
    }

    #[test]
    fn unlabeled_round_trip() {
        let f = FeatureSet::new(vec![1.0, 2.0], 1, None, 0).unwrap();
        assert_eq!(decode_binary(&encode_binary(&f)).unwrap(), f);
        let mut buf = Vec::new();
        write_csv(&f, &mut buf).unwrap();
        assert_eq!(read_csv(&buf).unwrap(), f);
    }

    #[test]
    fn malformed_binary() {
        let bytes = encode_binary(&sample());
        assert!(matches!(
            decode_binary(b"NOPE1234"),
            Err(Error::BadMagic { .. })
        ));
        assert!(matches!(
            decode_binary(&bytes[..bytes.len() - 1]),
            Err(Error::Truncated { .. })
        ));
        assert!(matches!(
            decode_binary(&bytes[..10]),
            Err(Error::Truncated { .. })
        ));
        let mut v2 = bytes.clone();
        v2[4] = 2;
        assert!(matches!(
            decode_binary(&v2),
            Err(Error::UnsupportedVersion(2))
        ));
        let mut bad_label = bytes.clone();
        let at = bad_label.len() - 4;
        bad_label[at] = 3;
        assert!(matches!(
            decode_binary(&bad_label),
            Err(Error::InvalidFeatures(_))
        ));
        let mut nan = bytes.clone();
        nan[24..28].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(
            decode_binary(&nan),
            Err(Error::InvalidFeatures(_))
        ));
        let mut extra = bytes;
        extra.push(0);
        assert!(matches!(decode_binary(&extra), Err(Error::Format(_))));
    }

    #[test]
    fn malformed_csv() {
        assert!(read_csv(b"f0,x\n1,2\n").is_err());
        assert!(read_csv(b"f0,label\nabc,1\n").is_err());
        assert!(read_csv(b"f0,label\n1.0,-1\n").is_err());
        assert!(read_csv(b"f0\ninf\n").is_err());
    }
}
