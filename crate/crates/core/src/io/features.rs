//! Feature-batch files: headed CSV and the little-endian `GMCF` binary layout.
//!
//! ```text
//! offset  size     field
//! 0       4        magic "GMCF"
//! 4       2        version (u16) = 1
//! 6       4        N (u32)
//! 10      4        D (u32)
//! 14      1        has_labels (0 or 1)
//! 15      8·N·D    row-major f64
//! ...     4·N      u32 labels, only when has_labels = 1
//! ```

use std::collections::HashMap;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::types::{validate_batch, FeatureBatch};

pub const GMCF_MAGIC: &[u8; 4] = b"GMCF";
pub const GMCF_VERSION: u16 = 1;
const HEADER_LEN: usize = 15;

/// Reads a CSV or GMCF file, chosen by the leading magic bytes.
pub fn read_feature_batch(path: impl AsRef<Path>) -> Result<FeatureBatch> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(Error::io(path))?;
    if bytes.starts_with(GMCF_MAGIC) {
        decode_gmcf(&bytes)
    } else {
        parse_csv(&bytes, &path.display().to_string())
    }
}

pub fn encode_gmcf(batch: &FeatureBatch) -> Vec<u8> {
    let (n, d) = (batch.n_samples(), batch.dim());
    let labels = batch.labels();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * n * d + labels.map_or(0, |l| 4 * l.len()));
    out.extend_from_slice(GMCF_MAGIC);
    out.extend_from_slice(&GMCF_VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&(d as u32).to_le_bytes());
    out.push(u8::from(labels.is_some()));
    for v in batch.to_row_major() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for &l in labels.unwrap_or(&[]) {
        out.extend_from_slice(&l.to_le_bytes());
    }
    out
}

pub fn write_gmcf(path: impl AsRef<Path>, batch: &FeatureBatch) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_gmcf(batch)).map_err(Error::io(path))
}

fn format_at(offset: usize, message: impl Into<String>) -> Error {
    Error::Format {
        location: format!("byte {offset}"),
        message: message.into(),
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take<const K: usize>(&mut self, what: &str) -> Result<[u8; K]> {
        let chunk = self
            .bytes
            .get(self.pos..self.pos + K)
            .ok_or_else(|| format_at(self.pos, format!("truncated while reading {what}")))?;
        self.pos += K;
        Ok(chunk.try_into().expect("slice length checked"))
    }
}

pub fn decode_gmcf(bytes: &[u8]) -> Result<FeatureBatch> {
    let mut c = Cursor { bytes, pos: 0 };
    if &c.take::<4>("magic")? != GMCF_MAGIC {
        return Err(format_at(0, "missing GMCF magic"));
    }
    let version = u16::from_le_bytes(c.take("version")?);
    if version != GMCF_VERSION {
        return Err(format_at(4, format!("unsupported version {version}")));
    }
    let n = u32::from_le_bytes(c.take("N")?) as usize;
    let d = u32::from_le_bytes(c.take("D")?) as usize;
    let has_labels = match c.take::<1>("has_labels")?[0] {
        0 => false,
        1 => true,
        other => return Err(format_at(14, format!("has_labels must be 0 or 1, got {other}"))),
    };
    if n == 0 || d == 0 {
        return Err(Error::EmptyBatch);
    }
    let expected = (n as u128) * (d as u128) * 8 + if has_labels { 4 * n as u128 } else { 0 };
    let available = (bytes.len() - HEADER_LEN) as u128;
    if available < expected {
        return Err(format_at(
            bytes.len(),
            format!("truncated payload: need {expected} bytes after header, found {available}"),
        ));
    }
    if available > expected {
        return Err(format_at(
            HEADER_LEN + expected as usize,
            "trailing bytes after payload",
        ));
    }
    let mut row_major = Vec::with_capacity(n * d);
    for _ in 0..n * d {
        row_major.push(f64::from_le_bytes(c.take("data")?));
    }
    let labels = if has_labels {
        Some(
            (0..n)
                .map(|_| c.take("labels").map(u32::from_le_bytes))
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    FeatureBatch::new(DMatrix::from_row_slice(n, d, &row_major), labels)
}

/// Parses headed CSV. A first column named `label` holds class labels: all
/// non-negative integers are kept as is, anything else is mapped to dense ids
/// in order of first appearance.
pub fn parse_csv(bytes: &[u8], source: &str) -> Result<FeatureBatch> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes);
    let csv_err = |e: csv::Error| {
        let line = e.position().map_or(0, |p| p.line());
        Error::Format {
            location: format!("{source}:{line}"),
            message: e.to_string(),
        }
    };
    let header = reader.headers().map_err(csv_err)?.clone();
    let labelled = header.get(0).is_some_and(|h| h.eq_ignore_ascii_case("label"));
    let d = header.len() - usize::from(labelled);
    if d == 0 {
        return Err(Error::EmptyBatch);
    }

    let mut values = Vec::new();
    let mut raw_labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        let mut fields = record.iter();
        if labelled {
            raw_labels.push(fields.next().unwrap_or_default().to_string());
        }
        for (j, field) in fields.enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Format {
                location: format!("{source}:{line}"),
                message: format!("column {} is not a number: {field:?}", j + 1),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFiniteInput {
                    location: format!("{source}:{line}, column {}", j + 1),
                });
            }
            values.push(v);
        }
    }
    let n = values.len() / d;
    if n == 0 {
        return Err(Error::EmptyBatch);
    }
    let labels = labelled.then(|| dense_labels(&raw_labels));
    validate_batch(FeatureBatch::from_parts(DMatrix::from_row_slice(n, d, &values), labels))
}

fn dense_labels(raw: &[String]) -> Vec<u32> {
    if let Ok(ids) = raw
        .iter()
        .map(|s| s.parse::<u32>())
        .collect::<std::result::Result<Vec<_>, _>>()
    {
        return ids;
    }
    let mut dictionary: HashMap<&str, u32> = HashMap::new();
    raw.iter()
        .map(|s| {
            let next = dictionary.len() as u32;
            *dictionary.entry(s.as_str()).or_insert(next)
        })
        .collect()
}

/// Writes headed CSV (`label,f1,...` when labelled) with round-trip float text.
pub fn write_csv(path: impl AsRef<Path>, batch: &FeatureBatch) -> Result<()> {
    let path = path.as_ref();
    let to_err = |e: csv::Error| Error::Format {
        location: path.display().to_string(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(to_err)?;
    let mut header: Vec<String> = (1..=batch.dim()).map(|j| format!("f{j}")).collect();
    if batch.labels().is_some() {
        header.insert(0, "label".into());
    }
    w.write_record(&header).map_err(to_err)?;
    for i in 0..batch.n_samples() {
        let mut row: Vec<String> = batch.row(i).iter().map(|v| format!("{v:?}")).collect();
        if let Some(l) = batch.labels() {
            row.insert(0, l[i].to_string());
        }
        w.write_record(&row).map_err(to_err)?;
    }
    w.flush().map_err(Error::io(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_with_labels() {
        let b = parse_csv(b"label,f1,f2\n3,0.5,-1.0\n", "t").unwrap();
        assert_eq!((b.n_samples(), b.dim()), (1, 2));
        assert_eq!(b.labels(), Some(&[3u32][..]));
        assert_eq!(b.row(0), vec![0.5, -1.0]);
    }

    #[test]
    fn csv_without_labels() {
        let b = parse_csv(b"f1,f2,f3\n1,2,3\n4,5,6\n", "t").unwrap();
        assert_eq!((b.n_samples(), b.dim()), (2, 3));
        assert!(b.labels().is_none());
    }

    #[test]
    fn csv_string_labels() {
        let b = parse_csv(b"label,f1\ncat,1\ndog,2\ncat,3\n", "t").unwrap();
        assert_eq!(b.labels(), Some(&[0u32, 1, 0][..]));
    }

    #[test]
    fn csv_inf_reports_line() {
        match parse_csv(b"f1,f2\n1,2\n3,inf\n", "feat.csv") {
            Err(Error::NonFiniteInput { location }) => assert!(location.starts_with("feat.csv:3"), "{location}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn csv_garbage_is_format_error() {
        let e = parse_csv(b"f1\nabc\n", "x.csv").unwrap_err();
        assert_eq!(e.kind(), "FormatError");
        assert!(e.to_string().contains("x.csv:2"));
    }

    #[test]
    fn gmcf_empty_batch() {
        let mut bytes = GMCF_MAGIC.to_vec();
        bytes.extend_from_slice(&1u16.to_le_bytes());
        bytes.extend_from_slice(&0u32.to_le_bytes());
        bytes.extend_from_slice(&3u32.to_le_bytes());
        bytes.push(0);
        assert!(matches!(decode_gmcf(&bytes), Err(Error::EmptyBatch)));
    }

    #[test]
    fn gmcf_layout_is_exact() {
        let b = FeatureBatch::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]], Some(vec![7, 9])).unwrap();
        let bytes = encode_gmcf(&b);
        assert_eq!(bytes.len(), 15 + 32 + 8);
        assert_eq!(&bytes[..6], b"GMCF\x01\x00");
        assert_eq!(&bytes[6..15], &[2, 0, 0, 0, 2, 0, 0, 0, 1]);
        assert_eq!(&bytes[15..23], &1.0f64.to_le_bytes());
        assert_eq!(&bytes[23..31], &2.0f64.to_le_bytes());
        assert_eq!(&bytes[47..51], &7u32.to_le_bytes());
        assert_eq!(decode_gmcf(&bytes).unwrap(), b);
    }

    #[test]
    fn gmcf_truncation_reports_offset() {
        let b = FeatureBatch::from_rows(&[vec![1.0, 2.0]], None).unwrap();
        let bytes = encode_gmcf(&b);
        let e = decode_gmcf(&bytes[..20]).unwrap_err();
        assert!(e.to_string().contains("byte 20"), "{e}");
    }

    #[test]
    fn dispatch_by_magic() {
        let dir = tempfile::tempdir().unwrap();
        let b = FeatureBatch::from_rows(&[vec![0.1, 0.2], vec![0.3, 1e-300]], Some(vec![0, 1])).unwrap();
        let bin = dir.path().join("a.bin");
        let txt = dir.path().join("a.csv");
        write_gmcf(&bin, &b).unwrap();
        write_csv(&txt, &b).unwrap();
        assert_eq!(read_feature_batch(&bin).unwrap(), b);
        assert_eq!(read_feature_batch(&txt).unwrap(), b);
    }
}
