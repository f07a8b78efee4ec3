//! Shared domain types: feature batches, Gaussian summaries, metric traces and
//! the label vocabularies used by the phase and pattern classifiers.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An `N x D` matrix of embedding vectors with optional dense class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBatch {
    data: DMatrix<f64>,
    labels: Option<Vec<u32>>,
}

impl FeatureBatch {
    /// Builds and validates a batch.
    pub fn new(data: DMatrix<f64>, labels: Option<Vec<u32>>) -> Result<Self> {
        validate_batch(Self::from_parts(data, labels))
    }

    /// Builds a batch without checking invariants. Pair with [`validate_batch`].
    pub fn from_parts(data: DMatrix<f64>, labels: Option<Vec<u32>>) -> Self {
        Self { data, labels }
    }

    pub fn from_rows(rows: &[Vec<f64>], labels: Option<Vec<u32>>) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if n == 0 || d == 0 {
            return Err(Error::EmptyBatch);
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(n, d, |i, j| rows[i][j]), labels)
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    pub fn n_samples(&self) -> usize {
        self.data.nrows()
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.data.row(i).iter().copied().collect()
    }

    /// Row-major copy of the data, convenient for distance kernels.
    pub fn to_row_major(&self) -> Vec<f64> {
        let (n, d) = self.data.shape();
        let mut out = Vec::with_capacity(n * d);
        for i in 0..n {
            out.extend(self.data.row(i).iter());
        }
        out
    }

    pub fn with_labels(mut self, labels: Option<Vec<u32>>) -> Result<Self> {
        self.labels = labels;
        validate_batch(self)
    }

    pub fn without_labels(mut self) -> Self {
        self.labels = None;
        self
    }

    /// Keeps the rows at `indices`, in order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let d = self.dim();
        let data = DMatrix::from_fn(indices.len(), d, |i, j| self.data[(indices[i], j)]);
        let labels = self.labels.as_ref().map(|l| indices.iter().map(|&i| l[i]).collect());
        Self { data, labels }
    }

    /// Stacks batches vertically. Labels survive only if every part has them.
    pub fn concat(parts: &[FeatureBatch]) -> Result<Self> {
        let first = parts.first().ok_or(Error::EmptyBatch)?;
        let d = first.dim();
        for p in parts {
            if p.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: p.dim(),
                });
            }
        }
        let n: usize = parts.iter().map(FeatureBatch::n_samples).sum();
        let mut data = DMatrix::zeros(n, d);
        let mut offset = 0;
        for p in parts {
            data.rows_mut(offset, p.n_samples()).copy_from(&p.data);
            offset += p.n_samples();
        }
        let labels = if parts.iter().all(|p| p.labels.is_some()) {
            Some(parts.iter().flat_map(|p| p.labels.clone().unwrap()).collect())
        } else {
            None
        };
        Self::new(data, labels)
    }
}

/// Checks the batch invariants and hands the batch back unchanged.
pub fn validate_batch(batch: FeatureBatch) -> Result<FeatureBatch> {
    let (n, d) = batch.data.shape();
    if n == 0 || d == 0 {
        return Err(Error::EmptyBatch);
    }
    for i in 0..n {
        for j in 0..d {
            if !batch.data[(i, j)].is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    if let Some(labels) = &batch.labels {
        if labels.len() != n {
            return Err(Error::LabelMismatch {
                samples: n,
                labels: labels.len(),
            });
        }
    }
    Ok(batch)
}

/// Mean and covariance of one generation's feature distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSummary {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

impl GaussianSummary {
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if covariance.shape() != (d, d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: covariance.nrows(),
            });
        }
        crate::linalg::check_symmetric(&covariance)?;
        Ok(Self { mean, covariance })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// One generation of diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub n: usize,
    /// Fréchet distance to the previous generation; absent at n = 0.
    pub fid_local: Option<f64>,
    /// Fréchet distance to generation 0.
    pub fid_cumulative: f64,
    /// Absent for unlabelled batches.
    pub sigma_intra: Option<f64>,
    pub m_lb: f64,
    pub pr_g: f64,
}

/// Per-generation metric records, indices strictly increasing from 0.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricTrace {
    rows: Vec<TraceRow>,
}

impl MetricTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_rows(rows: Vec<TraceRow>) -> Result<Self> {
        let mut trace = Self::new();
        for r in rows {
            trace.push(r)?;
        }
        Ok(trace)
    }

    pub fn push(&mut self, row: TraceRow) -> Result<()> {
        match self.rows.last() {
            None => {
                if row.n != 0 {
                    return Err(Error::InvalidParameter(format!(
                        "trace must start at generation 0, got {}",
                        row.n
                    )));
                }
                if row.fid_cumulative != 0.0 {
                    return Err(Error::InvalidParameter(
                        "cumulative drift at generation 0 must be 0".into(),
                    ));
                }
            }
            Some(last) if row.n <= last.n => {
                return Err(Error::InvalidParameter(format!(
                    "generation {} does not follow {}",
                    row.n, last.n
                )));
            }
            Some(_) => {}
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn sigma_intra_series(&self) -> Option<Vec<(usize, f64)>> {
        self.rows.iter().map(|r| r.sigma_intra.map(|s| (r.n, s))).collect()
    }

    pub fn m_lb_series(&self) -> Vec<(usize, f64)> {
        self.rows.iter().map(|r| (r.n, r.m_lb)).collect()
    }

    pub fn pr_g_series(&self) -> Vec<(usize, f64)> {
        self.rows.iter().map(|r| (r.n, r.pr_g)).collect()
    }
}

/// Drift phase of a trailing window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseLabel {
    ActiveTransient,
    SlowTransient,
    Stationary,
}

impl fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PhaseLabel::ActiveTransient => "ActiveTransient",
            PhaseLabel::SlowTransient => "SlowTransient",
            PhaseLabel::Stationary => "Stationary",
        };
        f.write_str(s)
    }
}

/// Joint trend pattern of (σ_intra, m_LB, PR_G).
///
/// | σ_intra | m_LB | PR_G | pattern |
/// |---|---|---|---|
/// | ↑ | ↑ | ↑ | CE |
/// | ↑ | ↑ | ↓ | WE |
/// | ↑ | ↓ | ↑ | AE |
/// | ↑ | ↓ | ↓ | OE |
/// | ↓ | ↓ | ↓ | CC |
/// | ↓ | ↓ | ↑ | AC |
/// | ↓ | ↑ | ↓ | WC |
/// | ↓ | ↑ | ↑ | OC |
///
/// `Flat` covers any triple containing a dead-zone trend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DimensionalPattern {
    #[serde(rename = "CE")]
    CoherentExpansion,
    #[serde(rename = "WE")]
    WrinkledExpansion,
    #[serde(rename = "AE")]
    AnisotropicExpansion,
    #[serde(rename = "OE")]
    OblateExpansion,
    #[serde(rename = "CC")]
    CoherentContraction,
    #[serde(rename = "AC")]
    AnisotropicContraction,
    #[serde(rename = "WC")]
    WrinkledContraction,
    #[serde(rename = "OC")]
    OblateContraction,
    Flat,
}

impl DimensionalPattern {
    pub const STRICT: [DimensionalPattern; 8] = [
        DimensionalPattern::CoherentExpansion,
        DimensionalPattern::WrinkledExpansion,
        DimensionalPattern::AnisotropicExpansion,
        DimensionalPattern::OblateExpansion,
        DimensionalPattern::CoherentContraction,
        DimensionalPattern::AnisotropicContraction,
        DimensionalPattern::WrinkledContraction,
        DimensionalPattern::OblateContraction,
    ];

    pub fn code(self) -> &'static str {
        match self {
            DimensionalPattern::CoherentExpansion => "CE",
            DimensionalPattern::WrinkledExpansion => "WE",
            DimensionalPattern::AnisotropicExpansion => "AE",
            DimensionalPattern::OblateExpansion => "OE",
            DimensionalPattern::CoherentContraction => "CC",
            DimensionalPattern::AnisotropicContraction => "AC",
            DimensionalPattern::WrinkledContraction => "WC",
            DimensionalPattern::OblateContraction => "OC",
            DimensionalPattern::Flat => "Flat",
        }
    }
}

impl fmt::Display for DimensionalPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Up,
    Down,
    Flat,
}

impl Direction {
    pub fn negate(self) -> Self {
        match self {
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
            Direction::Flat => Direction::Flat,
        }
    }
}

/// Direction of a windowed slope plus the slope itself (normalized units per generation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trend {
    pub direction: Direction,
    pub slope: f64,
}

impl Trend {
    /// Applies the `±theta` dead zone.
    pub fn from_slope(slope: f64, theta: f64) -> Self {
        let direction = if slope > theta {
            Direction::Up
        } else if slope < -theta {
            Direction::Down
        } else {
            Direction::Flat
        };
        Self { direction, slope }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_accepts_finite_batch() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let b = FeatureBatch::from_parts(m.clone(), None);
        let v = validate_batch(b.clone()).unwrap();
        assert_eq!(v, b);
    }

    #[test]
    fn validate_rejects_nan() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, f64::NAN, 3.0, 4.0]);
        let err = validate_batch(FeatureBatch::from_parts(m, None)).unwrap_err();
        assert!(matches!(err, Error::NonFinite { row: 0, col: 1 }));
    }

    #[test]
    fn validate_rejects_label_mismatch() {
        let m = DMatrix::zeros(4, 2);
        let err = validate_batch(FeatureBatch::from_parts(m, Some(vec![0, 1, 2]))).unwrap_err();
        assert!(matches!(err, Error::LabelMismatch { samples: 4, labels: 3 }));
    }

    #[test]
    fn validate_rejects_empty() {
        let err = validate_batch(FeatureBatch::from_parts(DMatrix::zeros(0, 3), None)).unwrap_err();
        assert!(matches!(err, Error::EmptyBatch));
    }

    #[test]
    fn trace_enforces_generation_order() {
        let row = |n, cum| TraceRow {
            n,
            fid_local: None,
            fid_cumulative: cum,
            sigma_intra: None,
            m_lb: 1.0,
            pr_g: 1.0,
        };
        let mut t = MetricTrace::new();
        assert!(t.push(row(1, 0.0)).is_err());
        assert!(t.push(row(0, 0.5)).is_err());
        t.push(row(0, 0.0)).unwrap();
        assert!(t.push(row(0, 0.0)).is_err());
        t.push(row(1, 2.0)).unwrap();
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn trend_dead_zone() {
        assert_eq!(Trend::from_slope(0.02, 0.01).direction, Direction::Up);
        assert_eq!(Trend::from_slope(-0.02, 0.01).direction, Direction::Down);
        assert_eq!(Trend::from_slope(0.01, 0.01).direction, Direction::Flat);
    }
}
