//! The four latent-geometry diagnostics: Fréchet distance, intra-class spread,
//! Levina–Bickel intrinsic dimension and global participation ratio.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{estimate_gaussian, sample_covariance, symmetric_eigenvalues, trace_sqrt_product};
use crate::types::{FeatureBatch, GaussianSummary, TraceRow};

/// Negative Fréchet values within this relative band are treated as round-off.
const FID_NEGATIVE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricConfig {
    /// Neighbour count `k` for the Levina–Bickel estimator.
    pub k_neighbors: usize,
    /// When set, m_LB inside trace rows is computed on an evenly strided
    /// subsample of at most this many rows. `levina_bickel` itself never subsamples.
    pub lb_max_samples: Option<usize>,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            k_neighbors: 10,
            lb_max_samples: Some(2000),
        }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_neighbors < 2 {
            return Err(Error::InvalidParameter(format!(
                "k_neighbors must be >= 2, got {}",
                self.k_neighbors
            )));
        }
        if let Some(cap) = self.lb_max_samples {
            if cap <= self.k_neighbors {
                return Err(Error::InvalidParameter(format!(
                    "lb_max_samples {cap} must exceed k_neighbors {}",
                    self.k_neighbors
                )));
            }
        }
        Ok(())
    }
}

/// `‖μ_a − μ_b‖² + Tr(Σ_a + Σ_b − 2 (Σ_a Σ_b)^{1/2})`.
pub fn frechet_distance(a: &GaussianSummary, b: &GaussianSummary) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    if a == b {
        return Ok(0.0);
    }
    let mean_term = (&a.mean - &b.mean).norm_squared();
    let tr_a = a.covariance.trace();
    let tr_b = b.covariance.trace();
    let cross = trace_sqrt_product(&a.covariance, &b.covariance)?;
    let value = mean_term + tr_a + tr_b - 2.0 * cross;
    if value >= 0.0 {
        return Ok(value);
    }
    let scale = mean_term + tr_a + tr_b;
    if -value <= FID_NEGATIVE_TOL * scale.max(1.0) {
        Ok(0.0)
    } else {
        Err(Error::DecompositionFailure(format!(
            "Fréchet distance evaluated to {value:.3e}"
        )))
    }
}

/// Mean over classes of the RMS distance of each class member to its centroid.
/// Classes are weighted equally regardless of size.
pub fn sigma_intra(batch: &FeatureBatch) -> Result<f64> {
    let labels = batch.labels().ok_or(Error::MissingLabels)?;
    let data = batch.data();
    let d = batch.dim();

    let mut members: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        members.entry(l).or_default().push(i);
    }
    if members.is_empty() {
        return Err(Error::EmptyBatch);
    }

    let mut total = 0.0;
    for rows in members.values() {
        let count = rows.len() as f64;
        let mut centroid = vec![0.0; d];
        for &i in rows {
            for (j, c) in centroid.iter_mut().enumerate() {
                *c += data[(i, j)];
            }
        }
        centroid.iter_mut().for_each(|c| *c /= count);
        let msd: f64 = rows
            .iter()
            .map(|&i| {
                centroid
                    .iter()
                    .enumerate()
                    .map(|(j, c)| (data[(i, j)] - c).powi(2))
                    .sum::<f64>()
            })
            .sum::<f64>()
            / count;
        total += msd.sqrt();
    }
    Ok(total / members.len() as f64)
}

/// Sorted squared distances from row `i` to its `k` nearest other rows.
fn k_nearest_sq(rows: &[f64], n: usize, d: usize, i: usize, k: usize, buf: &mut Vec<f64>) {
    buf.clear();
    let xi = &rows[i * d..(i + 1) * d];
    for j in 0..n {
        if j == i {
            continue;
        }
        let xj = &rows[j * d..(j + 1) * d];
        let dist: f64 = xi.iter().zip(xj).map(|(a, b)| (a - b) * (a - b)).sum();
        buf.push(dist);
    }
    buf.select_nth_unstable_by(k - 1, f64::total_cmp);
    buf.truncate(k);
    buf.sort_unstable_by(f64::total_cmp);
}

/// Levina–Bickel maximum-likelihood intrinsic dimension, averaged over points.
///
/// ```text
/// m_i = [ 1/(k-1) Σ_{j<k} ln(T_i(k) / T_i(j)) ]⁻¹,   m_LB = mean_i m_i
/// ```
///
/// Neighbours come from an exact brute-force scan. Zero distances (duplicate
/// points) and all-equidistant neighbourhoods are reported as
/// [`Error::DegenerateNeighborhood`].
pub fn levina_bickel(batch: &FeatureBatch, config: &MetricConfig) -> Result<f64> {
    let k = config.k_neighbors;
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k_neighbors must be >= 2, got {k}")));
    }
    let n = batch.n_samples();
    if n < k + 1 {
        return Err(Error::TooFewSamples {
            required: k + 1,
            found: n,
        });
    }
    let d = batch.dim();
    let rows = batch.to_row_major();
    let mut buf = Vec::with_capacity(n);
    let mut sum = 0.0;
    for i in 0..n {
        k_nearest_sq(&rows, n, d, i, k, &mut buf);
        if buf[0] == 0.0 {
            return Err(Error::DegenerateNeighborhood { point: i });
        }
        let far = buf[k - 1];
        // ln(T_k / T_j) = ½ ln(T_k² / T_j²)
        let log_sum: f64 = buf[..k - 1].iter().map(|&near| 0.5 * (far / near).ln()).sum();
        if log_sum <= 0.0 {
            return Err(Error::DegenerateNeighborhood { point: i });
        }
        sum += (k - 1) as f64 / log_sum;
    }
    Ok(sum / n as f64)
}

/// `(Σλ)² / Σλ²` over the raw (un-ridged) sample covariance spectrum.
pub fn participation_ratio(batch: &FeatureBatch) -> Result<f64> {
    let n = batch.n_samples();
    if n < 2 {
        return Err(Error::TooFewSamples { required: 2, found: n });
    }
    let (_, cov) = sample_covariance(batch)?;
    let values = symmetric_eigenvalues(&cov)?;
    participation_ratio_of_spectrum(&values)
}

/// The participation ratio of an explicit spectrum; negative entries are clamped to 0.
pub fn participation_ratio_of_spectrum(eigenvalues: &[f64]) -> Result<f64> {
    let (s1, s2) = eigenvalues
        .iter()
        .map(|&v| v.max(0.0))
        .fold((0.0, 0.0), |(a, b), v| (a + v, b + v * v));
    if s2 == 0.0 {
        return Err(Error::InvalidParameter(
            "covariance spectrum is identically zero".into(),
        ));
    }
    Ok(s1 * s1 / s2)
}

fn strided_subsample(batch: &FeatureBatch, cap: Option<usize>) -> Option<FeatureBatch> {
    let cap = cap?;
    let n = batch.n_samples();
    if n <= cap {
        return None;
    }
    let indices: Vec<usize> = (0..cap).map(|i| i * n / cap).collect();
    Some(batch.select_rows(&indices))
}

/// m_LB as reported in trace rows: honours `lb_max_samples`.
pub fn trace_levina_bickel(batch: &FeatureBatch, config: &MetricConfig) -> Result<f64> {
    match strided_subsample(batch, config.lb_max_samples) {
        Some(sub) => levina_bickel(&sub, config),
        None => levina_bickel(batch, config),
    }
}

/// Gaussian summaries a trace row is measured against.
#[derive(Debug, Clone, Copy)]
pub struct DriftReferences<'a> {
    pub previous: Option<&'a GaussianSummary>,
    pub first: &'a GaussianSummary,
}

/// Trace row for generation `n` given pre-fitted summaries.
pub fn trace_row_from_summaries(
    n: usize,
    batch: &FeatureBatch,
    summary: &GaussianSummary,
    refs: DriftReferences<'_>,
    config: &MetricConfig,
) -> Result<TraceRow> {
    let fid_local = refs
        .previous
        .map(|p| frechet_distance(summary, p))
        .transpose()
        .map_err(Error::metric("fid_local"))?;
    let fid_cumulative = if n == 0 {
        0.0
    } else {
        frechet_distance(summary, refs.first).map_err(Error::metric("fid_cumulative"))?
    };
    let sigma = match batch.labels() {
        Some(_) => Some(sigma_intra(batch).map_err(Error::metric("sigma_intra"))?),
        None => None,
    };
    let m_lb = trace_levina_bickel(batch, config).map_err(Error::metric("m_lb"))?;
    let pr_g = participation_ratio(batch).map_err(Error::metric("pr_g"))?;
    Ok(TraceRow {
        n,
        fid_local,
        fid_cumulative,
        sigma_intra: sigma,
        m_lb,
        pr_g,
    })
}

/// Computes every metric for generation `n` from raw batches.
pub fn compute_trace_row(
    n: usize,
    batch: &FeatureBatch,
    previous: Option<&FeatureBatch>,
    first: &FeatureBatch,
    config: &MetricConfig,
) -> Result<TraceRow> {
    for other in previous.into_iter().chain(std::iter::once(first)) {
        if other.dim() != batch.dim() {
            return Err(Error::DimensionMismatch {
                expected: batch.dim(),
                found: other.dim(),
            });
        }
    }
    let summary = estimate_gaussian(batch)?;
    let prev_summary = previous.map(estimate_gaussian).transpose()?;
    let first_summary = estimate_gaussian(first)?;
    trace_row_from_summaries(
        n,
        batch,
        &summary,
        DriftReferences {
            previous: prev_summary.as_ref(),
            first: &first_summary,
        },
        config,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    fn gauss1(mean: f64, var: f64) -> GaussianSummary {
        GaussianSummary::new(DVector::from_element(1, mean), DMatrix::from_element(1, 1, var)).unwrap()
    }

    fn col(values: &[f64], labels: Option<Vec<u32>>) -> FeatureBatch {
        let rows: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
        FeatureBatch::from_rows(&rows, labels).unwrap()
    }

    #[test]
    fn fid_one_dimensional_cases() {
        assert_eq!(frechet_distance(&gauss1(0.0, 1.0), &gauss1(0.0, 1.0)).unwrap(), 0.0);
        assert!((frechet_distance(&gauss1(0.0, 1.0), &gauss1(1.0, 1.0)).unwrap() - 1.0).abs() < 1e-12);
        assert!((frechet_distance(&gauss1(0.0, 1.0), &gauss1(0.0, 4.0)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fid_dimension_mismatch() {
        let a = gauss1(0.0, 1.0);
        let b = GaussianSummary::new(DVector::zeros(2), DMatrix::identity(2, 2)).unwrap();
        assert!(matches!(frechet_distance(&a, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn sigma_intra_cases() {
        assert_eq!(
            sigma_intra(&col(&[2.0, 2.0, 5.0, 5.0], Some(vec![0, 0, 1, 1]))).unwrap(),
            0.0
        );
        assert!((sigma_intra(&col(&[-1.0, 1.0], Some(vec![0, 0]))).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(sigma_intra(&col(&[0.0, 5.0], Some(vec![0, 1]))).unwrap(), 0.0);
        assert!(matches!(
            sigma_intra(&col(&[0.0, 1.0], None)),
            Err(Error::MissingLabels)
        ));
    }

    #[test]
    fn sigma_intra_weights_classes_equally() {
        // class 0: {-1, 1} spread 1; class 1: {0,0,0,4} spread sqrt(3)
        let b = col(&[-1.0, 1.0, 0.0, 0.0, 0.0, 4.0], Some(vec![0, 0, 1, 1, 1, 1]));
        let expect = (1.0 + 3f64.sqrt()) / 2.0;
        assert!((sigma_intra(&b).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn levina_bickel_hand_example() {
        let cfg = MetricConfig {
            k_neighbors: 2,
            lb_max_samples: None,
        };
        let got = levina_bickel(&col(&[0.0, 1.0, 3.0], None), &cfg).unwrap();
        let expect = (1.0 / 3f64.ln() + 1.0 / 2f64.ln() + 1.0 / 1.5f64.ln()) / 3.0;
        assert!((got - expect).abs() < 1e-12);
        assert!((got - 1.6064).abs() < 1e-4);
    }

    #[test]
    fn levina_bickel_errors() {
        let cfg = MetricConfig {
            k_neighbors: 2,
            lb_max_samples: None,
        };
        assert!(matches!(
            levina_bickel(&col(&[0.0, 1.0], None), &cfg),
            Err(Error::TooFewSamples { required: 3, found: 2 })
        ));
        assert!(matches!(
            levina_bickel(&col(&[0.0, 0.0, 3.0, 7.0], None), &cfg),
            Err(Error::DegenerateNeighborhood { point: 0 })
        ));
    }

    #[test]
    fn participation_ratio_of_known_spectrum() {
        let pr = participation_ratio_of_spectrum(&[2.0, 1.0, 1.0]).unwrap();
        assert!((pr - 16.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn participation_ratio_rank_one() {
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|i| {
                let t = i as f64 * 0.37 - 4.0;
                vec![t, -2.0 * t, 0.5 * t]
            })
            .collect();
        let pr = participation_ratio(&FeatureBatch::from_rows(&rows, None).unwrap()).unwrap();
        assert!((pr - 1.0).abs() < 1e-6);
    }

    #[test]
    fn trace_row_identities() {
        let b = col(&[0.0, 1.0, 3.0, 4.5, 7.0], Some(vec![0, 0, 1, 1, 1]));
        let cfg = MetricConfig {
            k_neighbors: 2,
            lb_max_samples: None,
        };
        let r0 = compute_trace_row(0, &b, None, &b, &cfg).unwrap();
        assert_eq!(r0.fid_cumulative, 0.0);
        assert_eq!(r0.fid_local, None);
        let r1 = compute_trace_row(1, &b, Some(&b), &b, &cfg).unwrap();
        assert_eq!(r1.fid_local, Some(0.0));
        assert!(r1.sigma_intra.is_some());
    }

    #[test]
    fn trace_row_tags_metric_errors() {
        let b = col(&[0.0, 1.0], None);
        let cfg = MetricConfig {
            k_neighbors: 2,
            lb_max_samples: None,
        };
        let err = compute_trace_row(0, &b, None, &b, &cfg).unwrap_err();
        assert!(matches!(err, Error::Metric { metric: "m_lb", .. }));
    }
}
