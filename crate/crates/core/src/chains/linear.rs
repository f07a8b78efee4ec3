use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::spectral_radius;
use crate::rng::{stream, StreamRng};
use crate::types::FeatureBatch;

/// `x' = A x + b + σ ζ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearGaussianParams {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub sigma: f64,
}

impl LinearGaussianParams {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, sigma: f64) -> Result<Self> {
        let d = a.nrows();
        if !a.is_square() || b.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: if a.is_square() { b.len() } else { a.ncols() },
            });
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
        }
        let radius = spectral_radius(&a)?;
        if radius >= 1.0 {
            log::warn!("linear-Gaussian chain has spectral radius {radius:.4} >= 1; no stationary law");
        }
        Ok(Self { a, b, sigma })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub(crate) fn apply(&self, batch: &FeatureBatch, rng: &mut StreamRng) -> Result<FeatureBatch> {
        let mut out = batch.data() * self.a.transpose();
        add_offset_and_noise(&mut out, Some(&self.b), self.sigma, rng);
        FeatureBatch::new(out, batch.labels().map(<[u32]>::to_vec))
    }
}

/// `x' = M (F x) + σ ζ` with an `r x D` feature map `F` and a `D x r` decoder `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentFeedbackParams {
    pub f: DMatrix<f64>,
    pub m: DMatrix<f64>,
    pub sigma: f64,
}

impl LatentFeedbackParams {
    pub fn new(f: DMatrix<f64>, m: DMatrix<f64>, sigma: f64) -> Result<Self> {
        let (r, d) = f.shape();
        if m.shape() != (d, r) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: m.nrows(),
            });
        }
        if r > d || r == 0 {
            return Err(Error::InvalidParameter(format!("latent rank {r} must be in 1..={d}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
        }
        let radius = spectral_radius(&(&m * &f))?;
        if radius >= 1.0 {
            return Err(Error::SpectralRadiusTooLarge { radius });
        }
        Ok(Self { f, m, sigma })
    }

    /// Orthonormal feature map onto a random `r`-dimensional subspace, decoded
    /// back with per-axis gains: `M F = Fᵀ diag(gains) F`.
    pub fn orthogonal(dim: usize, gains: &[f64], sigma: f64, seed: u64) -> Result<Self> {
        let r = gains.len();
        if r == 0 || r > dim {
            return Err(Error::InvalidParameter(format!("latent rank {r} must be in 1..={dim}")));
        }
        let mut rng = stream(seed, "latent-feedback/basis");
        let g = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let q = g.qr().q();
        let f = q.columns(0, r).transpose();
        let m = f.transpose() * DMatrix::from_diagonal(&DVector::from_column_slice(gains));
        Self::new(f, m, sigma)
    }

    pub fn dim(&self) -> usize {
        self.f.ncols()
    }

    pub fn rank(&self) -> usize {
        self.f.nrows()
    }

    /// The linear part `M F` of the transition.
    pub fn transition(&self) -> DMatrix<f64> {
        &self.m * &self.f
    }

    pub(crate) fn apply(&self, batch: &FeatureBatch, rng: &mut StreamRng) -> Result<FeatureBatch> {
        let latent = batch.data() * self.f.transpose();
        let mut out = latent * self.m.transpose();
        add_offset_and_noise(&mut out, None, self.sigma, rng);
        FeatureBatch::new(out, batch.labels().map(<[u32]>::to_vec))
    }
}

/// Adds `b` to every row and i.i.d. `N(0, σ²)` noise, drawn in row-major order.
fn add_offset_and_noise(out: &mut DMatrix<f64>, b: Option<&DVector<f64>>, sigma: f64, rng: &mut StreamRng) {
    let (n, d) = out.shape();
    for i in 0..n {
        for j in 0..d {
            let z: f64 = rng.sample(StandardNormal);
            out[(i, j)] += b.map_or(0.0, |b| b[j]) + sigma * z;
        }
    }
}
