use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::types::FeatureBatch;

/// Each row is a signal; one step convolves it with `h`, truncates to the input
/// length and rescales to RMS `norm_target`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionParams {
    pub h: Vec<f64>,
    pub signal_len: usize,
    pub norm_target: f64,
}

impl ConvolutionParams {
    pub fn new(h: Vec<f64>, signal_len: usize) -> Result<Self> {
        if h.is_empty() || h.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidParameter("impulse response is all zero".into()));
        }
        if h.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("impulse response is not finite".into()));
        }
        if signal_len == 0 {
            return Err(Error::InvalidParameter("signal_len must be positive".into()));
        }
        Ok(Self {
            h,
            signal_len,
            norm_target: 1.0,
        })
    }

    pub(crate) fn apply(&self, batch: &FeatureBatch) -> Result<FeatureBatch> {
        let (n, len) = batch.data().shape();
        let mut out = DMatrix::zeros(n, len);
        let mut row = vec![0.0; len];
        let mut filtered = vec![0.0; len];
        for i in 0..n {
            for (t, v) in row.iter_mut().enumerate() {
                *v = batch.data()[(i, t)];
            }
            if rms(&row) == 0.0 {
                return Err(Error::ZeroSignal);
            }
            convolve_truncated(&row, &self.h, &mut filtered);
            let level = rms(&filtered);
            if level == 0.0 {
                return Err(Error::ZeroSignal);
            }
            let gain = self.norm_target / level;
            for (t, v) in filtered.iter().enumerate() {
                out[(i, t)] = v * gain;
            }
        }
        FeatureBatch::new(out, batch.labels().map(<[u32]>::to_vec))
    }
}

pub(crate) fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

/// Direct-form linear convolution, first `out.len()` samples.
fn convolve_truncated(x: &[f64], h: &[f64], out: &mut [f64]) {
    for (t, o) in out.iter_mut().enumerate() {
        let kmax = t.min(h.len() - 1);
        *o = (0..=kmax).map(|k| h[k] * x[t - k]).sum();
    }
}
