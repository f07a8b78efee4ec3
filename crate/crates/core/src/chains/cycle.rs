use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::FeatureBatch;

/// Componentwise `scale * tanh(gain * x + bias) + offset`.
///
/// With zero bias/offset and `scale * gain > 1` the map has an unstable fixed
/// point at 0 and two stable ones at `±x*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaturatingMap {
    pub gain: f64,
    pub scale: f64,
    #[serde(default)]
    pub bias: f64,
    #[serde(default)]
    pub offset: f64,
}

impl SaturatingMap {
    pub fn apply(&self, x: f64) -> f64 {
        self.scale * (self.gain * x + self.bias).tanh() + self.offset
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    #[default]
    A,
    B,
}

/// Cyclic composition of two fixed translators.
///
/// Starting in domain A a step is `f_ba(f_ab(x))`; starting in B it is
/// `f_ab(f_ba(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleMapParams {
    pub dim: usize,
    pub f_ab: SaturatingMap,
    pub f_ba: SaturatingMap,
    pub start: Domain,
}

impl CycleMapParams {
    pub fn new(dim: usize, f_ab: SaturatingMap, f_ba: SaturatingMap, start: Domain) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dim must be positive".into()));
        }
        for m in [f_ab, f_ba] {
            if ![m.gain, m.scale, m.bias, m.offset].iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidParameter("map parameters must be finite".into()));
            }
        }
        Ok(Self { dim, f_ab, f_ba, start })
    }

    /// Two bistable translators; every orthant of the start domain is a basin.
    pub fn bistable(dim: usize, start: Domain) -> Result<Self> {
        Self::new(
            dim,
            SaturatingMap {
                gain: 1.5,
                scale: 2.0,
                bias: 0.0,
                offset: 0.0,
            },
            SaturatingMap {
                gain: 1.2,
                scale: 1.5,
                bias: 0.0,
                offset: 0.0,
            },
            start,
        )
    }

    pub fn compose(&self, x: f64) -> f64 {
        match self.start {
            Domain::A => self.f_ba.apply(self.f_ab.apply(x)),
            Domain::B => self.f_ab.apply(self.f_ba.apply(x)),
        }
    }

    pub(crate) fn apply(&self, batch: &FeatureBatch) -> Result<FeatureBatch> {
        let data = batch.data();
        let out = DMatrix::from_fn(data.nrows(), data.ncols(), |i, j| self.compose(data[(i, j)]));
        FeatureBatch::new(out, batch.labels().map(<[u32]>::to_vec))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn start_domain_orders_composition() {
        let p = CycleMapParams::new(
            1,
            SaturatingMap {
                gain: 1.0,
                scale: 1.0,
                bias: 0.0,
                offset: 1.0,
            },
            SaturatingMap {
                gain: 1.0,
                scale: 2.0,
                bias: 0.0,
                offset: 0.0,
            },
            Domain::A,
        )
        .unwrap();
        let x = 0.3;
        assert_eq!(p.compose(x), 2.0 * (x.tanh() + 1.0).tanh());
        let q = CycleMapParams { start: Domain::B, ..p };
        assert_eq!(q.compose(x), (2.0 * x.tanh()).tanh() + 1.0);
    }
}
