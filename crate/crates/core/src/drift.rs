//! Local and cumulative drift curves and the three-way phase classifier.
//!
//! Both curves are max-normalized before thresholding so that the labels do not
//! depend on the absolute scale of the embedding. A trailing window is:
//!
//! - `ActiveTransient` when both robust slopes have magnitude `>= slope_active`,
//! - `Stationary` when both have magnitude `<= slope_flat`,
//! - `SlowTransient` otherwise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::frechet_distance;
use crate::slope::windowed_slopes;
use crate::types::{GaussianSummary, PhaseLabel};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DriftCurves {
    /// `(n, FID(S_n, S_{n-1}))` for n >= 1.
    pub local: Vec<(usize, f64)>,
    /// `(n, FID(S_n, S_0))` for n >= 0.
    pub cumulative: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhaseConfig {
    pub window: usize,
    pub slope_active: f64,
    pub slope_flat: f64,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        Self {
            window: 5,
            slope_active: 0.05,
            slope_flat: 0.01,
        }
    }
}

impl PhaseConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < 3 {
            return Err(Error::InvalidParameter(format!(
                "phase window must be >= 3, got {}",
                self.window
            )));
        }
        if !(self.slope_flat > 0.0 && self.slope_flat < self.slope_active) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < slope_flat < slope_active, got {} and {}",
                self.slope_flat, self.slope_active
            )));
        }
        Ok(())
    }
}

pub fn drift_curves(summaries: &[GaussianSummary]) -> Result<DriftCurves> {
    if summaries.len() < 2 {
        return Err(Error::TooFewGenerations {
            required: 2,
            found: summaries.len(),
        });
    }
    let first = &summaries[0];
    let mut curves = DriftCurves {
        local: Vec::with_capacity(summaries.len() - 1),
        cumulative: vec![(0, 0.0)],
    };
    for (n, pair) in summaries.windows(2).enumerate() {
        curves.local.push((n + 1, frechet_distance(&pair[1], &pair[0])?));
        curves.cumulative.push((n + 1, frechet_distance(&pair[1], first)?));
    }
    Ok(curves)
}

/// Labels every trailing window over which both curves are defined.
pub fn classify_phases(curves: &DriftCurves, config: &PhaseConfig) -> Result<Vec<(usize, PhaseLabel)>> {
    config.validate()?;
    let w = config.window;
    if curves.local.len() < w {
        return Err(Error::WindowTooLarge {
            window: w,
            len: curves.local.len(),
        });
    }
    let local = windowed_slopes(&curves.local, w);
    let cumulative: std::collections::HashMap<usize, f64> =
        windowed_slopes(&curves.cumulative, w).into_iter().collect();

    let labels = local
        .into_iter()
        .filter_map(|(n, s_local)| {
            let s_cum = *cumulative.get(&n)?;
            let (a, b) = (s_local.abs(), s_cum.abs());
            let label = if a >= config.slope_active && b >= config.slope_active {
                PhaseLabel::ActiveTransient
            } else if a <= config.slope_flat && b <= config.slope_flat {
                PhaseLabel::Stationary
            } else {
                PhaseLabel::SlowTransient
            };
            Some((n, label))
        })
        .collect();
    Ok(labels)
}

/// First generation from which every later label is `Stationary`.
pub fn stationarity_onset(phases: &[(usize, PhaseLabel)]) -> Option<usize> {
    let suffix = phases
        .iter()
        .rev()
        .take_while(|(_, l)| *l == PhaseLabel::Stationary)
        .count();
    if suffix == 0 {
        None
    } else {
        Some(phases[phases.len() - suffix].0)
    }
}
