use serde::{Deserialize, Serialize};

use super::ChainOperator;
use crate::error::{Error, Result};
use crate::linalg::estimate_gaussian;
use crate::metrics::frechet_distance;
use crate::slope::{max_normalize, theil_sen};
use crate::taxonomy::TrendConfig;
use crate::types::{Direction, FeatureBatch, MetricTrace, Trend};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeConfig {
    /// Chains forget their start when the terminal FID drops below this
    /// fraction of the initial FID.
    pub tolerance_fraction: f64,
    /// Minimum FID separating the two starting batches.
    pub min_initial_fid: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            tolerance_fraction: 0.05,
            min_initial_fid: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErgodicityReport {
    pub forgets_init: bool,
    pub initial_fid_ab: f64,
    pub final_fid_ab: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub directional_contraction: bool,
    pub pr_floor: f64,
    pub first_half: Trend,
    pub second_half: Trend,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResonanceVerdict {
    Resonant,
    NonErgodic,
    NonContracting,
    Indeterminate,
}

/// Runs two trajectories of `op` from different starts and checks whether their
/// terminal distributions coincide.
pub fn ergodicity_probe(
    op: &ChainOperator,
    init_a: &FeatureBatch,
    init_b: &FeatureBatch,
    n_generations: usize,
    config: &ProbeConfig,
) -> Result<ErgodicityReport> {
    if n_generations < 1 {
        return Err(Error::TooFewGenerations {
            required: 1,
            found: n_generations,
        });
    }
    let initial_fid_ab = frechet_distance(&estimate_gaussian(init_a)?, &estimate_gaussian(init_b)?)?;
    if initial_fid_ab < config.min_initial_fid {
        return Err(Error::InitsTooClose {
            fid: initial_fid_ab,
            required: config.min_initial_fid,
        });
    }
    let advance = |start: &FeatureBatch, trajectory: u64| -> Result<FeatureBatch> {
        let mut x = start.clone();
        for n in 1..=n_generations {
            x = op.step_generation(&x, trajectory, n).map_err(Error::at_generation(n))?;
        }
        Ok(x)
    };
    let end_a = advance(init_a, 0)?;
    let end_b = advance(init_b, 1)?;
    let final_fid_ab = frechet_distance(&estimate_gaussian(&end_a)?, &estimate_gaussian(&end_b)?)?;
    let threshold = config.tolerance_fraction * initial_fid_ab;
    Ok(ErgodicityReport {
        forgets_init: final_fid_ab < threshold,
        initial_fid_ab,
        final_fid_ab,
        threshold,
    })
}

/// Checks for a declining-then-plateauing global participation ratio.
///
/// Contraction holds when the PR_G trend over the first half of the trace is
/// `Down`, the trend over the second half is not `Up`, and the final value is
/// below the initial one. `pr_floor` is the mean PR_G over the final window.
pub fn contraction_probe(trace: &MetricTrace, config: &TrendConfig) -> Result<ContractionReport> {
    config.validate()?;
    let len = trace.len();
    if len < 2 * config.window {
        return Err(Error::TraceTooShort {
            len,
            required: 2 * config.window,
        });
    }
    let series = trace.pr_g_series();
    let values: Vec<f64> = series.iter().map(|p| p.1).collect();
    let normalized: Vec<(f64, f64)> = series
        .iter()
        .zip(max_normalize(&values))
        .map(|(&(n, _), v)| (n as f64, v))
        .collect();
    let half = len / 2;
    let first_half = Trend::from_slope(theil_sen(&normalized[..half]).unwrap_or(0.0), config.theta_slope);
    let second_half = Trend::from_slope(theil_sen(&normalized[half..]).unwrap_or(0.0), config.theta_slope);
    let directional_contraction = first_half.direction == Direction::Down
        && second_half.direction != Direction::Up
        && values[len - 1] < values[0];
    let pr_floor = values[len - config.window..].iter().sum::<f64>() / config.window as f64;
    Ok(ContractionReport {
        directional_contraction,
        pr_floor,
        first_half,
        second_half,
    })
}

pub fn resonance_verdict(ergodicity: &ErgodicityReport, contraction: &ContractionReport) -> ResonanceVerdict {
    match (ergodicity.forgets_init, contraction.directional_contraction) {
        (true, true) => ResonanceVerdict::Resonant,
        (false, _) => ResonanceVerdict::NonErgodic,
        (true, false) => ResonanceVerdict::NonContracting,
    }
}

/// Combines repeated verdicts; any disagreement is `Indeterminate`.
pub fn aggregate_verdicts(verdicts: &[ResonanceVerdict]) -> ResonanceVerdict {
    match verdicts.split_first() {
        Some((first, rest)) if rest.iter().all(|v| v == first) => *first,
        _ => ResonanceVerdict::Indeterminate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::TraceRow;

    fn pr_trace(values: &[f64]) -> MetricTrace {
        MetricTrace::from_rows(
            values
                .iter()
                .enumerate()
                .map(|(n, &p)| TraceRow {
                    n,
                    fid_local: (n > 0).then_some(0.0),
                    fid_cumulative: 0.0,
                    sigma_intra: None,
                    m_lb: 1.0,
                    pr_g: p,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn decline_then_plateau_contracts() {
        let mut v: Vec<f64> = (0..=10).map(|n| 16.0 - 1.2 * n as f64).collect();
        v.extend(std::iter::repeat_n(4.0, 15));
        let r = contraction_probe(&pr_trace(&v), &TrendConfig::default()).unwrap();
        assert!(r.directional_contraction);
        assert!((r.pr_floor - 4.0).abs() < 1e-12);
    }

    #[test]
    fn increase_does_not_contract() {
        let v: Vec<f64> = (0..20).map(|n| 2.0 + 0.5 * n as f64).collect();
        let r = contraction_probe(&pr_trace(&v), &TrendConfig::default()).unwrap();
        assert!(!r.directional_contraction);
        let tail = v[13..].iter().sum::<f64>() / 7.0;
        assert!((r.pr_floor - tail).abs() < 1e-12);
    }

    #[test]
    fn short_trace_rejected() {
        let v = vec![1.0; 10];
        assert!(matches!(
            contraction_probe(&pr_trace(&v), &TrendConfig::default()),
            Err(Error::TraceTooShort { required: 14, .. })
        ));
    }

    #[test]
    fn verdict_table() {
        let erg = |f| ErgodicityReport {
            forgets_init: f,
            initial_fid_ab: 1.0,
            final_fid_ab: 0.0,
            threshold: 0.05,
        };
        let flat = Trend {
            direction: Direction::Flat,
            slope: 0.0,
        };
        let con = |c| ContractionReport {
            directional_contraction: c,
            pr_floor: 1.0,
            first_half: flat,
            second_half: flat,
        };
        assert_eq!(resonance_verdict(&erg(true), &con(true)), ResonanceVerdict::Resonant);
        assert_eq!(resonance_verdict(&erg(false), &con(true)), ResonanceVerdict::NonErgodic);
        assert_eq!(
            resonance_verdict(&erg(true), &con(false)),
            ResonanceVerdict::NonContracting
        );
        assert_eq!(
            resonance_verdict(&erg(false), &con(false)),
            ResonanceVerdict::NonErgodic
        );
    }

    #[test]
    fn aggregation() {
        use ResonanceVerdict::*;
        assert_eq!(aggregate_verdicts(&[Resonant, Resonant]), Resonant);
        assert_eq!(aggregate_verdicts(&[Resonant, NonErgodic]), Indeterminate);
        assert_eq!(aggregate_verdicts(&[]), Indeterminate);
    }
}
