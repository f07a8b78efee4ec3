//! Trend extraction on metric trajectories and the eight-pattern
//! classification of joint (σ_intra, m_LB, PR_G) dynamics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::slope::{max_normalize, theil_sen, windowed_slopes};
use crate::types::{DimensionalPattern, Direction, MetricTrace, Trend};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrendConfig {
    pub window: usize,
    /// Dead zone on max-normalized slopes, per generation.
    pub theta_slope: f64,
}

impl Default for TrendConfig {
    fn default() -> Self {
        Self {
            window: 7,
            theta_slope: 0.01,
        }
    }
}

impl TrendConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < 3 {
            return Err(Error::InvalidParameter(format!(
                "trend window must be >= 3, got {}",
                self.window
            )));
        }
        if self.theta_slope <= 0.0 || !self.theta_slope.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "theta_slope must be positive, got {}",
                self.theta_slope
            )));
        }
        Ok(())
    }
}

/// A maximal run of generations sharing one pattern, `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternSegment {
    pub start: usize,
    /// Exclusive.
    pub end: usize,
    pub pattern: DimensionalPattern,
    /// Trends of (σ_intra, m_LB, PR_G) fitted over the points feeding this segment.
    pub trends: (Trend, Trend, Trend),
    /// Mean over the three metrics of the standard deviation of windowed slopes
    /// inside the segment. High values flag step-to-step fluctuation.
    pub volatility: f64,
}

/// Windowed Theil–Sen trend of a max-normalized series.
pub fn trend(series: &[(usize, f64)], config: &TrendConfig) -> Result<Vec<(usize, Trend)>> {
    config.validate()?;
    if series.len() < config.window {
        return Err(Error::WindowTooLarge {
            window: config.window,
            len: series.len(),
        });
    }
    Ok(windowed_slopes(series, config.window)
        .into_iter()
        .map(|(n, s)| (n, Trend::from_slope(s, config.theta_slope)))
        .collect())
}

pub fn classify_pattern(sigma: Direction, m_lb: Direction, pr: Direction) -> DimensionalPattern {
    use DimensionalPattern::*;
    use Direction::{Down, Up};
    match (sigma, m_lb, pr) {
        (Up, Up, Up) => CoherentExpansion,
        (Up, Up, Down) => WrinkledExpansion,
        (Up, Down, Up) => AnisotropicExpansion,
        (Up, Down, Down) => OblateExpansion,
        (Down, Down, Down) => CoherentContraction,
        (Down, Down, Up) => AnisotropicContraction,
        (Down, Up, Down) => WrinkledContraction,
        (Down, Up, Up) => OblateContraction,
        _ => Flat,
    }
}

#[derive(Debug, Clone)]
struct Run {
    start: usize,
    end: usize,
    pattern: DimensionalPattern,
}

fn runs_of(per_generation: &[(usize, DimensionalPattern)], last_end: usize) -> Vec<Run> {
    let mut runs: Vec<Run> = Vec::new();
    for (i, &(n, p)) in per_generation.iter().enumerate() {
        let end = per_generation.get(i + 1).map_or(last_end, |next| next.0);
        match runs.last_mut() {
            Some(r) if r.pattern == p => r.end = end,
            _ => runs.push(Run {
                start: n,
                end,
                pattern: p,
            }),
        }
    }
    runs
}

fn merge_adjacent(runs: Vec<Run>) -> Vec<Run> {
    let mut out: Vec<Run> = Vec::with_capacity(runs.len());
    for r in runs {
        match out.last_mut() {
            Some(prev) if prev.pattern == r.pattern => prev.end = r.end,
            _ => out.push(r),
        }
    }
    out
}

/// Flat runs shorter than `min_len` generations join the preceding run, or the
/// following run when they open the trace.
fn absorb_short_flats(runs: Vec<Run>, per_generation_count: &dyn Fn(&Run) -> usize, min_len: usize) -> Vec<Run> {
    let mut out: Vec<Run> = Vec::with_capacity(runs.len());
    let mut pending: Option<(usize, usize)> = None;
    for r in runs {
        let short_flat = r.pattern == DimensionalPattern::Flat && per_generation_count(&r) < min_len;
        if short_flat {
            if let Some(prev) = out.last_mut() {
                prev.end = r.end;
            } else {
                let start = pending.map_or(r.start, |p| p.0);
                pending = Some((start, r.end));
            }
            continue;
        }
        let mut r = r;
        if let Some((s, _)) = pending.take() {
            r.start = s;
        }
        out.push(r);
    }
    if let Some((start, end)) = pending {
        // nothing but short flats
        out.push(Run {
            start,
            end,
            pattern: DimensionalPattern::Flat,
        });
    }
    merge_adjacent(out)
}

fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

/// Segments a trace into runs of constant dimensional pattern.
pub fn segment_patterns(trace: &MetricTrace, config: &TrendConfig) -> Result<Vec<PatternSegment>> {
    config.validate()?;
    if trace.len() < config.window {
        return Err(Error::TraceTooShort {
            len: trace.len(),
            required: config.window,
        });
    }
    let sigma = trace.sigma_intra_series().ok_or(Error::MissingLabels)?;
    let series = [sigma, trace.m_lb_series(), trace.pr_g_series()];
    let trends: Vec<Vec<(usize, Trend)>> = series.iter().map(|s| trend(s, config)).collect::<Result<_>>()?;

    let per_generation: Vec<(usize, DimensionalPattern)> = (0..trends[0].len())
        .map(|i| {
            let n = trends[0][i].0;
            (
                n,
                classify_pattern(
                    trends[0][i].1.direction,
                    trends[1][i].1.direction,
                    trends[2][i].1.direction,
                ),
            )
        })
        .collect();
    let last_n = trace.rows().last().map(|r| r.n).unwrap_or(0);
    let count_in = |r: &Run| {
        per_generation
            .iter()
            .filter(|(n, _)| *n >= r.start && *n < r.end)
            .count()
    };
    let runs = absorb_short_flats(runs_of(&per_generation, last_n + 1), &count_in, config.window);

    let normalized: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            let vals: Vec<f64> = s.iter().map(|p| p.1).collect();
            s.iter()
                .zip(max_normalize(&vals))
                .map(|(&(n, _), v)| (n as f64, v))
                .collect()
        })
        .collect();
    let first_window_gen = per_generation[0].0;
    let trace_ns: Vec<usize> = trace.rows().iter().map(|r| r.n).collect();

    Ok(runs
        .into_iter()
        .map(|r| {
            // points that fed any window ending inside the segment
            let first_idx = trace_ns.iter().position(|&n| n >= r.start).unwrap_or(0);
            let lo = first_idx.saturating_sub(config.window - 1);
            let hi = trace_ns.iter().rposition(|&n| n < r.end).unwrap_or(trace_ns.len() - 1);
            let fit = |m: usize| {
                let slope = theil_sen(&normalized[m][lo..=hi]).unwrap_or(0.0);
                Trend::from_slope(slope, config.theta_slope)
            };
            let volatility = (0..3)
                .map(|m| {
                    let slopes: Vec<f64> = trends[m]
                        .iter()
                        .filter(|(n, _)| *n >= r.start.max(first_window_gen) && *n < r.end)
                        .map(|(_, t)| t.slope)
                        .collect();
                    std_dev(&slopes)
                })
                .sum::<f64>()
                / 3.0;
            PatternSegment {
                start: r.start,
                end: r.end,
                pattern: r.pattern,
                trends: (fit(0), fit(1), fit(2)),
                volatility,
            }
        })
        .collect())
}
