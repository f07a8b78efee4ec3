use serde::{Deserialize, Serialize};

use super::ChainOperator;
use crate::error::{Error, Result};
use crate::linalg::estimate_gaussian;
use crate::metrics::{trace_row_from_summaries, DriftReferences, MetricConfig};
use crate::types::{FeatureBatch, GaussianSummary, MetricTrace};

/// Which generation batches to keep. Summaries are always kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Retention {
    All,
    EveryK(usize),
    SummariesOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub metrics: MetricConfig,
    pub retention: Retention,
    /// Snapshot batches stop being retained once this many are held.
    pub max_snapshots: usize,
    pub trajectory: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            metrics: MetricConfig::default(),
            retention: Retention::All,
            max_snapshots: 64,
            trajectory: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChainRun {
    pub trace: MetricTrace,
    /// One summary per generation, index = generation.
    pub summaries: Vec<GaussianSummary>,
    pub snapshots: Vec<(usize, FeatureBatch)>,
    pub final_batch: FeatureBatch,
}

impl Retention {
    fn keeps(self, generation: usize) -> bool {
        match self {
            Retention::All => true,
            Retention::EveryK(k) => k > 0 && generation.is_multiple_of(k),
            Retention::SummariesOnly => false,
        }
    }
}

/// Iterates the operator `n_generations` times from `initial`, measuring every
/// generation (including 0).
pub fn run_chain(
    op: &ChainOperator,
    initial: &FeatureBatch,
    n_generations: usize,
    options: &RunOptions,
) -> Result<ChainRun> {
    if n_generations < 1 {
        return Err(Error::TooFewGenerations {
            required: 1,
            found: n_generations,
        });
    }
    options.metrics.validate()?;

    let first_summary = estimate_gaussian(initial).map_err(Error::at_generation(0))?;
    let mut trace = MetricTrace::new();
    trace.push(
        trace_row_from_summaries(
            0,
            initial,
            &first_summary,
            DriftReferences {
                previous: None,
                first: &first_summary,
            },
            &options.metrics,
        )
        .map_err(Error::at_generation(0))?,
    )?;

    let mut snapshots = Vec::new();
    let retain = |n: usize, b: &FeatureBatch, snapshots: &mut Vec<(usize, FeatureBatch)>| {
        if options.retention.keeps(n) && snapshots.len() < options.max_snapshots {
            snapshots.push((n, b.clone()));
        }
    };
    retain(0, initial, &mut snapshots);

    let mut summaries = vec![first_summary];
    let mut current = initial.clone();
    for n in 1..=n_generations {
        let at = Error::at_generation(n);
        let next = match op.step_generation(&current, options.trajectory, n) {
            Ok(b) => b,
            Err(e) => return Err(at(e)),
        };
        let summary = estimate_gaussian(&next).map_err(Error::at_generation(n))?;
        let row = trace_row_from_summaries(
            n,
            &next,
            &summary,
            DriftReferences {
                previous: summaries.last(),
                first: &summaries[0],
            },
            &options.metrics,
        )
        .map_err(Error::at_generation(n))?;
        trace.push(row)?;
        retain(n, &next, &mut snapshots);
        summaries.push(summary);
        current = next;
    }

    Ok(ChainRun {
        trace,
        summaries,
        snapshots,
        final_batch: current,
    })
}
