//! Generational Markov chains: the transition operator, trajectory runner and
//! the ergodicity / contraction probes.
//!
//! A chain is `X_{n+1} = T(X_n)` where each `X_n` is a whole [`FeatureBatch`].
//! Five operators are provided:
//!
//! | kind | step | stationary behaviour |
//! |---|---|---|
//! | `LinearGaussian` | `A x + b + σζ` | unique Gaussian law when ρ(A) < 1 |
//! | `LatentFeedback` | `M F x + σζ` | law concentrated on the `r`-dim latent subspace |
//! | `Convolution` | `norm(x * h)` | deterministic; absorbed by dominant modes |
//! | `CycleMap` | `f_ba(f_ab(x))` | deterministic; basin-dependent fixed points |
//! | `DdpmAnalytic` | full reverse diffusion | fresh sample of the target law |

mod convolution;
mod cycle;
mod ddpm;
mod linear;
mod probe;
mod run;

pub use convolution::ConvolutionParams;
pub use cycle::{CycleMapParams, Domain, SaturatingMap};
pub use ddpm::DdpmParams;
pub use linear::{LatentFeedbackParams, LinearGaussianParams};
pub use probe::{
    aggregate_verdicts, contraction_probe, ergodicity_probe, resonance_verdict, ContractionReport, ErgodicityReport,
    ProbeConfig, ResonanceVerdict,
};
pub use run::{run_chain, ChainRun, Retention, RunOptions};

use crate::error::{Error, Result};
use crate::rng::{generation_stream, StreamRng};
use crate::types::FeatureBatch;

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorKind {
    LinearGaussian(LinearGaussianParams),
    LatentFeedback(LatentFeedbackParams),
    Convolution(ConvolutionParams),
    CycleMap(CycleMapParams),
    DdpmAnalytic(DdpmParams),
}

/// A transition rule plus the seed all of its randomness derives from.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainOperator {
    pub kind: OperatorKind,
    pub rng_seed: u64,
}

impl ChainOperator {
    pub fn new(kind: OperatorKind, rng_seed: u64) -> Self {
        Self { kind, rng_seed }
    }

    /// Feature dimension the operator acts on (signal length for convolution).
    pub fn dim(&self) -> usize {
        match &self.kind {
            OperatorKind::LinearGaussian(p) => p.dim(),
            OperatorKind::LatentFeedback(p) => p.dim(),
            OperatorKind::Convolution(p) => p.signal_len,
            OperatorKind::CycleMap(p) => p.dim,
            OperatorKind::DdpmAnalytic(p) => p.dim(),
        }
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self.kind, OperatorKind::Convolution(_) | OperatorKind::CycleMap(_))
    }

    /// One application of the operator using an explicit random stream.
    pub fn step(&self, batch: &FeatureBatch, rng: &mut StreamRng) -> Result<FeatureBatch> {
        if batch.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: batch.dim(),
            });
        }
        match &self.kind {
            OperatorKind::LinearGaussian(p) => p.apply(batch, rng),
            OperatorKind::LatentFeedback(p) => p.apply(batch, rng),
            OperatorKind::Convolution(p) => p.apply(batch),
            OperatorKind::CycleMap(p) => p.apply(batch),
            OperatorKind::DdpmAnalytic(p) => p.apply(batch, rng),
        }
    }

    /// Produces generation `generation` of `trajectory` from its predecessor.
    /// The random stream is a pure function of `(rng_seed, trajectory, generation)`.
    pub fn step_generation(&self, batch: &FeatureBatch, trajectory: u64, generation: usize) -> Result<FeatureBatch> {
        let mut rng = generation_stream(self.rng_seed, trajectory, generation);
        self.step(batch, &mut rng)
    }
}
