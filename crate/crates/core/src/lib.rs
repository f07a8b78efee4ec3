//! Simulation and diagnostics for generational Markov chains: processes that
//! repeatedly feed a generator's output back in as its next input.
//!
//! The crate covers
//!
//! - [`metrics`]: Fréchet distance, intra-class spread σ_intra, Levina–Bickel
//!   intrinsic dimension m_LB and global participation ratio PR_G,
//! - [`drift`]: local / cumulative drift curves and phase labels,
//! - [`taxonomy`]: trend extraction and the eight dimensional patterns,
//! - [`chains`]: five transition operators, trajectory runs and probes for
//!   ergodicity and directional contraction,
//! - [`acoustic`]: the repeated room-response convolution analogue on WAV audio,
//! - [`io`] and [`cli`]: feature-file formats, trace files, configuration and
//!   the command-line entry point.
//!
//! Runnable walkthroughs live in `examples/`.

pub mod acoustic;
pub mod chains;
pub mod cli;
pub mod drift;
pub mod error;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod rng;
pub mod slope;
pub mod taxonomy;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    validate_batch, DimensionalPattern, Direction, FeatureBatch, GaussianSummary, MetricTrace, PhaseLabel, TraceRow,
    Trend,
};
