//! TOML run configuration.
//!
//! ```toml
//! seed = 7
//! generations = 300
//! samples = 2000
//! output = "runs/linear"
//!
//! [operator]
//! kind = "linear_gaussian"
//! a = [[0.9, 0.1], [0.0, 0.5]]
//! sigma = 0.5
//!
//! [initial]
//! kind = "gaussian"
//! mean = 5.0
//! classes = 2
//! class_spread = 1.0
//!
//! [probe.init_b]
//! kind = "gaussian"
//! mean = -5.0
//! ```
//!
//! Relative paths are resolved against the directory holding the config file.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::features::read_feature_batch;
use crate::chains::{
    ChainOperator, ConvolutionParams, CycleMapParams, DdpmParams, Domain, LatentFeedbackParams, LinearGaussianParams,
    OperatorKind, ProbeConfig, Retention, RunOptions, SaturatingMap,
};
use crate::drift::PhaseConfig;
use crate::error::{Error, Result};
use crate::metrics::MetricConfig;
use crate::rng::stream;
use crate::taxonomy::TrendConfig;
use crate::types::{FeatureBatch, GaussianSummary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub generations: usize,
    /// Rows per generated starting batch.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    pub operator: OperatorSpec,
    pub initial: InitialSpec,
    #[serde(default)]
    pub probe: ProbeSection,
    #[serde(default)]
    pub metrics: MetricConfig,
    #[serde(default)]
    pub phase: PhaseConfig,
    #[serde(default)]
    pub trend: TrendConfig,
    #[serde(default)]
    pub retention: RetentionSection,
    #[serde(skip)]
    base_dir: PathBuf,
}

fn default_samples() -> usize {
    1000
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    LinearGaussian {
        a: Vec<Vec<f64>>,
        #[serde(default)]
        b: Option<Vec<f64>>,
        sigma: f64,
    },
    /// Either explicit `f` (r x D) and `m` (D x r), or `dim` plus per-axis `gains`
    /// on a random orthonormal latent basis.
    LatentFeedback {
        #[serde(default)]
        dim: Option<usize>,
        #[serde(default)]
        gains: Option<Vec<f64>>,
        #[serde(default)]
        f: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        m: Option<Vec<Vec<f64>>>,
        sigma: f64,
    },
    Convolution {
        h: Vec<f64>,
        signal_len: usize,
    },
    CycleMap {
        dim: usize,
        #[serde(default)]
        start: Domain,
        #[serde(default)]
        f_ab: Option<SaturatingMap>,
        #[serde(default)]
        f_ba: Option<SaturatingMap>,
    },
    DdpmAnalytic {
        #[serde(default = "default_steps")]
        steps: usize,
        #[serde(default = "default_beta_start")]
        beta_start: f64,
        #[serde(default = "default_beta_end")]
        beta_end: f64,
        target_mean: Vec<f64>,
        target_covariance: Vec<Vec<f64>>,
        #[serde(default)]
        mean_feedback: bool,
    },
}

fn default_steps() -> usize {
    1000
}
fn default_beta_start() -> f64 {
    1e-4
}
fn default_beta_end() -> f64 {
    0.02
}

/// A scalar broadcast to every coordinate, or a full vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Broadcast {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl Broadcast {
    fn expand(&self, dim: usize) -> Result<Vec<f64>> {
        match self {
            Broadcast::Scalar(v) => Ok(vec![*v; dim]),
            Broadcast::Vector(v) if v.len() == dim => Ok(v.clone()),
            Broadcast::Vector(v) => Err(Error::DimensionMismatch {
                expected: dim,
                found: v.len(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// Isotropic Gaussian rows. With `classes > 0`, row `i` gets label
    /// `i % classes` and class `c` is shifted by `class_spread` along axis `c % D`.
    Gaussian {
        #[serde(default)]
        mean: Option<Broadcast>,
        #[serde(default = "one")]
        std: f64,
        #[serde(default)]
        classes: u32,
        #[serde(default)]
        class_spread: f64,
    },
    /// Random-phase sinusoids, one class per frequency (cycles per sample),
    /// plus white noise.
    Sinusoids {
        frequencies: Vec<f64>,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        noise: f64,
    },
    /// A CSV or GMCF feature file.
    File { path: PathBuf },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSection {
    pub tolerance_fraction: f64,
    pub min_initial_fid: f64,
    /// Independent repeats with seeds `seed, seed + 1, ...`; disagreeing
    /// verdicts aggregate to `Indeterminate`.
    pub repeats: usize,
    /// Second starting batch. Defaults to the `[initial]` spec with a negated mean.
    pub init_b: Option<InitialSpec>,
}

impl Default for ProbeSection {
    fn default() -> Self {
        let c = ProbeConfig::default();
        Self {
            tolerance_fraction: c.tolerance_fraction,
            min_initial_fid: c.min_initial_fid,
            repeats: 1,
            init_b: None,
        }
    }
}

impl ProbeSection {
    pub fn config(&self) -> ProbeConfig {
        ProbeConfig {
            tolerance_fraction: self.tolerance_fraction,
            min_initial_fid: self.min_initial_fid,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetentionPolicy {
    All,
    EveryK,
    SummariesOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetentionSection {
    pub policy: RetentionPolicy,
    pub k: usize,
    pub max_snapshots: usize,
}

impl Default for RetentionSection {
    fn default() -> Self {
        Self {
            policy: RetentionPolicy::All,
            k: 1,
            max_snapshots: 64,
        }
    }
}

impl RetentionSection {
    pub fn retention(&self) -> Result<Retention> {
        Ok(match self.policy {
            RetentionPolicy::All => Retention::All,
            RetentionPolicy::SummariesOnly => Retention::SummariesOnly,
            RetentionPolicy::EveryK if self.k == 0 => return Err(Error::Config("retention.k must be positive".into())),
            RetentionPolicy::EveryK => Retention::EveryK(self.k),
        })
    }
}

fn matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let n = rows.len();
    let d = rows.first().map_or(0, Vec::len);
    if n == 0 || d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(Error::Config(format!("{what} must be a non-empty rectangular matrix")));
    }
    Ok(DMatrix::from_fn(n, d, |i, j| rows[i][j]))
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
        let mut config = Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.generations == 0 {
            return Err(Error::Config("generations must be at least 1".into()));
        }
        if self.samples < 2 {
            return Err(Error::Config("samples must be at least 2".into()));
        }
        if self.probe.repeats == 0 {
            return Err(Error::Config("probe.repeats must be at least 1".into()));
        }
        self.metrics.validate()?;
        self.phase.validate()?;
        self.trend.validate()?;
        self.retention.retention()?;
        Ok(())
    }

    /// Resolves a path from the config against the config file's directory.
    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.output)
    }

    pub fn build_operator(&self) -> Result<ChainOperator> {
        self.build_operator_seeded(self.seed)
    }

    pub fn build_operator_seeded(&self, seed: u64) -> Result<ChainOperator> {
        let kind = match &self.operator {
            OperatorSpec::LinearGaussian { a, b, sigma } => {
                let a = matrix(a, "operator.a")?;
                let b = match b {
                    Some(b) => DVector::from_column_slice(b),
                    None => DVector::zeros(a.nrows()),
                };
                OperatorKind::LinearGaussian(LinearGaussianParams::new(a, b, *sigma)?)
            }
            OperatorSpec::LatentFeedback {
                dim,
                gains,
                f,
                m,
                sigma,
            } => {
                let params = match (dim, gains, f, m) {
                    (Some(dim), Some(gains), None, None) => {
                        LatentFeedbackParams::orthogonal(*dim, gains, *sigma, seed)?
                    }
                    (None, None, Some(f), Some(m)) => {
                        LatentFeedbackParams::new(matrix(f, "operator.f")?, matrix(m, "operator.m")?, *sigma)?
                    }
                    _ => {
                        return Err(Error::Config(
                            "latent_feedback needs either dim + gains or f + m".into(),
                        ))
                    }
                };
                OperatorKind::LatentFeedback(params)
            }
            OperatorSpec::Convolution { h, signal_len } => {
                OperatorKind::Convolution(ConvolutionParams::new(h.clone(), *signal_len)?)
            }
            OperatorSpec::CycleMap { dim, start, f_ab, f_ba } => {
                let base = CycleMapParams::bistable(*dim, *start)?;
                OperatorKind::CycleMap(CycleMapParams::new(
                    *dim,
                    f_ab.unwrap_or(base.f_ab),
                    f_ba.unwrap_or(base.f_ba),
                    *start,
                )?)
            }
            OperatorSpec::DdpmAnalytic {
                steps,
                beta_start,
                beta_end,
                target_mean,
                target_covariance,
                mean_feedback,
            } => {
                let target = GaussianSummary::new(
                    DVector::from_column_slice(target_mean),
                    matrix(target_covariance, "operator.target_covariance")?,
                )?;
                OperatorKind::DdpmAnalytic(
                    DdpmParams::with_schedule(*steps, *beta_start, *beta_end, target)?
                        .with_mean_feedback(*mean_feedback),
                )
            }
        };
        Ok(ChainOperator::new(kind, seed))
    }

    pub fn run_options(&self) -> Result<RunOptions> {
        Ok(RunOptions {
            metrics: self.metrics,
            retention: self.retention.retention()?,
            max_snapshots: self.retention.max_snapshots,
            trajectory: 0,
        })
    }

    pub fn initial_batch(&self, dim: usize) -> Result<FeatureBatch> {
        self.build_initial(&self.initial, dim, self.seed, "initial/a")
    }

    /// The probe's second start: `probe.init_b`, or the first start mirrored
    /// through the origin.
    pub fn probe_initial_b(&self, dim: usize, seed: u64) -> Result<FeatureBatch> {
        let mirrored;
        let spec = match (&self.probe.init_b, &self.initial) {
            (Some(spec), _) => spec,
            (
                None,
                InitialSpec::Gaussian {
                    mean,
                    std,
                    classes,
                    class_spread,
                },
            ) => {
                let flipped = match mean {
                    Some(m) => Broadcast::Vector(m.expand(dim)?.iter().map(|v| -v).collect()),
                    None => {
                        return Err(Error::Config(
                            "probe.init_b is required when [initial] has no mean".into(),
                        ))
                    }
                };
                mirrored = InitialSpec::Gaussian {
                    mean: Some(flipped),
                    std: *std,
                    classes: *classes,
                    class_spread: *class_spread,
                };
                &mirrored
            }
            (None, _) => return Err(Error::Config("probe.init_b is required for this initial kind".into())),
        };
        self.build_initial(spec, dim, seed, "initial/b")
    }

    pub fn build_initial(&self, spec: &InitialSpec, dim: usize, seed: u64, stream_name: &str) -> Result<FeatureBatch> {
        let mut rng = stream(seed, stream_name);
        let n = self.samples;
        match spec {
            InitialSpec::Gaussian {
                mean,
                std,
                classes,
                class_spread,
            } => {
                let mean = match mean {
                    Some(m) => m.expand(dim)?,
                    None => vec![0.0; dim],
                };
                let mut data = DMatrix::zeros(n, dim);
                for i in 0..n {
                    for j in 0..dim {
                        data[(i, j)] = mean[j] + std * rng.sample::<f64, _>(StandardNormal);
                    }
                }
                let labels = (*classes > 0).then(|| (0..n).map(|i| i as u32 % classes).collect::<Vec<_>>());
                if let Some(labels) = &labels {
                    for (i, &c) in labels.iter().enumerate() {
                        data[(i, c as usize % dim)] += class_spread * f64::from(c);
                    }
                }
                FeatureBatch::new(data, labels)
            }
            InitialSpec::Sinusoids {
                frequencies,
                amplitude,
                noise,
            } => {
                if frequencies.is_empty() {
                    return Err(Error::Config("sinusoids need at least one frequency".into()));
                }
                let mut data = DMatrix::zeros(n, dim);
                let mut labels = Vec::with_capacity(n);
                for i in 0..n {
                    let class = i % frequencies.len();
                    let phase = rng.random::<f64>() * std::f64::consts::TAU;
                    let w = std::f64::consts::TAU * frequencies[class];
                    for t in 0..dim {
                        data[(i, t)] =
                            amplitude * (w * t as f64 + phase).sin() + noise * rng.sample::<f64, _>(StandardNormal);
                    }
                    labels.push(class as u32);
                }
                FeatureBatch::new(data, Some(labels))
            }
            InitialSpec::File { path } => {
                let batch = read_feature_batch(self.resolve(path))?;
                if batch.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: batch.dim(),
                    });
                }
                Ok(batch)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINEAR: &str = r#"
seed = 3
generations = 10
samples = 50

[operator]
kind = "linear_gaussian"
a = [[0.5, 0.0], [0.0, 0.5]]
sigma = 1.0

[initial]
kind = "gaussian"
mean = [4.0, 4.0]
classes = 2
"#;

    #[test]
    fn parses_and_builds() {
        let c = RunConfig::from_toml_str(LINEAR).unwrap();
        let op = c.build_operator().unwrap();
        assert_eq!(op.dim(), 2);
        let a = c.initial_batch(2).unwrap();
        assert_eq!(a.n_samples(), 50);
        assert_eq!(a.labels().unwrap()[..4], [0, 1, 0, 1]);
        let b = c.probe_initial_b(2, c.seed).unwrap();
        let mean_b: f64 = b.data().column(0).mean();
        assert!(mean_b < -3.0);
        assert_eq!(c.metrics, MetricConfig::default());
        assert_eq!(c.initial_batch(2).unwrap(), a);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = LINEAR.replace("samples = 50", "samples = 50\nsamles = 3");
        assert!(matches!(RunConfig::from_toml_str(&text), Err(Error::Config(_))));
    }

    #[test]
    fn latent_feedback_needs_one_form() {
        let text = r#"
seed = 1
generations = 5
[operator]
kind = "latent_feedback"
dim = 4
sigma = 0.1
[initial]
kind = "gaussian"
"#;
        let c = RunConfig::from_toml_str(text).unwrap();
        assert!(matches!(c.build_operator(), Err(Error::Config(_))));
    }
}
