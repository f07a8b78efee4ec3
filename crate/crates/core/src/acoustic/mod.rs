//! Repeated room-response filtering of audio: `X_{n+1} = norm(X_n * h)`.
//!
//! Signals are convolved with an impulse response through zero-padded real
//! FFTs, truncated back to the input length and rescaled to unit RMS. Each
//! generation is embedded as log band energies over non-overlapping windows so
//! that the standard metrics apply.

mod embed;
mod wav;

pub use embed::{band_energies, embed, embed_with, ir_peak_band, spectral_entropy, EmbeddingConfig};
pub use wav::{load_wav, write_wav, WavEncoding};

use std::collections::HashMap;
use std::sync::Arc;

use realfft::num_complex::Complex;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::estimate_gaussian;
use crate::metrics::{trace_row_from_summaries, DriftReferences, MetricConfig};
use crate::types::{FeatureBatch, GaussianSummary, MetricTrace};

/// Mono audio with amplitudes nominally in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioSignal {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioSignal {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidParameter("sample rate must be positive".into()));
        }
        if samples.is_empty() {
            return Err(Error::InvalidParameter("signal is empty".into()));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: i, col: 0 });
        }
        Ok(Self { samples, sample_rate })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }

    pub fn rms(&self) -> f64 {
        rms(&self.samples)
    }

    /// Rescaled copy with RMS 1.
    pub fn normalized(&self) -> Result<Self> {
        let level = self.rms();
        if level == 0.0 {
            return Err(Error::ZeroSignal);
        }
        Ok(Self {
            samples: self.samples.iter().map(|v| v / level).collect(),
            sample_rate: self.sample_rate,
        })
    }
}

pub(crate) fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len().max(1) as f64).sqrt()
}

/// FFT linear convolution with a fixed impulse response, truncated to the
/// signal length it was planned for.
pub struct Convolver {
    signal_len: usize,
    fft_len: usize,
    ir_spectrum: Vec<Complex<f64>>,
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
}

impl Convolver {
    pub fn new(h: &[f64], signal_len: usize) -> Result<Self> {
        if h.is_empty() || h.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidParameter("impulse response is all zero".into()));
        }
        let fft_len = (signal_len + h.len() - 1).next_power_of_two();
        let mut planner = RealFftPlanner::<f64>::new();
        let forward = planner.plan_fft_forward(fft_len);
        let inverse = planner.plan_fft_inverse(fft_len);
        let mut padded = forward.make_input_vec();
        padded[..h.len()].copy_from_slice(h);
        let mut ir_spectrum = forward.make_output_vec();
        forward
            .process(&mut padded, &mut ir_spectrum)
            .map_err(|e| Error::DecompositionFailure(e.to_string()))?;
        Ok(Self {
            signal_len,
            fft_len,
            ir_spectrum,
            forward,
            inverse,
        })
    }

    /// First `signal_len` samples of `x * h`.
    pub fn convolve(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.signal_len {
            return Err(Error::DimensionMismatch {
                expected: self.signal_len,
                found: x.len(),
            });
        }
        let mut padded = self.forward.make_input_vec();
        padded[..x.len()].copy_from_slice(x);
        let mut spectrum = self.forward.make_output_vec();
        self.forward
            .process(&mut padded, &mut spectrum)
            .map_err(|e| Error::DecompositionFailure(e.to_string()))?;
        for (s, h) in spectrum.iter_mut().zip(&self.ir_spectrum) {
            *s *= h;
        }
        let last = spectrum.len() - 1;
        spectrum[0].im = 0.0;
        spectrum[last].im = 0.0;
        let mut out = self.inverse.make_output_vec();
        self.inverse
            .process(&mut spectrum, &mut out)
            .map_err(|e| Error::DecompositionFailure(e.to_string()))?;
        let scale = 1.0 / self.fft_len as f64;
        out.truncate(self.signal_len);
        out.iter_mut().for_each(|v| *v *= scale);
        Ok(out)
    }

    /// One feedback generation: convolve then rescale to unit RMS.
    pub fn generation(&self, x: &[f64]) -> Result<Vec<f64>> {
        if rms(x) == 0.0 {
            return Err(Error::ZeroSignal);
        }
        let mut y = self.convolve(x)?;
        let level = rms(&y);
        if level == 0.0 {
            return Err(Error::ZeroSignal);
        }
        y.iter_mut().for_each(|v| *v /= level);
        Ok(y)
    }
}

/// `norm(x * h)`: FFT linear convolution truncated to `len(x)`, rescaled to RMS 1.
pub fn lucier_generation(x: &AudioSignal, h: &AudioSignal) -> Result<AudioSignal> {
    if x.sample_rate != h.sample_rate {
        return Err(Error::SampleRateMismatch {
            expected: x.sample_rate,
            found: h.sample_rate,
        });
    }
    if x.rms() == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let samples = Convolver::new(&h.samples, x.len())?.generation(&x.samples)?;
    AudioSignal::new(samples, x.sample_rate)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct LucierConfig {
    pub embedding: EmbeddingConfig,
    pub metrics: MetricConfig,
}

#[derive(Debug, Clone)]
pub struct LucierRun {
    /// One trace per impulse response; σ_intra classes are the input class ids.
    pub per_ir: Vec<MetricTrace>,
    /// All impulse responses pooled, σ_intra classes are impulse responses.
    /// Generation 0 holds each input window once, in a single class.
    pub pooled: MetricTrace,
    /// `[ir][generation]` entropy of the band-energy distribution.
    pub spectral_entropy: Vec<Vec<f64>>,
    /// `[ir][generation]` band with the most energy.
    pub dominant_band: Vec<Vec<usize>>,
    /// Band containing the peak of `|H(f)|` for each impulse response.
    pub ir_peak_band: Vec<usize>,
}

struct Tracker {
    trace: MetricTrace,
    first: Option<GaussianSummary>,
    previous: Option<GaussianSummary>,
}

impl Tracker {
    fn new() -> Self {
        Self {
            trace: MetricTrace::new(),
            first: None,
            previous: None,
        }
    }

    fn record(&mut self, n: usize, batch: &FeatureBatch, metrics: &MetricConfig) -> Result<()> {
        let summary = estimate_gaussian(batch)?;
        let first = self.first.get_or_insert_with(|| summary.clone()).clone();
        let row = trace_row_from_summaries(
            n,
            batch,
            &summary,
            DriftReferences {
                previous: self.previous.as_ref(),
                first: &first,
            },
            metrics,
        )?;
        self.trace.push(row)?;
        self.previous = Some(summary);
        Ok(())
    }
}

fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold(
            (0, f64::NEG_INFINITY),
            |best, (i, &v)| if v > best.1 { (i, v) } else { best },
        )
        .0
}

/// Runs every input through every impulse response for `n_generations`
/// feedback steps and measures each generation.
pub fn run_lucier(
    inputs: &[(AudioSignal, u32)],
    irs: &[AudioSignal],
    n_generations: usize,
    config: &LucierConfig,
) -> Result<LucierRun> {
    let (first, _) = inputs.first().ok_or(Error::EmptyBatch)?;
    if irs.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one impulse response is required".into(),
        ));
    }
    let rate = first.sample_rate;
    for s in inputs.iter().map(|(s, _)| s).chain(irs) {
        if s.sample_rate != rate {
            return Err(Error::SampleRateMismatch {
                expected: rate,
                found: s.sample_rate,
            });
        }
    }
    config.metrics.validate()?;
    let emb = &config.embedding;

    let mut convolvers: Vec<HashMap<usize, Convolver>> = Vec::with_capacity(irs.len());
    for ir in irs {
        let mut by_len = HashMap::new();
        for (x, _) in inputs {
            if let std::collections::hash_map::Entry::Vacant(slot) = by_len.entry(x.len()) {
                slot.insert(Convolver::new(ir.samples(), x.len())?);
            }
        }
        convolvers.push(by_len);
    }
    let ir_peak_band = irs.iter().map(|ir| ir_peak_band(ir, emb)).collect::<Result<Vec<_>>>()?;

    let start: Vec<Vec<f64>> = inputs
        .iter()
        .map(|(x, _)| x.normalized().map(|s| s.samples))
        .collect::<Result<_>>()?;
    let classes: Vec<u32> = inputs.iter().map(|(_, c)| *c).collect();

    let mut per_ir: Vec<Tracker> = (0..irs.len()).map(|_| Tracker::new()).collect();
    let mut pooled = Tracker::new();
    let mut entropy = vec![Vec::with_capacity(n_generations + 1); irs.len()];
    let mut dominant = vec![Vec::with_capacity(n_generations + 1); irs.len()];

    // every IR sees the same normalized inputs at generation 0
    let (batch0, total0) = measure(&start, &classes, rate, emb).map_err(Error::at_generation(0))?;
    for i in 0..irs.len() {
        entropy[i].push(spectral_entropy(&total0));
        dominant[i].push(argmax(&total0));
        per_ir[i]
            .record(0, &batch0, &config.metrics)
            .map_err(Error::at_generation(0))?;
    }
    let count = batch0.n_samples();
    let pooled0 = batch0.with_labels(Some(vec![0; count]))?;
    pooled
        .record(0, &pooled0, &config.metrics)
        .map_err(Error::at_generation(0))?;

    // state[ir][input]
    let mut state: Vec<Vec<Vec<f64>>> = vec![start; irs.len()];
    for n in 1..=n_generations {
        let mut parts = Vec::with_capacity(irs.len());
        for (i, signals) in state.iter_mut().enumerate() {
            for (s, (x, _)) in signals.iter_mut().zip(inputs) {
                *s = convolvers[i][&x.len()].generation(s).map_err(Error::at_generation(n))?;
            }
            let (batch, total) = measure(signals, &classes, rate, emb).map_err(Error::at_generation(n))?;
            entropy[i].push(spectral_entropy(&total));
            dominant[i].push(argmax(&total));
            per_ir[i]
                .record(n, &batch, &config.metrics)
                .map_err(Error::at_generation(n))?;
            let count = batch.n_samples();
            parts.push(batch.with_labels(Some(vec![i as u32; count]))?);
        }
        let batch = FeatureBatch::concat(&parts).map_err(Error::at_generation(n))?;
        pooled
            .record(n, &batch, &config.metrics)
            .map_err(Error::at_generation(n))?;
    }

    Ok(LucierRun {
        per_ir: per_ir.into_iter().map(|t| t.trace).collect(),
        pooled: pooled.trace,
        spectral_entropy: entropy,
        dominant_band: dominant,
        ir_peak_band,
    })
}

/// Embeds every signal window, labelled by its input class, and sums band
/// energies over all of them.
fn measure(
    signals: &[Vec<f64>],
    classes: &[u32],
    rate: u32,
    emb: &EmbeddingConfig,
) -> Result<(FeatureBatch, Vec<f64>)> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut total = vec![0.0; emb.bands];
    for (s, class) in signals.iter().zip(classes) {
        for window in band_energies(s, rate, emb)? {
            for (t, e) in total.iter_mut().zip(&window) {
                *t += e;
            }
            rows.push(embed::log_energies(&window));
            labels.push(*class);
        }
    }
    Ok((FeatureBatch::from_rows(&rows, Some(labels))?, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(len: usize, seed: u64, rate: u32) -> AudioSignal {
        let mut rng = stream(seed, "noise");
        AudioSignal::new((0..len).map(|_| StandardNormal.sample(&mut rng)).collect(), rate).unwrap()
    }

    fn corr(a: &[f64], b: &[f64]) -> f64 {
        let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
        dot(a, b) / (dot(a, a) * dot(b, b)).sqrt()
    }

    #[test]
    fn unit_impulse_normalizes() {
        let x = noise(1000, 1, 8000);
        let h = AudioSignal::new(vec![1.0], 8000).unwrap();
        let y = lucier_generation(&x, &h).unwrap();
        let expected = x.normalized().unwrap();
        for (a, b) in y.samples().iter().zip(expected.samples()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((y.rms() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn matches_direct_convolution() {
        let x = noise(300, 2, 8000);
        let h = noise(17, 3, 8000);
        let y = Convolver::new(h.samples(), 300).unwrap().convolve(x.samples()).unwrap();
        for (n, got) in y.iter().enumerate() {
            let direct: f64 = (0..=n.min(16)).map(|k| h.samples()[k] * x.samples()[n - k]).sum();
            assert!((got - direct).abs() < 1e-9);
        }
    }

    #[test]
    fn sinusoid_is_eigenfunction() {
        let rate = 8000;
        let f0 = 440.0;
        let s: Vec<f64> = (0..8000)
            .map(|i| (2.0 * std::f64::consts::PI * f0 * i as f64 / rate as f64).sin())
            .collect();
        let x = AudioSignal::new(s, rate).unwrap();
        let h = AudioSignal::new(vec![0.5, 0.3, 0.2], rate).unwrap();
        let y = lucier_generation(&x, &h).unwrap();
        // compare against the best-fit phase-shifted sinusoid, skipping the onset
        let w = 2.0 * std::f64::consts::PI * f0 / rate as f64;
        let (c, sn): (Vec<f64>, Vec<f64>) = (10..8000).map(|i| ((w * i as f64).cos(), (w * i as f64).sin())).unzip();
        let tail = &y.samples()[10..];
        let a = corr(tail, &c) * tail.iter().map(|v| v * v).sum::<f64>().sqrt()
            / c.iter().map(|v| v * v).sum::<f64>().sqrt();
        let b = corr(tail, &sn) * tail.iter().map(|v| v * v).sum::<f64>().sqrt()
            / sn.iter().map(|v| v * v).sum::<f64>().sqrt();
        let fit: Vec<f64> = c.iter().zip(&sn).map(|(p, q)| a * p + b * q).collect();
        assert!(corr(tail, &fit) >= 0.999);
    }

    #[test]
    fn rejects_bad_inputs() {
        let x = noise(100, 1, 8000);
        let h = AudioSignal::new(vec![1.0], 16000).unwrap();
        assert!(matches!(
            lucier_generation(&x, &h),
            Err(Error::SampleRateMismatch { .. })
        ));
        let z = AudioSignal::new(vec![0.0; 100], 8000).unwrap();
        let h = AudioSignal::new(vec![1.0], 8000).unwrap();
        assert!(matches!(lucier_generation(&z, &h), Err(Error::ZeroSignal)));
    }

    #[test]
    fn averaging_filter_drives_energy_to_lowest_band() {
        let rate = 1000;
        let cfg = EmbeddingConfig {
            window_seconds: 2.0,
            bands: 16,
        };
        let h = AudioSignal::new(vec![0.5, 0.5], rate).unwrap();
        let mut x = noise(4000, 5, rate);
        for _ in 0..50 {
            x = lucier_generation(&x, &h).unwrap();
        }
        let total: Vec<f64> = band_energies(x.samples(), rate, &cfg)
            .unwrap()
            .iter()
            .fold(vec![0.0; 16], |acc, w| acc.iter().zip(w).map(|(a, b)| a + b).collect());
        assert_eq!(argmax(&total), 0);
    }

    fn small_config() -> LucierConfig {
        LucierConfig {
            embedding: EmbeddingConfig {
                window_seconds: 1.0,
                bands: 8,
            },
            metrics: MetricConfig {
                k_neighbors: 3,
                ..MetricConfig::default()
            },
        }
    }

    #[test]
    fn zero_generations_only_measures_start() {
        let rate = 400;
        let inputs = vec![(noise(8 * 400, 1, rate), 0), (noise(8 * 400, 2, rate), 1)];
        let irs = vec![AudioSignal::new(vec![0.5, 0.5], rate).unwrap()];
        let run = run_lucier(&inputs, &irs, 0, &small_config()).unwrap();
        assert_eq!(run.pooled.len(), 1);
        assert_eq!(run.per_ir[0].len(), 1);
        assert_eq!(run.spectral_entropy[0].len(), 1);
    }

    #[test]
    fn identity_ir_is_a_fixed_point() {
        let rate = 400;
        let inputs = vec![(noise(8 * 400, 1, rate), 0), (noise(8 * 400, 2, rate), 1)];
        let irs = vec![AudioSignal::new(vec![1.0], rate).unwrap()];
        let run = run_lucier(&inputs, &irs, 4, &small_config()).unwrap();
        let rows = run.per_ir[0].rows();
        for r in &rows[1..] {
            assert!((r.pr_g - rows[0].pr_g).abs() < 1e-9 * rows[0].pr_g);
            assert!((r.m_lb - rows[0].m_lb).abs() < 1e-9);
            assert!((r.sigma_intra.unwrap() - rows[0].sigma_intra.unwrap()).abs() < 1e-9);
            assert!(r.fid_cumulative < 1e-9);
        }
    }
}
