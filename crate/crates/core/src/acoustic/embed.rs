use realfft::RealFftPlanner;
use serde::{Deserialize, Serialize};

use super::AudioSignal;
use crate::error::{Error, Result};
use crate::types::FeatureBatch;

pub(crate) const ENERGY_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbeddingConfig {
    pub window_seconds: f64,
    pub bands: usize,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self {
            window_seconds: 20.0,
            bands: 64,
        }
    }
}

impl EmbeddingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.window_seconds.is_finite() && self.window_seconds > 0.0) {
            return Err(Error::InvalidParameter("window_seconds must be positive".into()));
        }
        if self.bands == 0 {
            return Err(Error::InvalidParameter("bands must be at least 1".into()));
        }
        Ok(())
    }

    /// Window length in samples at `sample_rate`.
    pub fn window_len(&self, sample_rate: u32) -> usize {
        (self.window_seconds * f64::from(sample_rate)).round() as usize
    }
}

/// Band of FFT bin `k` for a real FFT of length `window`.
fn band_of(k: usize, window: usize, bands: usize) -> usize {
    (2 * k * bands / window).min(bands - 1)
}

/// Per-window band energies `Σ|X_k|²/W`. Trailing partial windows are dropped.
pub fn band_energies(samples: &[f64], sample_rate: u32, config: &EmbeddingConfig) -> Result<Vec<Vec<f64>>> {
    config.validate()?;
    let window = config.window_len(sample_rate);
    if window < 2 || samples.len() < window {
        return Err(Error::SignalTooShort {
            len: samples.len(),
            window,
        });
    }
    let fft = RealFftPlanner::<f64>::new().plan_fft_forward(window);
    let mut input = fft.make_input_vec();
    let mut spectrum = fft.make_output_vec();
    let norm = 1.0 / window as f64;
    samples
        .chunks_exact(window)
        .map(|chunk| {
            input.copy_from_slice(chunk);
            fft.process(&mut input, &mut spectrum)
                .map_err(|e| Error::DecompositionFailure(e.to_string()))?;
            let mut energies = vec![0.0; config.bands];
            for (k, c) in spectrum.iter().enumerate() {
                energies[band_of(k, window, config.bands)] += c.norm_sqr() * norm;
            }
            Ok(energies)
        })
        .collect()
}

pub(crate) fn log_energies(energies: &[f64]) -> Vec<f64> {
    energies.iter().map(|e| (e + ENERGY_FLOOR).log10()).collect()
}

/// One row of log₁₀ band energies per 20 s window, 64 bands.
pub fn embed(x: &AudioSignal) -> Result<FeatureBatch> {
    embed_with(x, &EmbeddingConfig::default())
}

pub fn embed_with(x: &AudioSignal, config: &EmbeddingConfig) -> Result<FeatureBatch> {
    let rows: Vec<Vec<f64>> = band_energies(x.samples(), x.sample_rate(), config)?
        .iter()
        .map(|e| log_energies(e))
        .collect();
    FeatureBatch::from_rows(&rows, None)
}

/// Shannon entropy (nats) of the energy distribution across bands.
pub fn spectral_entropy(energies: &[f64]) -> f64 {
    let total: f64 = energies.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    energies
        .iter()
        .map(|e| e / total)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum()
}

/// Band holding the largest `|H(f)|` of an impulse response, on the same band
/// grid the embedding uses.
pub fn ir_peak_band(ir: &AudioSignal, config: &EmbeddingConfig) -> Result<usize> {
    config.validate()?;
    let window = config.window_len(ir.sample_rate()).max(ir.len()).max(2);
    let fft = RealFftPlanner::<f64>::new().plan_fft_forward(window);
    let mut input = fft.make_input_vec();
    input[..ir.len()].copy_from_slice(ir.samples());
    let mut spectrum = fft.make_output_vec();
    fft.process(&mut input, &mut spectrum)
        .map_err(|e| Error::DecompositionFailure(e.to_string()))?;
    let peak = spectrum
        .iter()
        .map(|c| c.norm_sqr())
        .enumerate()
        .fold(
            (0, f64::NEG_INFINITY),
            |best, (k, v)| if v > best.1 { (k, v) } else { best },
        )
        .0;
    Ok(band_of(peak, window, config.bands))
}
