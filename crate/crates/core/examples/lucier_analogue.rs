//! Repeated filtering of noise through two low-pass rooms. Energy piles into
//! each room's strongest band, spectral entropy falls and the pooled
//! embeddings lose dimensions.
//!
//! Run with `cargo run --release --example lucier_analogue`.

use rand_distr::{Distribution, StandardNormal};
use resonance::acoustic::{load_wav, run_lucier, write_wav, AudioSignal, EmbeddingConfig, LucierConfig, WavEncoding};
use resonance::metrics::MetricConfig;
use resonance::rng::stream;

fn noise(seconds: usize, rate: u32, seed: u64) -> AudioSignal {
    let mut rng = stream(seed, "input");
    let samples = (0..seconds * rate as usize)
        .map(|_| 0.1 * Distribution::<f64>::sample(&StandardNormal, &mut rng))
        .collect();
    AudioSignal::new(samples, rate).unwrap()
}

/// Decaying one-pole response with a little ringing at `ring` cycles per sample.
fn room(len: usize, decay: f64, ring: f64, rate: u32) -> AudioSignal {
    let h = (0..len)
        .map(|t| decay.powi(t as i32) * (1.0 + 0.5 * (std::f64::consts::TAU * ring * t as f64).cos()))
        .collect();
    AudioSignal::new(h, rate).unwrap()
}

fn main() -> resonance::Result<()> {
    let rate = 16_000;
    let dir = std::env::temp_dir().join("resonance-lucier-example");
    std::fs::create_dir_all(&dir).map_err(|e| resonance::Error::Io {
        path: dir.clone(),
        source: e,
    })?;

    // Round-trip the inputs through WAV files like real recordings would.
    let mut inputs = Vec::new();
    for class in 0..3 {
        let path = dir.join(format!("reading{class}.wav"));
        write_wav(&path, &noise(30, rate, class as u64), WavEncoding::Float32)?;
        inputs.push((load_wav(&path)?, class));
    }
    let irs = vec![room(64, 0.9, 0.01, rate), room(64, 0.8, 0.03, rate)];

    let config = LucierConfig {
        embedding: EmbeddingConfig {
            window_seconds: 5.0,
            bands: 32,
        },
        metrics: MetricConfig {
            k_neighbors: 4,
            ..MetricConfig::default()
        },
    };
    let run = run_lucier(&inputs, &irs, 30, &config)?;

    for (i, entropy) in run.spectral_entropy.iter().enumerate() {
        println!(
            "IR {i}: |H| peaks in band {}; dominant band after 30 generations {}; entropy {:.3} -> {:.3}",
            run.ir_peak_band[i],
            run.dominant_band[i].last().unwrap(),
            entropy[0],
            entropy.last().unwrap()
        );
    }
    let rows = run.pooled.rows();
    println!("pooled PR_G {:.3} -> {:.3}", rows[0].pr_g, rows.last().unwrap().pr_g);
    println!(
        "pooled σ_intra (classes = rooms) at the end: {:.3}",
        rows.last().unwrap().sigma_intra.unwrap()
    );
    Ok(())
}
