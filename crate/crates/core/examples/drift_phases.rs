//! Phase labels for three drift-curve archetypes: steep decay, mixed, and
//! flat. Rescaling a curve leaves every label unchanged.
//!
//! Run with `cargo run --example drift_phases`.

use resonance::drift::{classify_phases, stationarity_onset, DriftCurves, PhaseConfig};

fn curves(local: impl Fn(f64) -> f64, cumulative: impl Fn(f64) -> f64, len: usize) -> DriftCurves {
    DriftCurves {
        local: (1..len).map(|n| (n, local(n as f64))).collect(),
        cumulative: (0..len).map(|n| (n, cumulative(n as f64))).collect(),
    }
}

fn main() -> resonance::Result<()> {
    let config = PhaseConfig::default();
    let archetypes = [
        ("steep/steep", curves(|n| 10.0 - 0.9 * n, |n| 1.0 * n, 11)),
        ("mixed      ", curves(|n| 10.0 - 0.9 * n, |n| 100.0 + 0.2 * n, 11)),
        ("flat/flat  ", curves(|n| 5.0 + 0.01 * n, |n| 40.0 + 0.001 * n, 11)),
    ];
    for (name, c) in &archetypes {
        let labels = classify_phases(c, &config)?;
        let scaled = DriftCurves {
            local: c.local.iter().map(|&(n, v)| (n, 10.0 * v)).collect(),
            cumulative: c.cumulative.iter().map(|&(n, v)| (n, 10.0 * v)).collect(),
        };
        let same = classify_phases(&scaled, &config)? == labels;
        let shown: Vec<String> = labels.iter().map(|(n, l)| format!("{n}:{l}")).collect();
        println!("{name} {}  (10x rescale identical: {same})", shown.join(" "));
    }

    // Exponential approach to a plateau: active, then slow, then stationary.
    let plateau = curves(|n| 8.0 * (-0.35 * n).exp(), |n| 20.0 * (1.0 - (-0.35 * n).exp()), 40);
    let labels = classify_phases(&plateau, &config)?;
    println!("plateau onset: generation {:?}", stationarity_onset(&labels));
    Ok(())
}
