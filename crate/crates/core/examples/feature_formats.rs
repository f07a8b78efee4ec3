//! Feature batches on disk (CSV and GMCF binary) and the trace files the CLI
//! writes.
//!
//! Run with `cargo run --example feature_formats`.

use resonance::drift::PhaseConfig;
use resonance::io::{read_feature_batch, read_trace, trace_phases, write_csv, write_gmcf, write_trace};
use resonance::metrics::{compute_trace_row, MetricConfig};
use resonance::{FeatureBatch, MetricTrace};

fn main() -> resonance::Result<()> {
    let dir = std::env::temp_dir().join("resonance-formats-example");
    std::fs::create_dir_all(&dir).map_err(|e| resonance::Error::Io {
        path: dir.clone(),
        source: e,
    })?;

    let rows: Vec<Vec<f64>> = (0..60)
        .map(|i| vec![(i as f64 * 0.1).sin(), (i as f64 * 0.7).cos(), i as f64 / 60.0])
        .collect();
    let labels: Vec<u32> = (0..60).map(|i| i % 3).collect();
    let batch = FeatureBatch::from_rows(&rows, Some(labels))?;

    let bin = dir.join("gen0.gmcf");
    let csv = dir.join("gen0.csv");
    write_gmcf(&bin, &batch)?;
    write_csv(&csv, &batch)?;
    println!("GMCF round trip exact: {}", read_feature_batch(&bin)? == batch);
    println!("CSV round trip exact:  {}", read_feature_batch(&csv)? == batch);
    println!(
        "GMCF size: {} bytes",
        std::fs::metadata(&bin).map(|m| m.len()).unwrap_or(0)
    );

    // A short trace: the same batch, slowly stretched along one axis.
    let config = MetricConfig {
        k_neighbors: 5,
        ..MetricConfig::default()
    };
    let mut trace = MetricTrace::new();
    let mut previous: Option<FeatureBatch> = None;
    for n in 0..12 {
        let scale = 1.0 + 0.05 * n as f64;
        let stretched: Vec<Vec<f64>> = rows.iter().map(|r| vec![r[0] * scale, r[1], r[2]]).collect();
        let b = FeatureBatch::from_rows(&stretched, batch.labels().map(<[u32]>::to_vec))?;
        trace.push(compute_trace_row(n, &b, previous.as_ref(), &batch, &config)?)?;
        previous = Some(b);
    }
    let phases = trace_phases(&trace, &PhaseConfig::default())?;
    let path = dir.join("trace.jsonl");
    write_trace(&trace, &phases, &[], &path)?;
    let (back, _) = read_trace(&path)?;
    println!("trace round trip exact: {}", back == trace);
    println!(
        "first line: {}",
        std::fs::read_to_string(&path)
            .unwrap_or_default()
            .lines()
            .next()
            .unwrap_or("")
    );
    Ok(())
}
