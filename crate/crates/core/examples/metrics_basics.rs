//! The four per-generation metrics on batches small enough to check by hand.
//!
//! Run with `cargo run --example metrics_basics`.

use nalgebra::{DMatrix, DVector};
use resonance::linalg::estimate_gaussian;
use resonance::metrics::{
    frechet_distance, levina_bickel, participation_ratio, participation_ratio_of_spectrum, sigma_intra, MetricConfig,
};
use resonance::{FeatureBatch, GaussianSummary};

fn gaussian_1d(mean: f64, var: f64) -> GaussianSummary {
    GaussianSummary::new(DVector::from_element(1, mean), DMatrix::from_element(1, 1, var)).unwrap()
}

fn main() -> resonance::Result<()> {
    // Fréchet distance between 1-D Gaussians: (μa - μb)² + (σa - σb)².
    let shift = frechet_distance(&gaussian_1d(0.0, 1.0), &gaussian_1d(1.0, 1.0))?;
    let widen = frechet_distance(&gaussian_1d(0.0, 1.0), &gaussian_1d(0.0, 4.0))?;
    println!("FID  N(0,1) vs N(1,1) = {shift:.6}");
    println!("FID  N(0,1) vs N(0,4) = {widen:.6}");

    // PR of the spectrum {2, 1, 1} is 16 / 6.
    println!(
        "PR   spectrum {{2,1,1}} = {:.6}",
        participation_ratio_of_spectrum(&[2.0, 1.0, 1.0])?
    );

    // Two classes, each a symmetric pair at distance 1 from its centroid.
    let pairs = FeatureBatch::from_rows(&[vec![-1.0], vec![1.0], vec![9.0], vec![11.0]], Some(vec![0, 0, 1, 1]))?;
    println!("σ_intra two ±1 pairs = {:.6}", sigma_intra(&pairs)?);

    // Levina–Bickel with k = 2 on {0, 1, 3}.
    let line = FeatureBatch::from_rows(&[vec![0.0], vec![1.0], vec![3.0]], None)?;
    let config = MetricConfig {
        k_neighbors: 2,
        ..MetricConfig::default()
    };
    println!("m_LB {{0,1,3}}, k=2     = {:.4}", levina_bickel(&line, &config)?);

    // A flat cloud: 3 of 6 axes carry variance.
    let rows: Vec<Vec<f64>> = (0..400)
        .map(|i| {
            let t = i as f64 * 0.37;
            vec![t.sin() * 3.0, t.cos() * 2.0, (1.7 * t).sin(), 0.0, 0.0, 0.0]
        })
        .collect();
    let flat = FeatureBatch::from_rows(&rows, None)?;
    let summary = estimate_gaussian(&flat)?;
    println!(
        "flat cloud: PR_G = {:.3}, m_LB = {:.3}, trace Σ = {:.3}",
        participation_ratio(&flat)?,
        levina_bickel(&flat, &MetricConfig::default())?,
        summary.covariance.trace()
    );
    Ok(())
}
