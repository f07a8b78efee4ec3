//! A stable linear-Gaussian chain settles on the law fixed by the discrete
//! Lyapunov equation, whatever its start.
//!
//! Run with `cargo run --release --example linear_gaussian_stationarity`.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, Normal};
use resonance::chains::{
    ergodicity_probe, run_chain, ChainOperator, LinearGaussianParams, OperatorKind, ProbeConfig, Retention, RunOptions,
};
use resonance::drift::{classify_phases, drift_curves, stationarity_onset, PhaseConfig};
use resonance::linalg::{sample_covariance, solve_lyapunov, spectral_radius};
use resonance::rng::stream;
use resonance::FeatureBatch;

fn gaussian_batch(n: usize, dim: usize, mean: f64, seed: u64, name: &str) -> FeatureBatch {
    let mut rng = stream(seed, name);
    let normal = Normal::new(mean, 1.0).unwrap();
    FeatureBatch::new(DMatrix::from_fn(n, dim, |_, _| normal.sample(&mut rng)), None).unwrap()
}

fn main() -> resonance::Result<()> {
    let dim = 8;
    let sigma = 0.5;
    let a = DMatrix::from_fn(dim, dim, |i, j| match j as i64 - i as i64 {
        0 => 0.9 - 0.1 * i as f64,
        1 => 0.1,
        _ => 0.0,
    });
    println!("spectral radius of A: {:.3}", spectral_radius(&a)?);
    let op = ChainOperator::new(
        OperatorKind::LinearGaussian(LinearGaussianParams::new(a.clone(), DVector::zeros(dim), sigma)?),
        42,
    );

    let start = gaussian_batch(4000, dim, 6.0, 42, "start");
    let options = RunOptions {
        retention: Retention::SummariesOnly,
        ..RunOptions::default()
    };
    let run = run_chain(&op, &start, 120, &options)?;

    let phases = classify_phases(&drift_curves(&run.summaries)?, &PhaseConfig::default())?;
    println!("stationary from generation {:?}", stationarity_onset(&phases));

    let expected = solve_lyapunov(&a, &(DMatrix::identity(dim, dim) * sigma * sigma))?;
    let (_, empirical) = sample_covariance(&run.final_batch)?;
    let rel = (&empirical - &expected).norm() / expected.norm();
    println!(
        "terminal covariance vs Lyapunov solution: {:.2}% Frobenius",
        100.0 * rel
    );

    let other = gaussian_batch(4000, dim, -6.0, 42, "other");
    let report = ergodicity_probe(&op, &start, &other, 120, &ProbeConfig::default())?;
    println!(
        "two starts: FID {:.1} -> {:.4}, forgets initial condition: {}",
        report.initial_fid_ab, report.final_fid_ab, report.forgets_init
    );
    Ok(())
}
