//! Reverse diffusion with the exact score of a Gaussian target, followed by a
//! few rounds of self-consuming retraining.
//!
//! Run with `cargo run --release --example ddpm_sampler`.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use resonance::chains::{run_chain, ChainOperator, DdpmParams, OperatorKind, Retention, RunOptions};
use resonance::linalg::sample_covariance;
use resonance::rng::stream;
use resonance::{FeatureBatch, GaussianSummary};

fn main() -> resonance::Result<()> {
    let target = GaussianSummary::new(
        DVector::zeros(2),
        DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.25])),
    )?;
    let params = DdpmParams::linear(1000, target)?;
    println!("ᾱ_T = {:.3e}", params.alpha_bars()[999]);
    let op = ChainOperator::new(OperatorKind::DdpmAnalytic(params.clone()), 3);

    let mut rng = stream(3, "x_T");
    let noise = FeatureBatch::new(
        DMatrix::from_fn(10_000, 2, |_, _| StandardNormal.sample(&mut rng)),
        None,
    )?;
    let samples = op.step_generation(&noise, 0, 1)?;
    let (mean, cov) = sample_covariance(&samples)?;
    println!("sample mean     [{:+.4}, {:+.4}]", mean[0], mean[1]);
    println!(
        "sample variance [{:.4}, {:.4}]  (target 1, 0.25)",
        cov[(0, 0)],
        cov[(1, 1)]
    );

    // The same x_T with two different noise streams lands in two places.
    let x_t = [0.3, -0.7];
    let a = params.reverse(&x_t, &DVector::zeros(2), &mut stream(1, "a"));
    let b = params.reverse(&x_t, &DVector::zeros(2), &mut stream(1, "b"));
    println!("same x_T, two noise streams: {a:.3?} vs {b:.3?}");

    // Generations that re-estimate only the mean drift like a random walk.
    let op = ChainOperator::new(OperatorKind::DdpmAnalytic(params.with_mean_feedback(true)), 3);
    let small = noise.select_rows(&(0..1000).collect::<Vec<_>>());
    let options = RunOptions {
        retention: Retention::SummariesOnly,
        ..RunOptions::default()
    };
    let run = run_chain(&op, &small, 5, &options)?;
    for row in run.trace.rows() {
        println!(
            "n={}  FID to start {:.4}  PR_G {:.3}",
            row.n, row.fid_cumulative, row.pr_g
        );
    }
    Ok(())
}
