//! Rank-3 feedback in 16 dimensions: the chain forgets where it started while
//! PR_G contracts onto the latent subspace. Both together give a resonant
//! verdict.
//!
//! Run with `cargo run --release --example latent_feedback_resonance`.

use nalgebra::DMatrix;
use rand_distr::{Distribution, Normal};
use resonance::chains::{
    contraction_probe, ergodicity_probe, resonance_verdict, run_chain, ChainOperator, LatentFeedbackParams,
    OperatorKind, ProbeConfig, Retention, RunOptions,
};
use resonance::linalg::{solve_lyapunov, symmetric_eigenvalues};
use resonance::metrics::participation_ratio_of_spectrum;
use resonance::rng::stream;
use resonance::taxonomy::TrendConfig;
use resonance::FeatureBatch;

fn start(mean: f64, sigma: f64, seed: u64, name: &str) -> FeatureBatch {
    let mut rng = stream(seed, name);
    let normal = Normal::new(mean, sigma).unwrap();
    FeatureBatch::new(DMatrix::from_fn(2000, 16, |_, _| normal.sample(&mut rng)), None).unwrap()
}

fn main() -> resonance::Result<()> {
    let sigma = 0.3;
    let params = LatentFeedbackParams::orthogonal(16, &[0.95, 0.93, 0.9], sigma, 7)?;
    let stationary = solve_lyapunov(&params.transition(), &(DMatrix::identity(16, 16) * sigma * sigma))?;
    let predicted = participation_ratio_of_spectrum(symmetric_eigenvalues(&stationary)?.as_slice())?;
    let op = ChainOperator::new(OperatorKind::LatentFeedback(params), 7);

    let a = start(1.0, sigma, 7, "a");
    let b = start(-1.0, sigma, 7, "b");
    let generations = 40;

    let options = RunOptions {
        retention: Retention::SummariesOnly,
        ..RunOptions::default()
    };
    let run = run_chain(&op, &a, generations, &options)?;
    for row in run.trace.rows().iter().step_by(5) {
        println!("n={:>2}  PR_G={:>6.3}  m_LB={:>6.3}", row.n, row.pr_g, row.m_lb);
    }

    let contraction = contraction_probe(&run.trace, &TrendConfig::default())?;
    let ergodicity = ergodicity_probe(&op, &a, &b, generations, &ProbeConfig::default())?;
    println!(
        "PR floor {:.3} vs stationary-law PR {:.3}; first half {:?}, second half {:?}",
        contraction.pr_floor, predicted, contraction.first_half.direction, contraction.second_half.direction
    );
    println!("forgets initial condition: {}", ergodicity.forgets_init);
    println!("verdict: {:?}", resonance_verdict(&ergodicity, &contraction));
    Ok(())
}
