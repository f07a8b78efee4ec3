//! Deterministic chains that never forget their start: a feedback filter that
//! preserves each input's frequency and a cyclic pair of bistable maps whose
//! limit depends on the basin.
//!
//! Run with `cargo run --release --example non_ergodic_comparators`.

use nalgebra::DMatrix;
use rand::Rng;
use resonance::chains::{
    ergodicity_probe, ChainOperator, ConvolutionParams, CycleMapParams, Domain, OperatorKind, ProbeConfig,
};
use resonance::rng::stream;
use resonance::FeatureBatch;

fn sinusoids(freq: f64, n: usize, len: usize, seed: u64, name: &str) -> FeatureBatch {
    let mut rng = stream(seed, name);
    let data = DMatrix::from_fn(n, len, |_, _| 0.0);
    let mut data = data;
    for i in 0..n {
        let phase = rng.random::<f64>() * std::f64::consts::TAU;
        for t in 0..len {
            data[(i, t)] = (std::f64::consts::TAU * freq * t as f64 + phase).sin() + 0.05 * (rng.random::<f64>() - 0.5);
        }
    }
    FeatureBatch::new(data, None).unwrap()
}

fn main() -> resonance::Result<()> {
    let conv = ChainOperator::new(
        OperatorKind::Convolution(ConvolutionParams::new(vec![1.0, 0.3], 64)?),
        1,
    );
    let low = sinusoids(0.03, 300, 64, 1, "low");
    let high = sinusoids(0.22, 300, 64, 1, "high");
    let r = ergodicity_probe(&conv, &low, &high, 20, &ProbeConfig::default())?;
    println!(
        "convolution: FID {:.2} -> {:.2} after 20 generations, forgets initial condition: {}",
        r.initial_fid_ab, r.final_fid_ab, r.forgets_init
    );

    let cycle = CycleMapParams::bistable(2, Domain::A)?;
    let op = ChainOperator::new(OperatorKind::CycleMap(cycle.clone()), 1);
    for x0 in [0.05, 1.5, -0.05, -2.0] {
        let mut x = x0;
        for _ in 0..40 {
            x = cycle.compose(x);
        }
        println!("cycle map: start {x0:>5} -> limit {x:+.6}");
    }
    let pos = FeatureBatch::new(DMatrix::from_fn(200, 2, |i, _| 0.2 + 0.01 * i as f64), None)?;
    let neg = FeatureBatch::new(DMatrix::from_fn(200, 2, |i, _| -0.2 - 0.01 * i as f64), None)?;
    let r = ergodicity_probe(&op, &pos, &neg, 30, &ProbeConfig::default())?;
    println!(
        "cycle map: FID {:.2} -> {:.2}, forgets initial condition: {}",
        r.initial_fid_ab, r.final_fid_ab, r.forgets_init
    );
    Ok(())
}
