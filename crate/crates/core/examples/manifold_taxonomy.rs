//! Joint trends of (σ_intra, m_LB, PR_G) and the eight dimensional patterns,
//! then segmentation of a synthetic trace that contracts coherently before
//! wrinkling.
//!
//! Run with `cargo run --example manifold_taxonomy`.

use resonance::taxonomy::{classify_pattern, segment_patterns, TrendConfig};
use resonance::{DimensionalPattern, Direction, MetricTrace, TraceRow};

fn arrow(d: Direction) -> &'static str {
    match d {
        Direction::Up => "↑",
        Direction::Down => "↓",
        Direction::Flat => "·",
    }
}

fn main() -> resonance::Result<()> {
    use Direction::{Down, Up};
    println!("σ  m  PR  pattern  antipattern");
    for s in [Up, Down] {
        for m in [Up, Down] {
            for p in [Up, Down] {
                let pattern = classify_pattern(s, m, p);
                let anti = classify_pattern(s.negate(), m.negate(), p.negate());
                println!(
                    "{}  {}  {}   {}       {}",
                    arrow(s),
                    arrow(m),
                    arrow(p),
                    pattern.code(),
                    anti.code()
                );
            }
        }
    }

    // Everything shrinks for 20 generations, then m_LB turns back up.
    let rows = (0..=40)
        .map(|n| {
            let t = n as f64;
            let m_lb = if n <= 20 {
                12.0 - 0.3 * t
            } else {
                6.0 + 0.3 * (t - 20.0)
            };
            TraceRow {
                n,
                fid_local: (n > 0).then_some(0.5),
                fid_cumulative: 0.5 * t,
                sigma_intra: Some(10.0 - 0.15 * t),
                m_lb,
                pr_g: 20.0 - 0.3 * t,
            }
        })
        .collect();
    let trace = MetricTrace::from_rows(rows)?;
    for seg in segment_patterns(&trace, &TrendConfig::default())? {
        let name = match seg.pattern {
            DimensionalPattern::Flat => "Flat".to_string(),
            p => format!("{p:?} ({})", p.code()),
        };
        println!(
            "generations [{:>2}, {:>2}): {name}, volatility {:.4}",
            seg.start, seg.end, seg.volatility
        );
    }
    Ok(())
}
