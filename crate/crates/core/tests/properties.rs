use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use resonance::drift::{classify_phases, drift_curves, DriftCurves, PhaseConfig};
use resonance::io::{decode_gmcf, encode_gmcf};
use resonance::linalg::{estimate_gaussian, sample_covariance, solve_lyapunov, sqrtm_psd};
use resonance::metrics::{frechet_distance, levina_bickel, participation_ratio, sigma_intra, MetricConfig};
use resonance::slope::theil_sen;
use resonance::taxonomy::{trend, TrendConfig};
use resonance::{FeatureBatch, GaussianSummary, PhaseLabel};

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 32,
        ..ProptestConfig::default()
    }
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-5.0..5.0f64, rows * cols).prop_map(move |v| DMatrix::from_row_slice(rows, cols, &v))
}

fn batch(rows: usize, cols: usize) -> impl Strategy<Value = FeatureBatch> {
    matrix(rows, cols).prop_map(|m| FeatureBatch::new(m, None).unwrap())
}

fn labelled(rows: usize, cols: usize) -> impl Strategy<Value = FeatureBatch> {
    (matrix(rows, cols), prop::collection::vec(0u32..3, rows)).prop_map(|(m, l)| FeatureBatch::new(m, Some(l)).unwrap())
}

/// Orthogonal factor of a random square matrix.
fn rotation(dim: usize) -> impl Strategy<Value = DMatrix<f64>> {
    matrix(dim, dim).prop_map(move |m| (m + DMatrix::identity(dim, dim) * 0.1).qr().q())
}

fn series(len: usize) -> impl Strategy<Value = Vec<(usize, f64)>> {
    prop::collection::vec(0.1..10.0f64, len).prop_map(|v| v.into_iter().enumerate().collect())
}

fn summaries(len: usize) -> impl Strategy<Value = Vec<GaussianSummary>> {
    prop::collection::vec((-5.0..5.0f64, 0.1..4.0f64), len).prop_map(|v| {
        v.into_iter()
            .map(|(m, var)| GaussianSummary::new(DVector::from_element(2, m), DMatrix::identity(2, 2) * var).unwrap())
            .collect()
    })
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn frechet_is_symmetric(a in batch(30, 3), b in batch(30, 3)) {
        let (sa, sb) = (estimate_gaussian(&a).unwrap(), estimate_gaussian(&b).unwrap());
        let ab = frechet_distance(&sa, &sb).unwrap();
        let ba = frechet_distance(&sb, &sa).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-9 * ab.max(1.0));
        prop_assert!(ab >= 0.0);
    }

    #[test]
    fn frechet_to_itself_is_zero(a in batch(25, 4)) {
        let s = estimate_gaussian(&a).unwrap();
        prop_assert_eq!(frechet_distance(&s, &s).unwrap(), 0.0);
    }

    #[test]
    fn sigma_intra_is_positively_homogeneous(b in labelled(24, 3), c in 0.01..100.0f64) {
        let base = sigma_intra(&b).unwrap();
        let scaled = FeatureBatch::new(b.data() * c, b.labels().map(<[u32]>::to_vec)).unwrap();
        prop_assert!((sigma_intra(&scaled).unwrap() - c * base).abs() <= 1e-9 * (c * base).max(1.0));
    }

    #[test]
    fn participation_ratio_ignores_rotation(b in batch(40, 4), q in rotation(4)) {
        let rotated = FeatureBatch::new(b.data() * &q, None).unwrap();
        let (p, r) = (participation_ratio(&b).unwrap(), participation_ratio(&rotated).unwrap());
        prop_assert!((p - r).abs() <= 1e-8, "{} vs {}", p, r);
    }

    #[test]
    fn levina_bickel_ignores_global_scale(b in batch(60, 3), c in 0.01..100.0f64) {
        let cfg = MetricConfig { k_neighbors: 5, lb_max_samples: None };
        let scaled = FeatureBatch::new(b.data() * c, None).unwrap();
        let (m, s) = (levina_bickel(&b, &cfg).unwrap(), levina_bickel(&scaled, &cfg).unwrap());
        prop_assert!((m - s).abs() <= 1e-9 * m.max(1.0), "{} vs {}", m, s);
    }

    #[test]
    fn sqrtm_scales_and_squares_back(m in matrix(4, 4), c in 0.0..20.0f64) {
        let a = &m * m.transpose();
        let root = sqrtm_psd(&a).unwrap();
        prop_assert!((&root * &root - &a).norm() <= 1e-8 * a.norm().max(1.0));
        let scaled = sqrtm_psd(&(&a * (c * c))).unwrap();
        prop_assert!((&scaled - &root * c).norm() <= 1e-10 * (root.norm() * c).max(1e-12) + 1e-12);
    }

    #[test]
    fn covariance_ignores_translation(b in batch(20, 3), shift in prop::collection::vec(-10.0..10.0f64, 3)) {
        let offset = DVector::from_vec(shift);
        let mut moved = b.data().clone();
        for mut row in moved.row_iter_mut() {
            row += offset.transpose();
        }
        let (_, c0) = sample_covariance(&b).unwrap();
        let (_, c1) = sample_covariance(&FeatureBatch::new(moved, None).unwrap()).unwrap();
        prop_assert!((&c0 - &c1).amax() <= 1e-12 * c0.amax().max(1.0));
    }

    #[test]
    fn lyapunov_solution_satisfies_equation(m in matrix(3, 3), q in matrix(3, 3)) {
        // Rescale so the spectral norm, and hence the spectral radius, is below 0.9.
        let a = &m * (0.9 / m.norm().max(1e-9));
        let q = &q * q.transpose() + DMatrix::identity(3, 3);
        let s = solve_lyapunov(&a, &q).unwrap();
        let residual = &a * &s * a.transpose() + &q - &s;
        prop_assert!(residual.norm() <= 1e-8 * s.norm());
        prop_assert!((&s - s.transpose()).norm() <= 1e-10 * s.norm());
        prop_assert!(s.clone().symmetric_eigen().eigenvalues.min() > 0.0);
    }

    #[test]
    fn theil_sen_recovers_lines(slope in -10.0..10.0f64, intercept in -10.0..10.0f64, n in 2usize..20) {
        let points: Vec<(f64, f64)> = (0..n).map(|i| (i as f64, intercept + slope * i as f64)).collect();
        prop_assert!((theil_sen(&points).unwrap() - slope).abs() <= 1e-9 * slope.abs().max(1.0));
    }

    #[test]
    fn gmcf_round_trips(b in labelled(7, 5)) {
        let back = decode_gmcf(&encode_gmcf(&b)).unwrap();
        prop_assert_eq!(back.data(), b.data());
        prop_assert_eq!(back.labels(), b.labels());
    }

    #[test]
    fn phases_ignore_curve_rescaling(local in series(20), cumulative in series(21)) {
        let curves = DriftCurves {
            local: local.iter().map(|&(n, v)| (n + 1, v)).collect(),
            cumulative,
        };
        let cfg = PhaseConfig::default();
        let base = classify_phases(&curves, &cfg).unwrap();
        for c in [0.1, 10.0] {
            let scale = |s: &[(usize, f64)]| s.iter().map(|&(n, v)| (n, v * c)).collect::<Vec<_>>();
            let local_only = DriftCurves { local: scale(&curves.local), cumulative: curves.cumulative.clone() };
            let cumulative_only = DriftCurves { local: curves.local.clone(), cumulative: scale(&curves.cumulative) };
            prop_assert_eq!(&classify_phases(&local_only, &cfg).unwrap(), &base);
            prop_assert_eq!(&classify_phases(&cumulative_only, &cfg).unwrap(), &base);
        }
    }

    #[test]
    fn trend_follows_scale_sign(s in series(15), c in 0.01..100.0f64) {
        let cfg = TrendConfig::default();
        let base = trend(&s, &cfg).unwrap();
        let up: Vec<(usize, f64)> = s.iter().map(|&(n, v)| (n, v * c)).collect();
        let down: Vec<(usize, f64)> = s.iter().map(|&(n, v)| (n, -v * c)).collect();
        let up = trend(&up, &cfg).unwrap();
        let down = trend(&down, &cfg).unwrap();
        for ((b, u), d) in base.iter().zip(&up).zip(&down) {
            prop_assert_eq!(b.1.direction, u.1.direction);
            prop_assert_eq!(b.1.direction.negate(), d.1.direction);
        }
    }

    #[test]
    fn drift_curves_are_prefix_consistent(s in summaries(15), m in 2usize..15) {
        let full = drift_curves(&s).unwrap();
        let head = drift_curves(&s[..m]).unwrap();
        prop_assert_eq!(&full.cumulative[..head.cumulative.len()], &head.cumulative[..]);
        prop_assert_eq!(&full.local[..head.local.len()], &head.local[..]);
    }

    #[test]
    fn repeating_the_last_generation_keeps_stationarity(s in summaries(12), tail in 1usize..4) {
        let mut s = s;
        let last = s.last().unwrap().clone();
        s.extend(std::iter::repeat_n(last, 8));
        let cfg = PhaseConfig::default();
        let before = classify_phases(&drift_curves(&s).unwrap(), &cfg).unwrap();
        prop_assume!(before.last().map(|p| p.1) == Some(PhaseLabel::Stationary));
        let last = s.last().unwrap().clone();
        s.extend(std::iter::repeat_n(last, tail));
        let after = classify_phases(&drift_curves(&s).unwrap(), &cfg).unwrap();
        prop_assert_eq!(after.last().map(|p| p.1), Some(PhaseLabel::Stationary));
    }
}
