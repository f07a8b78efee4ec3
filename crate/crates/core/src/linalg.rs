//! Dense symmetric linear algebra: covariance estimation, eigendecomposition,
//! PSD square roots and the discrete Lyapunov fixed point.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};

use crate::error::{Error, Result};
use crate::types::{FeatureBatch, GaussianSummary};

const SYMMETRY_TOL: f64 = 1e-9;
const PSD_TOL: f64 = 1e-8;
const RIDGE_SCALE: f64 = 1e-6;
const LYAPUNOV_TOL: f64 = 1e-10;
const LYAPUNOV_MAX_ITER: usize = 100_000;

/// Eigenvalues sorted descending with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl SpectralDecomposition {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.eigenvectors * DMatrix::from_diagonal(&self.eigenvalues) * self.eigenvectors.transpose()
    }
}

/// Relative asymmetry `max|A - Aᵀ| / max|A|` must stay below 1e-9.
pub fn check_symmetric(a: &DMatrix<f64>) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    let scale = a.amax();
    if scale == 0.0 {
        return Ok(());
    }
    let asymmetry = (a - a.transpose()).amax() / scale;
    if asymmetry > SYMMETRY_TOL || !asymmetry.is_finite() {
        return Err(Error::NotSymmetric { asymmetry });
    }
    Ok(())
}

fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Symmetric eigendecomposition with descending eigenvalues.
pub fn symmetric_eigen(a: &DMatrix<f64>) -> Result<SpectralDecomposition> {
    check_symmetric(a)?;
    let eig = SymmetricEigen::try_new(symmetrize(a), f64::EPSILON, 0)
        .ok_or_else(|| Error::DecompositionFailure("symmetric eigensolver did not converge".into()))?;
    let d = a.nrows();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let eigenvalues = DVector::from_iterator(d, order.iter().map(|&i| eig.eigenvalues[i]));
    let eigenvectors = DMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues only, sorted descending.
pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_symmetric(a)?;
    let eig = SymmetricEigen::try_new(symmetrize(a), f64::EPSILON, 0)
        .ok_or_else(|| Error::DecompositionFailure("symmetric eigensolver did not converge".into()))?;
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

pub(crate) fn column_means(data: &DMatrix<f64>) -> DVector<f64> {
    let n = data.nrows() as f64;
    DVector::from_iterator(data.ncols(), data.column_iter().map(|c| c.sum() / n))
}

/// Unbiased, symmetrized sample covariance without ridge. Zero for a single sample.
pub fn sample_covariance(batch: &FeatureBatch) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let data = batch.data();
    let (n, d) = data.shape();
    if n == 0 || d == 0 {
        return Err(Error::EmptyBatch);
    }
    let mean = column_means(data);
    if n == 1 {
        return Ok((mean, DMatrix::zeros(d, d)));
    }
    let mut centered = data.clone();
    for (j, mut col) in centered.column_iter_mut().enumerate() {
        col.add_scalar_mut(-mean[j]);
    }
    let cov = centered.tr_mul(&centered) / (n as f64 - 1.0);
    Ok((mean, symmetrize(&cov)))
}

/// Fits the Gaussian summary used by the Fréchet distance.
///
/// The covariance carries a ridge of `1e-6 * trace / D` on the diagonal, which
/// vanishes for a single sample.
pub fn estimate_gaussian(batch: &FeatureBatch) -> Result<GaussianSummary> {
    let (mean, mut cov) = sample_covariance(batch)?;
    let d = cov.nrows();
    let ridge = RIDGE_SCALE * cov.trace() / d as f64;
    for i in 0..d {
        cov[(i, i)] += ridge;
    }
    Ok(GaussianSummary { mean, covariance: cov })
}

fn clamp_psd(values: &mut [f64]) -> Result<()> {
    let max = values.iter().copied().fold(0.0_f64, f64::max);
    for v in values.iter_mut() {
        if *v < 0.0 {
            if *v < -PSD_TOL * max {
                return Err(Error::NotPositiveSemidefinite { eigenvalue: *v });
            }
            *v = 0.0;
        }
    }
    Ok(())
}

/// Principal square root of a symmetric PSD matrix.
pub fn sqrtm_psd(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    } = symmetric_eigen(a)?;
    let mut values: Vec<f64> = eigenvalues.iter().copied().collect();
    clamp_psd(&mut values)?;
    let roots = DVector::from_iterator(values.len(), values.iter().map(|v| v.sqrt()));
    let scaled = DMatrix::from_fn(a.nrows(), a.ncols(), |r, c| eigenvectors[(r, c)] * roots[c]);
    Ok(symmetrize(&(scaled * eigenvectors.transpose())))
}

/// `Tr((A B)^{1/2})` for symmetric PSD `A`, `B`, via `Tr((√A B √A)^{1/2})`.
pub fn trace_sqrt_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    let root_a = sqrtm_psd(a)?;
    let inner = symmetrize(&(&root_a * b * &root_a));
    let mut values = symmetric_eigenvalues(&inner)?;
    clamp_psd(&mut values)?;
    Ok(values.iter().map(|v| v.sqrt()).sum())
}

/// Largest eigenvalue modulus of a general square matrix (real Schur form).
pub fn spectral_radius(a: &DMatrix<f64>) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    if a.nrows() == 0 {
        return Ok(0.0);
    }
    let schur = Schur::try_new(a.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::DecompositionFailure("Schur iteration did not converge".into()))?;
    Ok(schur.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Solves `Σ = A Σ Aᵀ + Q` by fixed-point iteration from `Σ₀ = Q`.
///
/// Requires `ρ(A) < 1 - 1e-6`. Returns the first iterate whose residual
/// `‖Σ - (AΣAᵀ + Q)‖_F` is at most `1e-10 ‖Σ‖_F`.
pub fn solve_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = a.nrows();
    if !a.is_square() || q.shape() != (d, d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: q.nrows(),
        });
    }
    check_symmetric(q)?;
    let radius = spectral_radius(a)?;
    if radius >= 1.0 - 1e-6 {
        return Err(Error::SpectralRadiusTooLarge { radius });
    }
    let at = a.transpose();
    let mut sigma = symmetrize(q);
    for _ in 0..LYAPUNOV_MAX_ITER {
        let next = symmetrize(&(a * &sigma * &at + q));
        let residual = (&next - &sigma).norm();
        if residual <= LYAPUNOV_TOL * sigma.norm() {
            return Ok(sigma);
        }
        sigma = next;
    }
    Err(Error::NoConvergence {
        iterations: LYAPUNOV_MAX_ITER,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn single_sample_has_zero_covariance() {
        let b = FeatureBatch::from_rows(&[vec![1.5, -2.0]], None).unwrap();
        let g = estimate_gaussian(&b).unwrap();
        assert_eq!(g.mean.as_slice(), &[1.5, -2.0]);
        assert_eq!(g.covariance, DMatrix::zeros(2, 2));
    }

    #[test]
    fn two_point_covariance() {
        let b = FeatureBatch::from_rows(&[vec![0.0, 0.0], vec![2.0, 0.0]], None).unwrap();
        let g = estimate_gaussian(&b).unwrap();
        assert_eq!(g.mean.as_slice(), &[1.0, 0.0]);
        // raw diag(2, 0), ridge 1e-6 * 2 / 2
        let ridge = 1e-6;
        assert!((g.covariance[(0, 0)] - (2.0 + ridge)).abs() < 1e-15);
        assert!((g.covariance[(1, 1)] - ridge).abs() < 1e-18);
        assert_eq!(g.covariance[(0, 1)], 0.0);
    }

    #[test]
    fn covariance_is_permutation_invariant() {
        let rows = vec![vec![1.0, 2.0], vec![-3.0, 0.5], vec![4.0, 4.0], vec![0.0, -1.0]];
        let mut rev = rows.clone();
        rev.reverse();
        let a = estimate_gaussian(&FeatureBatch::from_rows(&rows, None).unwrap()).unwrap();
        let b = estimate_gaussian(&FeatureBatch::from_rows(&rev, None).unwrap()).unwrap();
        assert!((&a.mean - &b.mean).amax() < 1e-15);
        assert!((&a.covariance - &b.covariance).amax() < 1e-14);
    }

    #[test]
    fn sqrtm_of_identity_and_diagonal() {
        let i = DMatrix::<f64>::identity(3, 3);
        assert!((sqrtm_psd(&i).unwrap() - &i).amax() < 1e-14);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 9.0]));
        let r = sqrtm_psd(&d).unwrap();
        let expect = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0]));
        assert!((r - expect).amax() < 1e-14);
    }

    #[test]
    fn sqrtm_squares_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let b = random_matrix(&mut rng, 5, 5);
        let a = &b * b.transpose();
        let r = sqrtm_psd(&a).unwrap();
        assert!((&r * &r - &a).norm() / a.norm() < 1e-8);
    }

    #[test]
    fn sqrtm_rejects_asymmetric() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(sqrtm_psd(&a), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn sqrtm_clamps_tiny_negative_eigenvalues() {
        // rank-1 matrix with round-off
        let v = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let a = &v * v.transpose();
        let r = sqrtm_psd(&a).unwrap();
        assert!((&r * &r - &a).norm() / a.norm() < 1e-6);
    }

    #[test]
    fn eigen_reconstruction_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = random_matrix(&mut rng, 6, 6);
        let a = &b + b.transpose();
        let dec = symmetric_eigen(&a).unwrap();
        assert!((dec.reconstruct() - &a).norm() <= 1e-8 * a.norm());
        let vtv = dec.eigenvectors.transpose() * &dec.eigenvectors;
        assert!((vtv - DMatrix::identity(6, 6)).norm() <= 1e-8 * 6f64.sqrt());
        for w in dec.eigenvalues.as_slice().windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn lyapunov_scalar() {
        let a = DMatrix::from_element(1, 1, 0.5);
        let q = DMatrix::from_element(1, 1, 1.0);
        let s = solve_lyapunov(&a, &q).unwrap();
        assert!((s[(0, 0)] - 4.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn lyapunov_zero_dynamics() {
        let q = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let s = solve_lyapunov(&DMatrix::zeros(2, 2), &q).unwrap();
        assert_eq!(s, q);
    }

    #[test]
    fn lyapunov_isotropic_axes() {
        let a = DMatrix::<f64>::identity(3, 3) * 0.9;
        let s = solve_lyapunov(&a, &DMatrix::identity(3, 3)).unwrap();
        let expect = 1.0 / (1.0 - 0.81);
        for i in 0..3 {
            assert!((s[(i, i)] - expect).abs() < 1e-8 * expect);
        }
        assert!((s[(0, 1)]).abs() < 1e-12);
    }

    #[test]
    fn lyapunov_residual_contract() {
        let a = DMatrix::from_row_slice(3, 3, &[0.9, 0.2, 0.0, 0.0, 0.5, 0.3, 0.1, 0.0, -0.4]);
        let q = DMatrix::identity(3, 3) * 0.25;
        let s = solve_lyapunov(&a, &q).unwrap();
        let resid = (&s - (&a * &s * a.transpose() + &q)).norm();
        assert!(resid <= 1e-10 * s.norm());
        assert!(symmetric_eigenvalues(&s).unwrap().iter().all(|&v| v > 0.0));
    }

    #[test]
    fn lyapunov_rejects_unstable() {
        let a = DMatrix::<f64>::identity(2, 2) * 1.01;
        assert!(matches!(
            solve_lyapunov(&a, &DMatrix::identity(2, 2)),
            Err(Error::SpectralRadiusTooLarge { .. })
        ));
    }

    #[test]
    fn spectral_radius_of_rotation() {
        // complex pair of modulus 0.8
        let t = 0.7_f64;
        let a = DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]) * 0.8;
        assert!((spectral_radius(&a).unwrap() - 0.8).abs() < 1e-12);
    }
}
