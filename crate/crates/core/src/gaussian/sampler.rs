//! Seeded multivariate-normal quadrature samples for synthetic pipelines.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::batch::{default_labels, PumpState, QuadratureBatch};
use super::covariance::CovMatrix;
use crate::error::{Error, Result};

/// Negative eigenvalues down to this fraction of the largest are treated as
/// round-off and clamped to zero.
const PSD_TOLERANCE: f64 = 1e-12;

/// Square-root factor `F` with `F Fᵀ = m`: Cholesky when `m` is positive
/// definite, otherwise `V sqrt(Λ)` from the symmetric eigendecomposition.
fn sqrt_factor(m: DMatrix<f64>) -> Result<DMatrix<f64>> {
    if let Some(chol) = m.clone().cholesky() {
        return Ok(chol.l());
    }
    let eig = m.symmetric_eigen();
    let largest = eig.eigenvalues.amax();
    let min = eig.eigenvalues.min();
    if min < -PSD_TOLERANCE * largest.max(f64::MIN_POSITIVE) {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    let mut factor = eig.eigenvectors;
    for (j, lambda) in eig.eigenvalues.iter().enumerate() {
        let s = lambda.max(0.0).sqrt();
        factor.column_mut(j).scale_mut(s);
    }
    Ok(factor)
}

/// `n_rep` normalized samples whose estimated covariance converges to
/// `target`: raw covariance `target / 4`, mean `means` (zero if `None`).
/// Labeled pump-on.
pub fn sample_gaussian(
    target: &CovMatrix,
    means: Option<&[f64]>,
    n_rep: usize,
    seed: u64,
) -> Result<QuadratureBatch> {
    sample_gaussian_stream(target, means, n_rep, seed, 0, PumpState::On)
}

/// As [`sample_gaussian`], drawing from ChaCha stream `stream` of `seed`
/// so that several batches from one seed are independent.
pub fn sample_gaussian_stream(
    target: &CovMatrix,
    means: Option<&[f64]>,
    n_rep: usize,
    seed: u64,
    stream: u64,
    pump_state: PumpState,
) -> Result<QuadratureBatch> {
    let d = target.dim;
    let zeros = vec![0.0; d];
    let means = means.unwrap_or(&zeros);
    if means.len() != d {
        return Err(Error::DimensionMismatch {
            left: means.len(),
            right: d,
        });
    }
    let factor = sqrt_factor(target.to_matrix() * 0.25)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut values = Vec::with_capacity(n_rep * d);
    let mut z = vec![0.0; d];
    for _ in 0..n_rep {
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(&mut rng);
        }
        for i in 0..d {
            let mut v = means[i];
            for (j, zj) in z.iter().enumerate() {
                v += factor[(i, j)] * zj;
            }
            values.push(v);
        }
    }
    QuadratureBatch::new(default_labels(d / 2), values, pump_state, true)
}
