//! Covariance matrices in the vacuum-equals-identity convention.
//!
//! Quadratures are ordered `(x_s, p_s, x_i, p_i)`. A normalized batch has
//! per-quadrature vacuum variance 1/4, and the estimator multiplies by 4 so
//! that vacuum maps to the identity.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::batch::QuadratureBatch;
use crate::error::{Error, Result};

/// Eigenvalues of `σ + iΩ` above this are accepted as physical.
pub const PHYSICALITY_TOLERANCE: f64 = 1e-9;

/// Power-gain uncertainty applied as the systematic error, dB.
pub const GAIN_SYSTEMATIC_DB: f64 = 1.0;

/// Symmetric `dim × dim` covariance with per-entry errors, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovMatrix {
    pub dim: usize,
    pub entries: Vec<f64>,
    /// Statistical standard error per entry.
    pub uncertainty: Vec<f64>,
    /// Systematic error per entry from the gain calibration.
    pub systematic: Vec<f64>,
}

impl CovMatrix {
    pub fn from_entries(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim != 2 && dim != 4 {
            return Err(Error::InvalidParameter(format!("dimension must be 2 or 4, got {dim}")));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                left: entries.len(),
                right: dim * dim,
            });
        }
        let scale = entries.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for i in 0..dim {
            for j in 0..i {
                if (entries[i * dim + j] - entries[j * dim + i]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidParameter(format!(
                        "matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self {
            dim,
            entries,
            uncertainty: vec![0.0; dim * dim],
            systematic: vec![0.0; dim * dim],
        })
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                left: m.nrows(),
                right: m.ncols(),
            });
        }
        let dim = m.nrows();
        Self::from_entries(dim, (0..dim * dim).map(|k| m[(k / dim, k % dim)]).collect())
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::from_matrix(&DMatrix::identity(dim, dim))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.entries)
    }

    /// Smallest eigenvalue of `σ + iΩ`. Non-negative for a physical state.
    pub fn min_physical_eigenvalue(&self) -> f64 {
        let n = self.dim;
        let sigma = self.to_matrix();
        let omega = symplectic_form(n / 2);
        // Hermitian A + iB has the spectrum of [[A, -B], [B, A]], doubled.
        let mut real = DMatrix::zeros(2 * n, 2 * n);
        real.view_mut((0, 0), (n, n)).copy_from(&sigma);
        real.view_mut((n, n), (n, n)).copy_from(&sigma);
        real.view_mut((0, n), (n, n)).copy_from(&(-&omega));
        real.view_mut((n, 0), (n, n)).copy_from(&omega);
        real.symmetric_eigenvalues().min()
    }

    pub fn is_physical(&self) -> bool {
        self.min_physical_eigenvalue() >= -PHYSICALITY_TOLERANCE
    }

    /// The same data normalized with an assumed power gain `delta_db` higher.
    /// Quadratures scale as `G^(-1/2)`, so covariances scale as `1/G`.
    pub fn rescaled_for_gain(&self, delta_db: f64) -> CovMatrix {
        let factor = 10f64.powf(-delta_db / 10.0);
        CovMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|v| v * factor).collect(),
            uncertainty: self.uncertainty.iter().map(|v| v * factor).collect(),
            systematic: self.systematic.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Block-diagonal `[[0, 1], [-1, 0]]` for `modes` modes.
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * modes, 2 * modes);
    for m in 0..modes {
        omega[(2 * m, 2 * m + 1)] = 1.0;
        omega[(2 * m + 1, 2 * m)] = -1.0;
    }
    omega
}

/// `σ_mn = 4 (⟨R_m R_n⟩ − ⟨R_m⟩⟨R_n⟩)` with the unbiased `1/(N−1)`
/// normalization. Standard errors come from the fourth central moments.
pub fn estimate_covariance(batch: &QuadratureBatch) -> Result<CovMatrix> {
    if !batch.is_normalized() {
        return Err(Error::NotNormalized);
    }
    let n_rep = batch.n_rep();
    if n_rep < 2 {
        return Err(Error::DegenerateBatch(n_rep));
    }
    let d = batch.dim();
    let n = n_rep as f64;

    // shifted by the first record: exact zeros for constant data
    let origin = batch.record(0).to_vec();
    let mut mean = vec![0.0; d];
    for record in batch.records() {
        for k in 0..d {
            mean[k] += record[k] - origin[k];
        }
    }
    for m in &mut mean {
        *m /= n;
    }

    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|i| (i..d).map(move |j| (i, j))).collect();
    let mut second = vec![0.0; pairs.len()];
    let mut fourth = vec![0.0; pairs.len()];
    let mut centered = vec![0.0; d];
    for record in batch.records() {
        for k in 0..d {
            centered[k] = (record[k] - origin[k]) - mean[k];
        }
        for (p, &(i, j)) in pairs.iter().enumerate() {
            let prod = centered[i] * centered[j];
            second[p] += prod;
            fourth[p] += prod * prod;
        }
    }

    let mut entries = vec![0.0; d * d];
    let mut uncertainty = vec![0.0; d * d];
    for (p, &(i, j)) in pairs.iter().enumerate() {
        let population = second[p] / n;
        let value = 4.0 * second[p] / (n - 1.0);
        let spread = (fourth[p] / n - population * population).max(0.0);
        let error = 4.0 * (spread / n).sqrt();
        entries[i * d + j] = value;
        entries[j * d + i] = value;
        uncertainty[i * d + j] = error;
        uncertainty[j * d + i] = error;
    }
    Ok(CovMatrix {
        dim: d,
        entries,
        uncertainty,
        systematic: vec![0.0; d * d],
    })
}

/// `σ^ON − σ^OFF + 1`. Statistical errors add in quadrature; systematic
/// errors add linearly.
pub fn subtract_background(sigma_on: &CovMatrix, sigma_off: &CovMatrix) -> Result<CovMatrix> {
    if sigma_on.dim != sigma_off.dim {
        return Err(Error::DimensionMismatch {
            left: sigma_on.dim,
            right: sigma_off.dim,
        });
    }
    let d = sigma_on.dim;
    let entries = (0..d * d)
        .map(|k| {
            let identity = if k / d == k % d { 1.0 } else { 0.0 };
            sigma_on.entries[k] - sigma_off.entries[k] + identity
        })
        .collect();
    let uncertainty = sigma_on
        .uncertainty
        .iter()
        .zip(&sigma_off.uncertainty)
        .map(|(a, b)| a.hypot(*b))
        .collect();
    let systematic = sigma_on
        .systematic
        .iter()
        .zip(&sigma_off.systematic)
        .map(|(a, b)| a + b)
        .collect();
    Ok(CovMatrix {
        dim: d,
        entries,
        uncertainty,
        systematic,
    })
}

/// Background subtraction with the gain systematic attached: both inputs are
/// re-evaluated at an assumed gain `±gain_uncertainty_db` away and the
/// largest per-entry excursion of the result is stored in `systematic`.
pub fn subtract_background_with_gain_systematic(
    sigma_on: &CovMatrix,
    sigma_off: &CovMatrix,
    gain_uncertainty_db: f64,
) -> Result<CovMatrix> {
    let mut state = subtract_background(sigma_on, sigma_off)?;
    for sign in [-1.0, 1.0] {
        let shifted = subtract_background(
            &sigma_on.rescaled_for_gain(sign * gain_uncertainty_db),
            &sigma_off.rescaled_for_gain(sign * gain_uncertainty_db),
        )?;
        for (sys, (a, b)) in state
            .systematic
            .iter_mut()
            .zip(shifted.entries.iter().zip(&state.entries))
        {
            *sys = sys.max((a - b).abs());
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::batch::{default_labels, PumpState};

    fn batch(values: Vec<f64>, modes: usize) -> QuadratureBatch {
        QuadratureBatch::new(default_labels(modes), values, PumpState::On, true).unwrap()
    }

    #[test]
    fn constant_batch_is_zero_matrix() {
        let b = batch([0.3, -1.0].repeat(50), 1);
        let c = estimate_covariance(&b).unwrap();
        assert!(c.entries.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn factor_four_on_a_hand_example() {
        // x = ±1/2 alternating, p = 0: population variance 1/4
        let values: Vec<f64> = (0..4).flat_map(|i| [if i % 2 == 0 { 0.5 } else { -0.5 }, 0.0]).collect();
        let c = estimate_covariance(&batch(values, 1)).unwrap();
        assert!((c.get(0, 0) - 4.0 * 0.25 * 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_unnormalized_and_tiny_batches() {
        let raw = QuadratureBatch::new(default_labels(1), vec![0.0; 4], PumpState::On, false).unwrap();
        assert_eq!(estimate_covariance(&raw), Err(Error::NotNormalized));
        assert_eq!(estimate_covariance(&batch(vec![1.0, 2.0], 1)), Err(Error::DegenerateBatch(1)));
    }

    #[test]
    fn subtracting_a_matrix_from_itself_gives_identity() {
        let c = CovMatrix::from_entries(2, vec![3.0, 0.4, 0.4, 1.7]).unwrap();
        let r = subtract_background(&c, &c).unwrap();
        assert_eq!(r.entries, vec![1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn subtraction_is_linear() {
        let off = CovMatrix::from_entries(4, (0..16).map(|k| if k % 5 == 0 { 2.0 } else { 0.0 }).collect()).unwrap();
        let mut on = off.clone();
        on.entries[0] -= 0.5;
        on.entries[5] += 1.0;
        let r = subtract_background(&on, &off).unwrap();
        let mut expected = CovMatrix::identity(4).unwrap().entries;
        expected[0] -= 0.5;
        expected[5] += 1.0;
        assert_eq!(r.entries, expected);
    }

    #[test]
    fn dimension_mismatch() {
        let a = CovMatrix::identity(2).unwrap();
        let b = CovMatrix::identity(4).unwrap();
        assert_eq!(
            subtract_background(&a, &b),
            Err(Error::DimensionMismatch { left: 2, right: 4 })
        );
    }

    #[test]
    fn vacuum_is_physical_and_subvacuum_is_not() {
        assert!(CovMatrix::identity(4).unwrap().is_physical());
        assert!((CovMatrix::identity(2).unwrap().min_physical_eigenvalue()).abs() < 1e-12);
        let bad = CovMatrix::from_entries(2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!(!bad.is_physical());
        let squeezed = CovMatrix::from_entries(2, vec![0.5, 0.0, 0.0, 2.0]).unwrap();
        assert!(squeezed.is_physical());
    }

    #[test]
    fn gain_systematic_vanishes_for_equal_inputs() {
        let c = CovMatrix::from_entries(2, vec![2.0, 0.1, 0.1, 2.5]).unwrap();
        let r = subtract_background_with_gain_systematic(&c, &c, 1.0).unwrap();
        assert!(r.systematic.iter().all(|&s| s == 0.0));
    }
}
