//! Single-mode squeezing and two-mode logarithmic negativity.

use serde::{Deserialize, Serialize};

use super::covariance::CovMatrix;
use crate::error::{Error, Result};

/// Relative slack on `Δσ² − 4 det σ` before it is reported as complex.
const DISCRIMINANT_TOLERANCE: f64 = 1e-9;

fn require_dim(sigma: &CovMatrix, dim: usize) -> Result<()> {
    if sigma.dim != dim {
        return Err(Error::DimensionMismatch {
            left: sigma.dim,
            right: dim,
        });
    }
    Ok(())
}

fn variance_db(value: f64, index: usize) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(10.0 * value.log10())
    } else {
        Err(Error::NonPositiveVariance { index, value })
    }
}

/// `(S_x, S_p)` in dB relative to vacuum. Negative means squeezed.
pub fn squeezing_db(sigma: &CovMatrix) -> Result<(f64, f64)> {
    require_dim(sigma, 2)?;
    Ok((variance_db(sigma.get(0, 0), 0)?, variance_db(sigma.get(1, 1), 1)?))
}

/// Variance of `x cos θ + p sin θ` in dB relative to vacuum.
pub fn rotated_squeezing_db(sigma: &CovMatrix, theta: f64) -> Result<f64> {
    require_dim(sigma, 2)?;
    let (s, c) = theta.sin_cos();
    let v = c * c * sigma.get(0, 0) + 2.0 * s * c * sigma.get(0, 1) + s * s * sigma.get(1, 1);
    variance_db(v, 0)
}

/// Minimum and maximum quadrature variance over all angles, in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrincipalSqueezing {
    pub s_min_db: f64,
    pub s_max_db: f64,
    /// Angle of the squeezed quadrature, rad.
    pub angle: f64,
}

pub fn principal_squeezing(sigma: &CovMatrix) -> Result<PrincipalSqueezing> {
    require_dim(sigma, 2)?;
    let (a, b, d) = (sigma.get(0, 0), sigma.get(0, 1), sigma.get(1, 1));
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let anti = 0.5 * (2.0 * b).atan2(a - d);
    Ok(PrincipalSqueezing {
        s_min_db: variance_db(mean - radius, 0)?,
        s_max_db: variance_db(mean + radius, 1)?,
        angle: anti + std::f64::consts::FRAC_PI_2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Negativity {
    /// Natural-log logarithmic negativity.
    pub e_n: f64,
    /// Smallest symplectic eigenvalue of the partial transpose.
    pub nu_minus: f64,
}

/// Closed-form ν₋ and `E_N = max(−ln ν₋, 0)` from the blocks
/// `σ = [[A, C], [Cᵀ, B]]`.
pub fn logarithmic_negativity(sigma: &CovMatrix) -> Result<Negativity> {
    require_dim(sigma, 4)?;
    let det2 = |i: usize, j: usize| {
        sigma.get(i, j) * sigma.get(i + 1, j + 1) - sigma.get(i, j + 1) * sigma.get(i + 1, j)
    };
    let det_a = det2(0, 0);
    let det_b = det2(2, 2);
    let det_c = det2(0, 2);
    let det_sigma = sigma.to_matrix().determinant();
    let delta = det_a + det_b - 2.0 * det_c;

    let mut discriminant = delta * delta - 4.0 * det_sigma;
    if discriminant < 0.0 {
        if discriminant < -DISCRIMINANT_TOLERANCE * delta * delta {
            return Err(Error::ComplexEigenvalue {
                violation: -discriminant,
            });
        }
        discriminant = 0.0;
    }
    let inner = 0.5 * (delta - discriminant.sqrt());
    if inner < 0.0 {
        return Err(Error::ComplexEigenvalue { violation: -inner });
    }
    let nu_minus = inner.sqrt();
    Ok(Negativity {
        e_n: (-nu_minus.ln()).max(0.0),
        nu_minus,
    })
}
