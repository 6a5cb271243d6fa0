//! Reference Gaussian states in the vacuum-equals-identity convention.

use super::covariance::CovMatrix;
use crate::error::Result;

/// Vacuum with `n_th` thermal photons per mode: `(1 + 2 n_th) 1`.
pub fn thermal(modes: usize, n_th: f64) -> Result<CovMatrix> {
    let mut c = CovMatrix::identity(2 * modes)?;
    for k in 0..2 * modes {
        c.entries[k * 2 * modes + k] = 1.0 + 2.0 * n_th;
    }
    Ok(c)
}

/// Single-mode squeezed vacuum with squeeze parameter `r`, squeezed
/// quadrature at angle `theta` from `x`.
pub fn squeezed_vacuum(r: f64, theta: f64) -> Result<CovMatrix> {
    let (lo, hi) = ((-2.0 * r).exp(), (2.0 * r).exp());
    let (s, c) = theta.sin_cos();
    CovMatrix::from_entries(
        2,
        vec![
            c * c * lo + s * s * hi,
            s * c * (lo - hi),
            s * c * (lo - hi),
            s * s * lo + c * c * hi,
        ],
    )
}

/// Squeeze parameter giving `db` (negative) of squeezing.
pub fn squeeze_parameter_for_db(db: f64) -> f64 {
    -db / 10.0 * std::f64::consts::LN_10 / 2.0
}

/// Two-mode squeezed vacuum plus `n_th` added photons per mode:
/// `A = B = (cosh 2r + 2 n_th) 1`, `C = sinh 2r · diag(1, −1)`.
pub fn two_mode_squeezed(r: f64, n_th: f64) -> Result<CovMatrix> {
    let a = (2.0 * r).cosh() + 2.0 * n_th;
    let c = (2.0 * r).sinh();
    #[rustfmt::skip]
    let entries = vec![
        a, 0.0, c, 0.0,
        0.0, a, 0.0, -c,
        c, 0.0, a, 0.0,
        0.0, -c, 0.0, a,
    ];
    CovMatrix::from_entries(4, entries)
}

/// `state + 2 n_add · 1`: the state seen through phase-insensitive added
/// noise of `n_add` photons per mode (the pump-on record).
pub fn with_added_noise(state: &CovMatrix, n_add: f64) -> CovMatrix {
    let mut c = state.clone();
    for k in 0..c.dim {
        c.entries[k * c.dim + k] += 2.0 * n_add;
    }
    c
}
