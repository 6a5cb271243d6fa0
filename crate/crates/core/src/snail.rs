//! Current–phase relation of a single SNAIL and its flux-dependent
//! three- and four-wave mixing coefficients.
//!
//! A SNAIL is a loop with three identical large junctions (critical current
//! `i_c`) in one arm and one small junction (`r * i_c`) in the other. With
//! `phi` the phase across the small junction and `phi_ext` the reduced
//! external flux, the loop current is
//!
//! ```text
//! I(phi) = r*i_c*sin(phi) + i_c*sin((phi - phi_ext)/3)
//! ```
//!
//! Expanded around its zero-current point `phi_star`,
//! `I(phi_star + x) / (alpha_tilde*i_c) ≈ x - beta*x^2 - gamma*x^3`.
//!
//! # Branch convention
//!
//! Writing `phi = phi_ext + 3u`, the zero-current condition reads
//! `r*sin(phi_ext + 3u) + sin(u) = 0`. Every root satisfies `|sin u| <= r`,
//! and for `r < 1/3` exactly one root lies in `u ∈ [-asin r, asin r]`. That
//! root is the branch that starts at `phi_star = 0` for `phi_ext = 0` and
//! follows the flux continuously, which is what an adiabatic flux ramp
//! produces. On this branch `phi_star(phi_ext + 2π) = phi_star(phi_ext) + 2π`,
//! so all coefficients are 2π-periodic in `phi_ext` (and a fortiori 6π).

use serde::{Deserialize, Serialize};

use crate::constants::{flux_to_phase, REDUCED_FLUX_QUANTUM};
use crate::error::{Error, Result};

/// Newton residual tolerance relative to `i_c`.
pub const ROOT_TOLERANCE: f64 = 1e-12;
const ROOT_MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnailParams {
    /// Small-to-large junction critical current ratio.
    pub r: f64,
    /// Critical current of the large junctions, A.
    pub i_c: f64,
    /// Reduced external flux, rad.
    pub phi_ext: f64,
}

impl SnailParams {
    pub fn new(r: f64, i_c: f64, phi_ext: f64) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::InvalidParameter(format!("r must lie in (0, 1), got {r}")));
        }
        if !(i_c > 0.0 && i_c.is_finite()) {
            return Err(Error::InvalidParameter(format!("i_c must be positive, got {i_c}")));
        }
        if !phi_ext.is_finite() {
            return Err(Error::InvalidParameter("phi_ext must be finite".into()));
        }
        Ok(Self { r, i_c, phi_ext })
    }

    /// Build from an external flux expressed in units of Φ₀.
    pub fn from_flux(r: f64, i_c: f64, flux_in_phi0: f64) -> Result<Self> {
        Self::new(r, i_c, flux_to_phase(flux_in_phi0))
    }

    pub fn with_phi_ext(self, phi_ext: f64) -> Self {
        Self { phi_ext, ..self }
    }

    /// Same junctions, opposite flux polarity.
    pub fn mirrored(self) -> Self {
        self.with_phi_ext(-self.phi_ext)
    }
}

/// Loop current at small-junction phase `phi`, in amperes.
pub fn snail_current(phi: f64, params: &SnailParams) -> f64 {
    params.r * params.i_c * phi.sin() + params.i_c * ((phi - params.phi_ext) / 3.0).sin()
}

/// dI/dphi, in amperes per radian.
pub fn snail_current_derivative(phi: f64, params: &SnailParams) -> f64 {
    params.r * params.i_c * phi.cos() + params.i_c / 3.0 * ((phi - params.phi_ext) / 3.0).cos()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnailCoefficients {
    pub phi_star: f64,
    pub alpha_tilde: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Small-signal inductance Φ₀/(2π·alpha_tilde·i_c), H.
    pub inductance: f64,
}

/// Zero-current working point on the tracked branch.
pub fn find_phi_star(params: &SnailParams) -> Result<f64> {
    solve_branch(params, None)
}

/// Like [`find_phi_star`] but warm-started from a previous root, as when
/// stepping through a flux sweep.
pub fn find_phi_star_near(params: &SnailParams, guess: f64) -> Result<f64> {
    solve_branch(params, Some(guess))
}

fn solve_branch(params: &SnailParams, guess: Option<f64>) -> Result<f64> {
    let SnailParams { r, phi_ext, .. } = *params;
    if r >= 1.0 / 3.0 {
        return Err(Error::InvalidParameter(format!(
            "branch tracking needs r < 1/3, got {r}"
        )));
    }
    // g(u) = I(phi_ext + 3u) / i_c, increasing on the bracket.
    let g = |u: f64| r * (phi_ext + 3.0 * u).sin() + u.sin();
    let dg = |u: f64| 3.0 * r * (phi_ext + 3.0 * u).cos() + u.cos();

    let half_width = r.asin();
    let (mut lo, mut hi) = (-half_width, half_width);
    let mut u = match guess {
        Some(p) => ((p - phi_ext) / 3.0).clamp(lo, hi),
        None => -r * phi_ext.sin() / (1.0 + 3.0 * r * phi_ext.cos()).max(1e-3),
    }
    .clamp(lo, hi);

    let mut value = g(u);
    for _ in 0..ROOT_MAX_ITERATIONS {
        if value.abs() < 0.1 * ROOT_TOLERANCE {
            break;
        }
        if value < 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        let slope = dg(u);
        let newton = u - value / slope;
        u = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        value = g(u);
        if hi - lo < f64::EPSILON * half_width {
            break;
        }
    }

    let phi_star = phi_ext + 3.0 * u;
    let residual = snail_current(phi_star, params) / params.i_c;
    if residual.abs() >= ROOT_TOLERANCE {
        return Err(Error::NoConvergence {
            iterations: ROOT_MAX_ITERATIONS,
            residual: residual * params.i_c,
        });
    }
    Ok(phi_star)
}

/// Taylor coefficients around `phi_star`.
pub fn coefficients(params: &SnailParams) -> Result<SnailCoefficients> {
    let phi_star = find_phi_star(params)?;
    Ok(coefficients_at(params, phi_star))
}

/// Coefficients for an already-known working point.
pub fn coefficients_at(params: &SnailParams, phi_star: f64) -> SnailCoefficients {
    let r = params.r;
    let third = (phi_star - params.phi_ext) / 3.0;
    let alpha_tilde = r * phi_star.cos() + third.cos() / 3.0;
    let beta = 0.5 * (r * phi_star.sin() + third.sin() / 9.0) / alpha_tilde;
    let gamma = (r * phi_star.cos() + third.cos() / 27.0) / (6.0 * alpha_tilde);
    SnailCoefficients {
        phi_star,
        alpha_tilde,
        beta,
        gamma,
        inductance: REDUCED_FLUX_QUANTUM / (alpha_tilde * params.i_c),
    }
}

/// Coefficients over a flux grid (Φ₀ units), warm-starting each root from
/// the previous grid point.
pub fn coefficient_sweep(r: f64, i_c: f64, flux_grid: &[f64]) -> Result<Vec<SnailCoefficients>> {
    let mut previous: Option<f64> = None;
    flux_grid
        .iter()
        .map(|&flux| {
            let params = SnailParams::from_flux(r, i_c, flux)?;
            let phi_star = match previous {
                Some(p) => find_phi_star_near(&params, p)?,
                None => find_phi_star(&params)?,
            };
            previous = Some(phi_star);
            Ok(coefficients_at(&params, phi_star))
        })
        .collect()
}

/// Landmarks of a coefficient sweep, for comparison with plotted curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFeatures {
    /// Flux values (Φ₀) where γ changes sign, linearly interpolated.
    pub gamma_zero_crossings: Vec<f64>,
    /// Interior local extrema of β as `(flux, beta)`.
    pub beta_extrema: Vec<(f64, f64)>,
    /// Largest |β| over the sweep.
    pub beta_abs_max: f64,
}

pub fn sweep_features(flux_grid: &[f64], coeffs: &[SnailCoefficients]) -> Result<SweepFeatures> {
    if flux_grid.len() != coeffs.len() {
        return Err(Error::DimensionMismatch {
            left: flux_grid.len(),
            right: coeffs.len(),
        });
    }
    let mut gamma_zero_crossings = Vec::new();
    let mut beta_extrema = Vec::new();
    for i in 1..coeffs.len() {
        let (g0, g1) = (coeffs[i - 1].gamma, coeffs[i].gamma);
        if g0 != 0.0 && (g1 == 0.0 || g0.signum() != g1.signum()) {
            let t = g0 / (g0 - g1);
            gamma_zero_crossings.push(flux_grid[i - 1] + t * (flux_grid[i] - flux_grid[i - 1]));
        }
        if i + 1 < coeffs.len() {
            let (b0, b1, b2) = (coeffs[i - 1].beta, coeffs[i].beta, coeffs[i + 1].beta);
            if (b1 > b0 && b1 >= b2) || (b1 < b0 && b1 <= b2) {
                beta_extrema.push((flux_grid[i], b1));
            }
        }
    }
    let beta_abs_max = coeffs.iter().fold(0.0f64, |m, c| m.max(c.beta.abs()));
    Ok(SweepFeatures {
        gamma_zero_crossings,
        beta_extrema,
        beta_abs_max,
    })
}
