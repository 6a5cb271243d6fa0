//! Simulation and analysis toolkit for a SNAIL-based Josephson
//! traveling-wave parametric amplifier with alternated flux polarity.
//!
//! - [`snail`]: current–phase relation and the β/γ mixing coefficients.
//! - [`circuit`]: transient simulation of the SNAIL ladder, spectra, and
//!   flux/phase sweeps.
//! - [`gaussian`]: covariance estimation, squeezing, logarithmic negativity.
//! - [`calibration`]: shot-noise gain calibration and quadrature normalization.

pub mod calibration;
pub mod circuit;
pub mod constants;
pub mod error;
pub mod gaussian;
pub mod snail;

pub use error::{Error, Result};
pub use snail::{
    coefficient_sweep, coefficients, find_phi_star, snail_current, sweep_features, SnailCoefficients,
    SnailParams, SweepFeatures,
};
