//! Physical constants (SI, CODATA 2018 exact values where defined).

/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Magnetic flux quantum h/(2e), Wb.
pub const FLUX_QUANTUM: f64 = PLANCK / (2.0 * ELEMENTARY_CHARGE);
/// Reduced flux quantum Φ₀/2π, Wb.
pub const REDUCED_FLUX_QUANTUM: f64 = FLUX_QUANTUM / (2.0 * std::f64::consts::PI);

/// Reduced external flux φ_ext (radians) for a flux given in units of Φ₀.
pub fn flux_to_phase(flux_in_phi0: f64) -> f64 {
    2.0 * std::f64::consts::PI * flux_in_phi0
}

/// Inverse of [`flux_to_phase`].
pub fn phase_to_flux(phase: f64) -> f64 {
    phase / (2.0 * std::f64::consts::PI)
}
