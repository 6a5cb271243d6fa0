//! Quadrature normalization factor and input-attenuation bookkeeping.

use serde::{Deserialize, Serialize};

use super::sntj::db_to_linear;
use crate::constants::PLANCK;
use crate::error::{Error, Result};

/// Upper bound on the loss between the noise-source reference plane and
/// the isolator input. The calibrated gain is raised by this much before
/// normalizing, so inferred squeezing is a lower bound.
pub const SOURCE_LOSS_CORRECTION_DB: f64 = 1.0;

/// Full-scale to volt conversion of the acquisition electronics.
pub const DEFAULT_EPSILON: f64 = 0.98;
/// s.
pub const DEFAULT_INTEGRATION_TIME: f64 = 10e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizationParams {
    /// Device power transmission, `0 < η ≤ 1`.
    pub eta: f64,
    /// Calibrated system gain, linear, before the loss correction.
    pub g_sys: f64,
    /// Ω.
    pub z0: f64,
    /// Hz.
    pub f_acq: f64,
    /// s.
    pub t_int: f64,
    pub epsilon: f64,
    /// Added to the calibrated gain before use, dB.
    #[serde(default = "default_correction")]
    pub gain_correction_db: f64,
}

fn default_correction() -> f64 {
    SOURCE_LOSS_CORRECTION_DB
}

impl NormalizationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::InvalidParameter(format!("eta must be in (0, 1], got {}", self.eta)));
        }
        for (name, v) in [
            ("g_sys", self.g_sys),
            ("z0", self.z0),
            ("f_acq", self.f_acq),
            ("t_int", self.t_int),
            ("epsilon", self.epsilon),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.gain_correction_db.is_finite() {
            return Err(Error::InvalidParameter("gain_correction_db must be finite".into()));
        }
        Ok(())
    }

    /// Gain actually used for normalization, linear.
    pub fn corrected_gain(&self) -> f64 {
        self.g_sys * db_to_linear(self.gain_correction_db)
    }
}

/// `υ = ε sqrt(η t_int / (G Z₀ h f_acq))` with the corrected gain.
pub fn normalization_factor(params: &NormalizationParams) -> Result<f64> {
    params.validate()?;
    Ok(params.epsilon
        * (params.eta * params.t_int / (params.corrected_gain() * params.z0 * PLANCK * params.f_acq))
            .sqrt())
}

/// `S21_off = A_in + η + G_sys`, all in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttenuationLedger {
    pub s21_off: f64,
    pub eta_db: f64,
    pub g_sys_db: f64,
    pub a_in: f64,
}

pub fn input_attenuation(s21_off: f64, eta_db: f64, g_sys_db: f64) -> AttenuationLedger {
    AttenuationLedger {
        s21_off,
        eta_db,
        g_sys_db,
        a_in: s21_off - eta_db - g_sys_db,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> NormalizationParams {
        NormalizationParams {
            eta: 0.7,
            g_sys: db_to_linear(61.7),
            z0: 50.0,
            f_acq: 3.85e9,
            t_int: DEFAULT_INTEGRATION_TIME,
            epsilon: DEFAULT_EPSILON,
            gain_correction_db: SOURCE_LOSS_CORRECTION_DB,
        }
    }

    #[test]
    fn sqrt_scaling_in_integration_time() {
        let a = normalization_factor(&params()).unwrap();
        let b = normalization_factor(&NormalizationParams { t_int: 2.0 * params().t_int, ..params() }).unwrap();
        assert!((b / a - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn ten_db_more_gain() {
        let a = normalization_factor(&params()).unwrap();
        let b = normalization_factor(&NormalizationParams { g_sys: params().g_sys * 10.0, ..params() }).unwrap();
        assert!((b / a - 10f64.powf(-0.5)).abs() < 1e-14);
    }

    #[test]
    fn correction_raises_gain() {
        let p = params();
        assert!((p.corrected_gain() / p.g_sys - 10f64.powf(0.1)).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_eta() {
        assert!(normalization_factor(&NormalizationParams { eta: 1.5, ..params() }).is_err());
        assert!(normalization_factor(&NormalizationParams { eta: 0.0, ..params() }).is_err());
    }

    #[test]
    fn attenuation_arithmetic() {
        assert_eq!(input_attenuation(0.0, 0.0, 0.0).a_in, 0.0);
        assert_eq!(input_attenuation(-10.0, -1.0, 61.0).a_in, -70.0);
    }
}
