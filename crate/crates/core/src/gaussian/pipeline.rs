//! End-to-end synthetic measurement: a known state seen through added
//! noise, recorded with the pump on and off in digitizer units, normalized,
//! and reconstructed by background subtraction.

use serde::{Deserialize, Serialize};

use super::batch::{PumpState, QuadratureBatch};
use super::covariance::{
    estimate_covariance, subtract_background_with_gain_systematic, CovMatrix,
};
use super::sampler::sample_gaussian_stream;
use super::states::{thermal, with_added_noise};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticMeasurement {
    pub n_rep: usize,
    /// Added noise per mode referred to the device output, photons.
    pub n_add: f64,
    pub seed: u64,
    /// Normalization factor converting digitizer units to quadratures.
    pub upsilon: f64,
    /// Gain change between the pump-on and pump-off sequences, dB. Applied
    /// to the pump-off record.
    #[serde(default)]
    pub gain_drift_db: f64,
    /// Systematic gain uncertainty propagated into the result, dB.
    #[serde(default = "default_gain_uncertainty")]
    pub gain_uncertainty_db: f64,
}

fn default_gain_uncertainty() -> f64 {
    super::covariance::GAIN_SYSTEMATIC_DB
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub sigma_on: CovMatrix,
    pub sigma_off: CovMatrix,
    pub state: CovMatrix,
    pub physical: bool,
}

/// Raw (un-normalized) record of a state with `n_add` added noise.
pub fn raw_record(
    state: &CovMatrix,
    pump_state: PumpState,
    m: &SyntheticMeasurement,
    stream: u64,
) -> Result<QuadratureBatch> {
    if !(m.upsilon > 0.0 && m.upsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!("upsilon must be positive, got {}", m.upsilon)));
    }
    let seen = match pump_state {
        PumpState::On => with_added_noise(state, m.n_add),
        PumpState::Off => thermal(state.dim / 2, m.n_add)?,
    };
    let sampled = sample_gaussian_stream(&seen, None, m.n_rep, m.seed, stream, pump_state)?;
    let raw: Vec<f64> = sampled.values().iter().map(|v| v / m.upsilon).collect();
    QuadratureBatch::new(sampled.mode_labels().to_vec(), raw, pump_state, false)
}

/// Sample, normalize, estimate and subtract. Stream `2k` of the seed is the
/// pump-on record and `2k + 1` the pump-off record for `k = stream_pair`.
pub fn reconstruct(state: &CovMatrix, m: &SyntheticMeasurement, stream_pair: u64) -> Result<Reconstruction> {
    let on = raw_record(state, PumpState::On, m, 2 * stream_pair)?.normalize(m.upsilon);
    let off = raw_record(state, PumpState::Off, m, 2 * stream_pair + 1)?
        .with_gain_drift(m.gain_drift_db)
        .normalize(m.upsilon);
    let sigma_on = estimate_covariance(&on)?;
    let sigma_off = estimate_covariance(&off)?;
    let state = subtract_background_with_gain_systematic(&sigma_on, &sigma_off, m.gain_uncertainty_db)?;
    let physical = state.is_physical();
    Ok(Reconstruction {
        sigma_on,
        sigma_off,
        state,
        physical,
    })
}
