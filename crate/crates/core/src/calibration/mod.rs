//! Gain calibration with a shot-noise tunnel junction, quadrature
//! normalization, device insertion loss, and input attenuation.

pub mod insertion;
pub mod normalization;
pub mod sntj;

pub use insertion::{insertion_loss_from_tan_delta, LadderCell};
pub use normalization::{
    input_attenuation, normalization_factor, AttenuationLedger, NormalizationParams,
    SOURCE_LOSS_CORRECTION_DB,
};
pub use sntj::{fit_sntj, sntj_noise_power, SntjFit, SntjGuess, SntjModel};

/// Calibrated system gain at one acquisition frequency, given as
/// `multiple_of_pump · f_p + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainTableEntry {
    pub label: &'static str,
    pub multiple_of_pump: f64,
    /// Hz.
    pub offset: f64,
    pub g_sys_db: f64,
}

impl GainTableEntry {
    pub fn frequency(&self, pump_frequency: f64) -> f64 {
        self.multiple_of_pump * pump_frequency + self.offset
    }
}

/// Measured pump frequency the gain table refers to, Hz.
pub const GAIN_TABLE_PUMP: f64 = 7.705e9;

pub const GAIN_TABLE: [GainTableEntry; 6] = [
    GainTableEntry { label: "fp/2", multiple_of_pump: 0.5, offset: 0.0, g_sys_db: 61.7 },
    GainTableEntry { label: "fp/2+31MHz", multiple_of_pump: 0.5, offset: 31e6, g_sys_db: 62.0 },
    GainTableEntry { label: "fp/2-31MHz", multiple_of_pump: 0.5, offset: -31e6, g_sys_db: 61.1 },
    GainTableEntry { label: "fp/2+61MHz", multiple_of_pump: 0.5, offset: 61e6, g_sys_db: 61.5 },
    GainTableEntry { label: "fp/2-61MHz", multiple_of_pump: 0.5, offset: -61e6, g_sys_db: 62.0 },
    GainTableEntry { label: "fp+31MHz", multiple_of_pump: 1.0, offset: 31e6, g_sys_db: 46.5 },
];
