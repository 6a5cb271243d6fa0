//! Fixtures for the criterion benches.

use twpa_core::calibration::sntj::{bias_grid, db_to_linear, synthetic_psd};
use twpa_core::calibration::SntjModel;
use twpa_core::circuit::drive::{DriveSpec, Tone};
use twpa_core::circuit::{build_chain, ChainConfig, RealizedChain};
use twpa_core::gaussian::states::two_mode_squeezed;
use twpa_core::gaussian::CovMatrix;

pub fn flux_grid(points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| -2.0 + 4.0 * i as f64 / (points - 1) as f64)
        .collect()
}

/// Short pumped chain and a drive with a 10 ns window.
pub fn small_transient() -> (RealizedChain, DriveSpec) {
    let config = ChainConfig {
        n_cells: 20,
        rng_seed: 1,
        ..ChainConfig::default()
    };
    let chain = build_chain(&config, 0.59, 7.7e9).unwrap();
    let drive = DriveSpec::with_timing(
        vec![Tone::new(7.7e9, 0.157e-6, 0.0), Tone::new(3.8e9, 1e-9, 0.0)],
        2e-9,
        10e-9,
        128,
    )
    .unwrap();
    (chain, drive)
}

pub fn tmsv() -> CovMatrix {
    two_mode_squeezed(0.6, 0.1).unwrap()
}

pub struct SntjData {
    pub model: SntjModel,
    pub v_bias: Vec<f64>,
    pub psd: Vec<f64>,
}

pub fn sntj_data(points: usize) -> SntjData {
    let model = SntjModel {
        frequency: 3.85e9,
        bandwidth: 100e3,
        t_electron: 0.05,
        t_sys: 4.0,
        g_sys: db_to_linear(61.7),
    };
    let v_bias = bias_grid(model.frequency, 5.0, points);
    let psd = synthetic_psd(&model, &v_bias, 0.01, 3);
    SntjData { model, v_bias, psd }
}
