//! Flux and pump-phase sweeps built on the transient solver.
//!
//! Points are independent and run on the rayon pool; results come back in
//! grid order. The disorder realization depends only on the chain seed, so
//! every point of a sweep sees the same junctions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::chain::{build_chain, ChainConfig};
use super::drive::{DriveSpec, MixingSetup, Tone};
use super::spectrum::{extract_spectrum, Spectrum};
use super::transient::simulate_transient;
use crate::error::{Error, Result};

/// Build the chain at `flux`, integrate, and return the output spectrum.
/// The loss tangent is referenced to the strongest tone.
pub fn run_spectrum(config: &ChainConfig, flux: f64, drive: &DriveSpec) -> Result<Spectrum> {
    let f_ref = drive
        .strongest_tone()
        .map(|t| t.frequency)
        .filter(|&f| f > 0.0)
        .unwrap_or(1.0 / drive.window);
    let chain = build_chain(config, flux, f_ref)?;
    let trace = simulate_transient(&chain, drive)?;
    extract_spectrum(&trace, drive)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdlerPoint {
    /// Φ₀.
    pub flux: f64,
    /// dBm in the f_p − f_s bin of the three-wave drive.
    pub psd_3wm_idler: f64,
    /// dBm in the 2f_p − f_s bin of the four-wave drive.
    pub psd_4wm_idler: f64,
}

fn pump_and_signal(drive: &DriveSpec) -> Result<(Tone, Tone)> {
    match drive.tones.as_slice() {
        [pump, signal, ..] => Ok((*pump, *signal)),
        _ => Err(Error::InvalidParameter(
            "mixing drives need a pump tone followed by a signal tone".into(),
        )),
    }
}

/// Idler power at the output for each flux point. `drive_3wm` and
/// `drive_4wm` list the pump first and the signal second.
pub fn flux_sweep_idler(
    config: &ChainConfig,
    drive_3wm: &DriveSpec,
    drive_4wm: &DriveSpec,
    flux_grid: &[f64],
) -> Result<Vec<IdlerPoint>> {
    let (p3, s3) = pump_and_signal(drive_3wm)?;
    let (p4, s4) = pump_and_signal(drive_4wm)?;
    let idler_3 = p3.frequency - s3.frequency;
    let idler_4 = 2.0 * p4.frequency - s4.frequency;
    for (freq, drive) in [(idler_3, drive_3wm), (idler_4, drive_4wm)] {
        let bin = freq * drive.window;
        if freq <= 0.0 || (bin - bin.round()).abs() > 1e-6 {
            return Err(Error::InvalidParameter(format!("idler {freq} Hz is off the bin grid")));
        }
    }

    flux_grid
        .par_iter()
        .map(|&flux| {
            let three = run_spectrum(config, flux, drive_3wm)?;
            let four = run_spectrum(config, flux, drive_4wm)?;
            Ok(IdlerPoint {
                flux,
                psd_3wm_idler: three.dbm_at(idler_3),
                psd_4wm_idler: four.dbm_at(idler_4),
            })
        })
        .collect()
}

/// Convenience wrapper building both drives from a [`MixingSetup`].
pub fn flux_sweep_with_setup(
    config: &ChainConfig,
    setup: &MixingSetup,
    flux_grid: &[f64],
) -> Result<Vec<IdlerPoint>> {
    flux_sweep_idler(config, &setup.three_wave_drive()?, &setup.four_wave_drive()?, flux_grid)
}

/// Four-wave idler power (dBm) at one flux point.
pub fn four_wave_idler(config: &ChainConfig, flux: f64, setup: &MixingSetup) -> Result<f64> {
    let drive = setup.four_wave_drive()?;
    let (pump, signal) = pump_and_signal(&drive)?;
    Ok(run_spectrum(config, flux, &drive)?.dbm_at(2.0 * pump.frequency - signal.frequency))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NotchSearch {
    /// Φ₀.
    pub flux: f64,
    /// dBm.
    pub psd_4wm_idler: f64,
    pub evaluations: usize,
}

/// Golden-section search for the four-wave idler minimum inside
/// `[lo, hi]` (Φ₀), stopping once the bracket is narrower than `tol`.
/// Assumes a single minimum in the bracket.
pub fn locate_four_wave_notch(
    config: &ChainConfig,
    setup: &MixingSetup,
    (mut lo, mut hi): (f64, f64),
    tol: f64,
) -> Result<NotchSearch> {
    if !(lo < hi && tol > 0.0) {
        return Err(Error::InvalidParameter(format!("bad notch bracket [{lo}, {hi}] / tol {tol}")));
    }
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let eval = |x: f64| four_wave_idler(config, x, setup);
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let (fa, fb) = rayon::join(|| eval(a), || eval(b));
    let (mut fa, mut fb) = (fa?, fb?);
    let mut evaluations = 2;
    while hi - lo > tol {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = eval(a)?;
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = eval(b)?;
        }
        evaluations += 1;
    }
    let (flux, psd_4wm_idler) = if fa <= fb { (a, fa) } else { (b, fb) };
    Ok(NotchSearch {
        flux,
        psd_4wm_idler,
        evaluations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainPoint {
    /// rad.
    pub pump_phase: f64,
    pub gain_db: f64,
}

/// Phase-sensitive gain at f_p/2: signal-bin power with the pump on minus
/// the same bin with the pump off, for each pump phase.
pub fn degenerate_gain_vs_phase(
    config: &ChainConfig,
    flux: f64,
    setup: &MixingSetup,
    phase_grid: &[f64],
) -> Result<Vec<GainPoint>> {
    let reference = setup.degenerate_drive(0.0)?;
    let (pump, signal) = pump_and_signal(&reference)?;
    if (2.0 * signal.frequency - pump.frequency).abs() > 1e-6 * pump.frequency {
        return Err(Error::InvalidParameter("signal must sit at half the pump frequency".into()));
    }

    // Pump-off run keeps the loss referenced to the pump frequency so both
    // runs see the same circuit.
    let pinned = ChainConfig {
        loss_ref_frequency: Some(config.loss_ref_frequency.unwrap_or(pump.frequency)),
        ..config.clone()
    };
    let off_drive = DriveSpec {
        tones: vec![Tone { amplitude: 0.0, ..pump }, signal],
        ..reference.clone()
    };
    let off = run_spectrum(&pinned, flux, &off_drive)?.dbm_at(signal.frequency);

    phase_grid
        .par_iter()
        .map(|&phase| {
            let drive = setup.degenerate_drive(phase)?;
            let on = run_spectrum(&pinned, flux, &drive)?.dbm_at(signal.frequency);
            Ok(GainPoint {
                pump_phase: phase,
                gain_db: on - off,
            })
        })
        .collect()
}
