//! Rectangular-window power spectrum of the output port.

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use super::drive::DriveSpec;
use super::transient::TimeTrace;
use crate::error::{Error, Result};

/// One-sided power per bin delivered into `z0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub bin_frequencies: Vec<f64>,
    /// W.
    pub power: Vec<f64>,
    /// dBm; `-inf` for empty bins.
    pub psd_dbm: Vec<f64>,
    /// Hz.
    pub resolution: f64,
}

pub fn watts_to_dbm(power: f64) -> f64 {
    10.0 * (power / 1e-3).log10()
}

impl Spectrum {
    pub fn bin_of(&self, frequency: f64) -> usize {
        (frequency / self.resolution).round() as usize
    }

    pub fn power_at(&self, frequency: f64) -> f64 {
        self.power[self.bin_of(frequency)]
    }

    pub fn dbm_at(&self, frequency: f64) -> f64 {
        self.psd_dbm[self.bin_of(frequency)]
    }

    pub fn total_power(&self) -> f64 {
        self.power.iter().sum()
    }
}

/// Spectrum of the output voltage over the window that starts at the
/// drive's settle time. Tones sit on bin centers, so no window function or
/// leakage correction is applied.
pub fn extract_spectrum(trace: &TimeTrace, drive: &DriveSpec) -> Result<Spectrum> {
    let start = drive.settle_steps();
    let len = drive.window_steps();
    let available = trace.samples.len().saturating_sub(start);
    if len < 2 || available < len {
        return Err(Error::WindowTooShort {
            needed: len,
            available,
        });
    }
    Ok(power_spectrum(&trace.samples[start..start + len], trace.dt, trace.metadata.chain.z0))
}

/// One-sided power spectrum of `samples` (volts across `z0`). The sum over
/// bins equals `mean(v^2) / z0`.
pub fn power_spectrum(samples: &[f64], dt: f64, z0: f64) -> Spectrum {
    let len = samples.len();
    let mut buffer: Vec<Complex<f64>> = samples.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(len).process(&mut buffer);

    let scale = 1.0 / (len as f64 * len as f64 * z0);
    let half = len / 2;
    let power: Vec<f64> = (0..=half)
        .map(|k| {
            let p = buffer[k].norm_sqr() * scale;
            if k == 0 || (len.is_multiple_of(2) && k == half) {
                p
            } else {
                2.0 * p
            }
        })
        .collect();
    let resolution = 1.0 / (len as f64 * dt);
    Spectrum {
        bin_frequencies: (0..=half).map(|k| k as f64 * resolution).collect(),
        psd_dbm: power.iter().map(|&p| watts_to_dbm(p)).collect(),
        power,
        resolution,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn on_grid_sine_lands_in_one_bin() {
        let n = 6000;
        let dt = 1e-11;
        let bin = 37;
        let amplitude = 3e-6;
        let samples: Vec<f64> = (0..n)
            .map(|i| amplitude * (2.0 * PI * ((bin * i) % n) as f64 / n as f64 + 0.4).cos())
            .collect();
        let s = power_spectrum(&samples, dt, 50.0);
        let expected = amplitude * amplitude / 100.0;
        assert!((s.power[bin] / expected - 1.0).abs() < 1e-12);
        for (k, p) in s.power.iter().enumerate() {
            if k != bin {
                assert!(*p < expected * 1e-30, "bin {k}: {p}");
            }
        }
        assert!((s.resolution - 1.0 / (n as f64 * dt)).abs() < 1e-3);
    }

    #[test]
    fn parseval() {
        let n = 1001;
        let samples: Vec<f64> = (0..n)
            .map(|i| ((i * 7919) % 104729) as f64 / 104729.0 - 0.3)
            .collect();
        let s = power_spectrum(&samples, 1e-12, 50.0);
        let mean_square = samples.iter().map(|v| v * v).sum::<f64>() / n as f64;
        assert!((s.total_power() / (mean_square / 50.0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sixty_ns_window_resolution() {
        let dt = 60e-9 / 6000.0;
        let s = power_spectrum(&vec![0.0; 6000], dt, 50.0);
        assert!((s.resolution - 16.666_666_67e6).abs() < 1.0);
        assert_eq!(s.psd_dbm[3], f64::NEG_INFINITY);
    }
}
