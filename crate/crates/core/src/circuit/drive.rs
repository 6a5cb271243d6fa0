//! Input tones and the time grid of a transient run.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Time steps per period of the fastest tone.
pub const DEFAULT_OVERSAMPLING: usize = 128;
/// Coarsest allowed step, in steps per period of the fastest tone.
pub const MIN_OVERSAMPLING: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tone {
    /// Hz.
    pub frequency: f64,
    /// Peak source current, A.
    pub amplitude: f64,
    /// rad.
    #[serde(default)]
    pub phase: f64,
}

impl Tone {
    pub fn new(frequency: f64, amplitude: f64, phase: f64) -> Self {
        Self {
            frequency,
            amplitude,
            phase,
        }
    }
}

/// Tones injected at the input port plus the sampling grid.
///
/// The source is `ramp(t) * Σ amplitude * cos(2π f t + phase)`, a Norton
/// current source in parallel with `z0`. `ramp` rises smoothly from 0 to 1
/// over `ramp_time` so the switch-on transient has negligible content far
/// from the tones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSpec {
    pub tones: Vec<Tone>,
    /// s.
    pub duration: f64,
    pub settle_time: f64,
    pub window: f64,
    pub dt: f64,
    pub ramp_time: f64,
}

pub const DEFAULT_SETTLE: f64 = 10e-9;
pub const DEFAULT_WINDOW: f64 = 60e-9;
pub const DEFAULT_RAMP: f64 = 2e-9;
/// Settle time for mixing runs. A 700-cell chain needs about 10 ns for the
/// wavefront to reach the output and another ~20 ns for the first port
/// reflection to return, so 10 ns leaves the switch-on transient in the window.
pub const MIXING_SETTLE: f64 = 50e-9;

impl DriveSpec {
    /// Default settle time and window, tones snapped to the window grid,
    /// `dt` at [`DEFAULT_OVERSAMPLING`] steps per period of the fastest tone.
    pub fn new(tones: Vec<Tone>) -> Result<Self> {
        Self::with_timing(tones, DEFAULT_SETTLE, DEFAULT_WINDOW, DEFAULT_OVERSAMPLING)
    }

    pub fn with_timing(
        tones: Vec<Tone>,
        settle_time: f64,
        window: f64,
        oversampling: usize,
    ) -> Result<Self> {
        if !(window > 0.0 && window.is_finite()) {
            return Err(Error::InvalidParameter(format!("window must be positive, got {window}")));
        }
        if !(settle_time >= 0.0 && settle_time.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "settle_time must be non-negative, got {settle_time}"
            )));
        }
        if (oversampling as f64) < MIN_OVERSAMPLING {
            return Err(Error::InvalidParameter(format!(
                "oversampling must be at least {MIN_OVERSAMPLING}, got {oversampling}"
            )));
        }
        let tones: Vec<Tone> = tones
            .into_iter()
            .map(|t| Tone {
                frequency: snap_to_grid(t.frequency, window),
                ..t
            })
            .collect();
        let max_bin = tones
            .iter()
            .map(|t| (t.frequency * window).round() as usize)
            .max()
            .unwrap_or(0)
            .max(1);
        let window_steps = max_bin * oversampling;
        let dt = window / window_steps as f64;
        let settle_steps = (settle_time / dt).round() as usize;
        let spec = Self {
            tones,
            duration: (settle_steps + window_steps) as f64 * dt,
            settle_time: settle_steps as f64 * dt,
            window,
            dt,
            ramp_time: DEFAULT_RAMP.min(settle_steps as f64 * dt),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Same drive with every step halved.
    pub fn refined(&self) -> Self {
        Self {
            dt: self.dt / 2.0,
            ..self.clone()
        }
    }

    pub fn window_steps(&self) -> usize {
        (self.window / self.dt).round() as usize
    }

    pub fn settle_steps(&self) -> usize {
        (self.settle_time / self.dt).round() as usize
    }

    pub fn total_steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub fn resolution(&self) -> f64 {
        1.0 / self.window
    }

    /// Tone with the largest amplitude (the pump, by convention).
    pub fn strongest_tone(&self) -> Option<&Tone> {
        self.tones
            .iter()
            .max_by(|a, b| a.amplitude.abs().total_cmp(&b.amplitude.abs()))
    }

    pub fn fastest_frequency(&self) -> f64 {
        self.tones.iter().map(|t| t.frequency).fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if self.window > self.duration - self.settle_time + 0.5 * self.dt {
            return bad(format!(
                "window {} exceeds duration {} minus settle time {}",
                self.window, self.duration, self.settle_time
            ));
        }
        for (name, value) in [
            ("window", self.window),
            ("settle_time", self.settle_time),
            ("duration", self.duration),
        ] {
            let steps = value / self.dt;
            if (steps - steps.round()).abs() > 1e-6 {
                return bad(format!("{name} is not a whole number of time steps"));
            }
        }
        if !(self.ramp_time >= 0.0 && self.ramp_time <= self.settle_time + 0.5 * self.dt) {
            return bad(format!(
                "ramp_time {} must lie within the settle time {}",
                self.ramp_time, self.settle_time
            ));
        }
        for tone in &self.tones {
            if !(tone.frequency >= 0.0 && tone.amplitude.is_finite() && tone.phase.is_finite()) {
                return bad(format!("invalid tone {tone:?}"));
            }
            let bin = tone.frequency * self.window;
            if (bin - bin.round()).abs() > 1e-6 {
                return bad(format!(
                    "tone at {} Hz is not on the {} Hz grid",
                    tone.frequency,
                    1.0 / self.window
                ));
            }
        }
        let fastest = self.fastest_frequency();
        if fastest > 0.0 && self.dt > 1.0 / (fastest * MIN_OVERSAMPLING) * (1.0 + 1e-12) {
            return bad(format!(
                "dt {} exceeds 1/{MIN_OVERSAMPLING} of the fastest tone period",
                self.dt
            ));
        }
        Ok(())
    }

    /// Source current after `step + 1` time steps. Tone phases are reduced
    /// with integer arithmetic on the bin grid, so the argument error does
    /// not grow with time.
    pub fn source_current_at_step(&self, step: usize) -> f64 {
        let t = (step + 1) as f64 * self.dt;
        let envelope = smooth_ramp(t, self.ramp_time);
        if envelope == 0.0 {
            return 0.0;
        }
        let period = self.window_steps() as u128;
        envelope
            * self
                .tones
                .iter()
                .map(|tone| {
                    let bin = (tone.frequency * self.window).round() as u128;
                    let cycles = (bin * (step as u128 + 1)) % period;
                    let angle = 2.0 * PI * cycles as f64 / period as f64;
                    tone.amplitude * (angle + tone.phase).cos()
                })
                .sum::<f64>()
    }

    /// Source current at time `t`.
    pub fn source_current(&self, t: f64) -> f64 {
        let envelope = smooth_ramp(t, self.ramp_time);
        if envelope == 0.0 {
            return 0.0;
        }
        envelope
            * self
                .tones
                .iter()
                .map(|tone| tone.amplitude * (2.0 * PI * tone.frequency * t + tone.phase).cos())
                .sum::<f64>()
    }
}

/// Nearest multiple of `1/window`.
pub fn snap_to_grid(frequency: f64, window: f64) -> f64 {
    (frequency * window).round() / window
}

/// C∞ step from 0 at `t <= 0` to 1 at `t >= width`.
pub fn smooth_ramp(t: f64, width: f64) -> f64 {
    if width <= 0.0 || t >= width {
        return 1.0;
    }
    if t <= 0.0 {
        return 0.0;
    }
    let x = t / width;
    let bump = |y: f64| if y > 0.0 { (-1.0 / y).exp() } else { 0.0 };
    let (a, b) = (bump(x), bump(1.0 - x));
    a / (a + b)
}

/// Pump and signal levels for the idler and gain experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixingSetup {
    /// Requested pump frequency, Hz. Snapped to an even window bin so that
    /// half of it is on the grid too.
    #[serde(default = "default_pump_frequency")]
    pub pump_frequency: f64,
    #[serde(default = "default_pump_amplitude")]
    pub pump_amplitude: f64,
    #[serde(default = "default_signal_amplitude")]
    pub signal_amplitude: f64,
    /// Requested detuning, Hz. Snapped to a nonzero whole number of bins.
    #[serde(default = "default_detuning")]
    pub detuning: f64,
    #[serde(default = "default_settle")]
    pub settle_time: f64,
    #[serde(default = "default_window")]
    pub window: f64,
    #[serde(default = "default_oversampling")]
    pub oversampling: usize,
}

fn default_pump_frequency() -> f64 {
    7.705e9
}
fn default_pump_amplitude() -> f64 {
    0.157e-6
}
fn default_signal_amplitude() -> f64 {
    0.0011e-6
}
fn default_detuning() -> f64 {
    31e6
}
fn default_settle() -> f64 {
    MIXING_SETTLE
}
fn default_window() -> f64 {
    DEFAULT_WINDOW
}
fn default_oversampling() -> usize {
    DEFAULT_OVERSAMPLING
}

impl Default for MixingSetup {
    fn default() -> Self {
        Self {
            pump_frequency: default_pump_frequency(),
            pump_amplitude: default_pump_amplitude(),
            signal_amplitude: default_signal_amplitude(),
            detuning: default_detuning(),
            settle_time: default_settle(),
            window: default_window(),
            oversampling: default_oversampling(),
        }
    }
}

impl MixingSetup {
    /// Pump frequency on an even bin of the window grid.
    pub fn gridded_pump(&self) -> f64 {
        let half_bins = (self.pump_frequency * self.window / 2.0).round().max(1.0);
        2.0 * half_bins / self.window
    }

    pub fn gridded_detuning(&self) -> f64 {
        (self.detuning * self.window).round().max(1.0) / self.window
    }

    fn drive(&self, tones: Vec<Tone>) -> Result<DriveSpec> {
        DriveSpec::with_timing(tones, self.settle_time, self.window, self.oversampling)
    }

    /// Pump at f_p with the signal at f_p/2 − Δ.
    pub fn three_wave_drive(&self) -> Result<DriveSpec> {
        let fp = self.gridded_pump();
        self.drive(vec![
            Tone::new(fp, self.pump_amplitude, 0.0),
            Tone::new(fp / 2.0 - self.gridded_detuning(), self.signal_amplitude, 0.0),
        ])
    }

    /// Pump at f_p with the signal at f_p − Δ.
    pub fn four_wave_drive(&self) -> Result<DriveSpec> {
        let fp = self.gridded_pump();
        self.drive(vec![
            Tone::new(fp, self.pump_amplitude, 0.0),
            Tone::new(fp - self.gridded_detuning(), self.signal_amplitude, 0.0),
        ])
    }

    /// Pump at f_p (phase `pump_phase`) with the signal exactly at f_p/2.
    pub fn degenerate_drive(&self, pump_phase: f64) -> Result<DriveSpec> {
        let fp = self.gridded_pump();
        self.drive(vec![
            Tone::new(fp, self.pump_amplitude, pump_phase),
            Tone::new(fp / 2.0, self.signal_amplitude, 0.0),
        ])
    }
}
