//! Run configuration: JSON on disk, profile defaults filled in, validated
//! before any command executes.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use twpa_core::calibration::SntjGuess;
use twpa_core::circuit::{ChainConfig, MixingSetup};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// 100-cell chain and coarse grids.
    Ci,
    /// 700-cell device and paper-scale statistics.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinRange {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

/// Either an explicit list or `{start, stop, points}` (inclusive ends).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range(LinRange),
}

impl Grid {
    pub fn range(start: f64, stop: f64, points: usize) -> Self {
        Grid::Range(LinRange { start, stop, points })
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::List(v) => v.clone(),
            Grid::Range(r) if r.points == 1 => vec![r.start],
            Grid::Range(r) => (0..r.points)
                // endpoint-weighted so that symmetric ranges mirror exactly
                .map(|i| (r.start * (r.points - 1 - i) as f64 + r.stop * i as f64) / (r.points - 1) as f64)
                .collect(),
        }
    }

    fn check(&self, name: &str) -> Result<Vec<f64>, CliError> {
        let v = self.values();
        if v.is_empty() {
            return Err(CliError::config(format!("{name}: grid is empty")));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(CliError::config(format!("{name}: grid has non-finite values")));
        }
        Ok(v)
    }
}

fn two_pi_grid(points: usize) -> Grid {
    Grid::range(0.0, 2.0 * std::f64::consts::PI, points)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffsConfig {
    #[serde(default = "default_r")]
    pub r: f64,
    /// A.
    #[serde(default = "default_i_c")]
    pub i_c: f64,
    /// Φ₀.
    #[serde(default = "default_coeff_grid")]
    pub flux: Grid,
}

fn default_r() -> f64 {
    ChainConfig::default().r
}
fn default_i_c() -> f64 {
    ChainConfig::default().i_c_nominal
}
fn default_coeff_grid() -> Grid {
    Grid::range(-2.0, 2.0, 401)
}

impl Default for CoeffsConfig {
    fn default() -> Self {
        Self {
            r: default_r(),
            i_c: default_i_c(),
            flux: default_coeff_grid(),
        }
    }
}

/// Flux markers written to flux-sweep metadata, Φ₀.
pub const PHI_1: f64 = 0.59;
pub const PHI_2: f64 = 0.45;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxSweepConfig {
    /// Φ₀. Profile default when absent.
    #[serde(default)]
    pub flux: Option<Grid>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainPhaseConfig {
    /// Φ₀.
    #[serde(default = "default_gain_flux")]
    pub flux: f64,
    /// Pump phase, rad.
    #[serde(default)]
    pub phase: Option<Grid>,
}

fn default_gain_flux() -> f64 {
    PHI_1
}

/// Shared settings of the synthetic measurement pipelines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub n_rep: Option<usize>,
    /// Added noise photons per mode.
    #[serde(default = "default_n_add")]
    pub n_add: f64,
    /// Gain drift between pump-on and pump-off sequences, dB.
    #[serde(default)]
    pub gain_drift_db: f64,
    #[serde(default = "default_gain_uncertainty")]
    pub gain_uncertainty_db: f64,
    /// Normalization factor. Computed from the `normalize` block if absent.
    #[serde(default)]
    pub upsilon: Option<f64>,
}

fn default_n_add() -> f64 {
    0.5
}
fn default_gain_uncertainty() -> f64 {
    twpa_core::gaussian::covariance::GAIN_SYSTEMATIC_DB
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            n_rep: None,
            n_add: default_n_add(),
            gain_drift_db: 0.0,
            gain_uncertainty_db: default_gain_uncertainty(),
            upsilon: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmsConfig {
    /// Squeezing of the generated state along its squeezed axis, dB.
    #[serde(default = "default_target_db")]
    pub target_db: f64,
    /// Pump phase, rad. The squeezed axis sits at half the pump phase.
    #[serde(default)]
    pub phase: Option<Grid>,
    #[serde(default)]
    pub pipeline: PipelineConfig,
}

fn default_target_db() -> f64 {
    -3.01
}

impl Default for SmsConfig {
    fn default() -> Self {
        Self {
            target_db: default_target_db(),
            phase: None,
            pipeline: PipelineConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TmsConfig {
    /// Two-mode squeeze parameter.
    #[serde(default)]
    pub r: Option<Grid>,
    /// Thermal photons per mode on the generated state.
    #[serde(default)]
    pub n_th: f64,
    #[serde(default)]
    pub pipeline: PipelineConfig,
}

/// Synthetic SNTJ data, used when no input file is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SntjSynthetic {
    #[serde(default = "default_sntj_gain")]
    pub g_sys_db: f64,
    /// K.
    #[serde(default = "default_t_sys")]
    pub t_sys: f64,
    /// K.
    #[serde(default = "default_t_electron")]
    pub t_electron: f64,
    #[serde(default = "default_relative_noise")]
    pub relative_noise: f64,
    #[serde(default)]
    pub points: Option<usize>,
    /// Half-span of the bias sweep in units of hf/e.
    #[serde(default = "default_span")]
    pub span_knees: f64,
}

fn default_sntj_gain() -> f64 {
    61.7
}
fn default_t_sys() -> f64 {
    4.0
}
fn default_t_electron() -> f64 {
    0.05
}
fn default_relative_noise() -> f64 {
    0.01
}
fn default_span() -> f64 {
    5.0
}

impl Default for SntjSynthetic {
    fn default() -> Self {
        Self {
            g_sys_db: default_sntj_gain(),
            t_sys: default_t_sys(),
            t_electron: default_t_electron(),
            relative_noise: default_relative_noise(),
            points: None,
            span_knees: default_span(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SntjFitConfig {
    /// CSV with `v_bias,psd` columns (V, W). Relative paths resolve
    /// against the config file.
    #[serde(default)]
    pub input: Option<PathBuf>,
    /// Hz.
    #[serde(default = "default_f_acq")]
    pub frequency: f64,
    /// Hz.
    #[serde(default = "default_bandwidth")]
    pub bandwidth: f64,
    #[serde(default)]
    pub initial_guess: Option<SntjGuess>,
    #[serde(default)]
    pub synthetic: SntjSynthetic,
}

fn default_f_acq() -> f64 {
    twpa_core::calibration::GAIN_TABLE_PUMP / 2.0
}
fn default_bandwidth() -> f64 {
    100e3
}

impl Default for SntjFitConfig {
    fn default() -> Self {
        Self {
            input: None,
            frequency: default_f_acq(),
            bandwidth: default_bandwidth(),
            initial_guess: None,
            synthetic: SntjSynthetic::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizeConfig {
    /// Device power transmission. Computed from the chain loss tangent at
    /// `f_acq` when absent.
    #[serde(default)]
    pub eta: Option<f64>,
    /// Fraction of the chain whose loss enters η (1 = full chain).
    #[serde(default = "one")]
    pub eta_fraction_of_chain: f64,
    /// Flux at which the nominal cell inductance is taken, Φ₀.
    #[serde(default = "default_gain_flux")]
    pub flux: f64,
    #[serde(default = "default_sntj_gain")]
    pub g_sys_db: f64,
    #[serde(default = "default_z0")]
    pub z0: f64,
    #[serde(default = "default_f_acq")]
    pub f_acq: f64,
    #[serde(default = "default_t_int")]
    pub t_int: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_correction")]
    pub gain_correction_db: f64,
}

fn one() -> f64 {
    1.0
}
fn default_z0() -> f64 {
    50.0
}
fn default_t_int() -> f64 {
    twpa_core::calibration::normalization::DEFAULT_INTEGRATION_TIME
}
fn default_epsilon() -> f64 {
    twpa_core::calibration::normalization::DEFAULT_EPSILON
}
fn default_correction() -> f64 {
    twpa_core::calibration::SOURCE_LOSS_CORRECTION_DB
}

impl Default for NormalizeConfig {
    fn default() -> Self {
        Self {
            eta: None,
            eta_fraction_of_chain: 1.0,
            flux: default_gain_flux(),
            g_sys_db: default_sntj_gain(),
            z0: default_z0(),
            f_acq: default_f_acq(),
            t_int: default_t_int(),
            epsilon: default_epsilon(),
            gain_correction_db: default_correction(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttenuationConfig {
    /// Pump-off transmission through the device, dB. Required.
    #[serde(default)]
    pub s21_off_db: Option<f64>,
    /// Device insertion loss, dB (negative). From the chain loss at
    /// `normalize.f_acq` when absent.
    #[serde(default)]
    pub eta_db: Option<f64>,
    #[serde(default = "default_sntj_gain")]
    pub g_sys_db: f64,
}

/// Everything a run can read. Every block is optional on disk.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Seeds the disorder draw and the synthetic samplers. Overrides
    /// `chain.rng_seed` when set.
    #[serde(default)]
    pub master_seed: Option<u64>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub chain: Option<ChainConfig>,
    #[serde(default)]
    pub mixing: Option<MixingSetup>,
    #[serde(default)]
    pub coeffs: CoeffsConfig,
    #[serde(default)]
    pub flux_sweep: FluxSweepConfig,
    #[serde(default)]
    pub gain_phase: GainPhaseConfig,
    #[serde(default)]
    pub sms: SmsConfig,
    #[serde(default)]
    pub tms: TmsConfig,
    #[serde(default)]
    pub sntj_fit: SntjFitConfig,
    #[serde(default)]
    pub normalize: NormalizeConfig,
    #[serde(default)]
    pub attenuation: AttenuationConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("reading {}: {e}", path.display())))?;
        let mut config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        if let Some(input) = &config.sntj_fit.input {
            if input.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                config.sntj_fit.input = Some(base.join(input));
            }
        }
        Ok(config)
    }

    /// Fill profile defaults and apply the seed override. The result is what
    /// gets hashed and recorded.
    pub fn resolve(mut self, profile: Profile, seed: Option<u64>) -> Result<Self, CliError> {
        if seed.is_some() {
            self.master_seed = seed;
        }
        let seed = self.master_seed.unwrap_or(0);
        self.master_seed = Some(seed);

        let mut chain = self.chain.take().unwrap_or_else(|| match profile {
            Profile::Ci => ChainConfig::fast_profile(),
            Profile::Full => ChainConfig::default(),
        });
        chain.rng_seed = seed;
        chain.validate().map_err(|e| CliError::config(format!("chain: {e}")))?;
        self.chain = Some(chain);

        let mixing = self.mixing.take().unwrap_or_default();
        mixing
            .three_wave_drive()
            .and_then(|_| mixing.four_wave_drive())
            .and_then(|_| mixing.degenerate_drive(0.0))
            .map_err(|e| CliError::config(format!("mixing: {e}")))?;
        self.mixing = Some(mixing);

        let (flux_points, phase_points, n_rep) = match profile {
            Profile::Ci => (9, 9, 100_000),
            Profile::Full => (15, 17, 1_000_000),
        };
        self.flux_sweep.flux.get_or_insert_with(|| Grid::range(0.30, 0.65, flux_points));
        self.gain_phase.phase.get_or_insert_with(|| two_pi_grid(phase_points));
        self.sms.phase.get_or_insert_with(|| two_pi_grid(phase_points));
        self.tms.r.get_or_insert_with(|| Grid::range(0.0, 1.0, 11));
        self.sms.pipeline.n_rep.get_or_insert(n_rep);
        self.tms.pipeline.n_rep.get_or_insert(n_rep);
        self.sntj_fit.synthetic.points.get_or_insert(match profile {
            Profile::Ci => 10_001,
            Profile::Full => 100_001,
        });
        Ok(self)
    }

    pub fn chain(&self) -> &ChainConfig {
        self.chain.as_ref().expect("resolved config has a chain")
    }

    pub fn mixing(&self) -> &MixingSetup {
        self.mixing.as_ref().expect("resolved config has a mixing block")
    }

    pub fn seed(&self) -> u64 {
        self.master_seed.unwrap_or(0)
    }
}

/// Grid accessors that report empty or missing grids as config errors.
pub fn grid(g: &Option<Grid>, name: &str) -> Result<Vec<f64>, CliError> {
    g.as_ref()
        .ok_or_else(|| CliError::config(format!("{name}: no grid")))?
        .check(name)
}

pub fn coeff_grid(c: &CoeffsConfig) -> Result<Vec<f64>, CliError> {
    c.flux.check("coeffs.flux")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let e = serde_json::from_str::<RunConfig>(r#"{"coefs": {}}"#);
        assert!(e.is_err());
        let e = serde_json::from_str::<RunConfig>(r#"{"coeffs": {"r": 0.07, "extra": 1}}"#);
        assert!(e.is_err());
    }

    #[test]
    fn grids_parse_both_ways() {
        let c: CoeffsConfig = serde_json::from_str(r#"{"flux": [0.0, 0.5]}"#).unwrap();
        assert_eq!(c.flux.values(), vec![0.0, 0.5]);
        let c: CoeffsConfig =
            serde_json::from_str(r#"{"flux": {"start": -1, "stop": 1, "points": 5}}"#).unwrap();
        assert_eq!(c.flux.values(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn empty_grid_is_a_config_error() {
        let c: CoeffsConfig = serde_json::from_str(r#"{"flux": []}"#).unwrap();
        assert!(matches!(coeff_grid(&c), Err(CliError::Config(_))));
    }

    #[test]
    fn seed_overrides_chain_seed() {
        let c: RunConfig = serde_json::from_str(r#"{"chain": {"rng_seed": 5}}"#).unwrap();
        let r = c.resolve(Profile::Ci, Some(9)).unwrap();
        assert_eq!(r.chain().rng_seed, 9);
        assert_eq!(r.chain().n_cells, 700);
    }

    #[test]
    fn profile_picks_chain_size() {
        let ci = RunConfig::default().resolve(Profile::Ci, None).unwrap();
        let full = RunConfig::default().resolve(Profile::Full, None).unwrap();
        assert_eq!(ci.chain().n_cells, 100);
        assert_eq!(full.chain().n_cells, 700);
    }
}
