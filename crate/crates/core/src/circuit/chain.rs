//! Device description and its disorder realization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::snail::{coefficients_at, find_phi_star_near, SnailCoefficients, SnailParams};

/// Flux sign assigned to each unit cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FluxPolarity {
    /// +, −, +, −, … starting with + at the input.
    Alternating,
    /// Every cell biased with the same sign.
    Uniform,
    /// Explicit per-cell signs; entries must be +1 or −1 and the length must
    /// equal `n_cells`.
    Explicit(Vec<i8>),
}

impl FluxPolarity {
    pub fn sign(&self, cell: usize) -> i8 {
        match self {
            FluxPolarity::Alternating => {
                if cell.is_multiple_of(2) {
                    1
                } else {
                    -1
                }
            }
            FluxPolarity::Uniform => 1,
            FluxPolarity::Explicit(signs) => signs[cell],
        }
    }
}

fn default_n_cells() -> usize {
    700
}
fn default_c_j() -> f64 {
    50e-15
}
fn default_c_g() -> f64 {
    250e-15
}
fn default_i_c() -> f64 {
    2.19e-6
}
fn default_r() -> f64 {
    0.07
}
fn default_tan_delta() -> f64 {
    2.1e-3
}
fn default_polarity() -> FluxPolarity {
    FluxPolarity::Alternating
}
fn default_disorder() -> f64 {
    0.05
}
fn default_z0() -> f64 {
    50.0
}

/// Circuit parameters of the ladder. Defaults are the device values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    #[serde(default = "default_n_cells")]
    pub n_cells: usize,
    /// Capacitance across each SNAIL, F.
    #[serde(default = "default_c_j")]
    pub c_j: f64,
    /// Capacitance to ground per cell, F.
    #[serde(default = "default_c_g")]
    pub c_g: f64,
    /// Nominal large-junction critical current, A.
    #[serde(default = "default_i_c")]
    pub i_c_nominal: f64,
    #[serde(default = "default_r")]
    pub r: f64,
    /// Dielectric loss tangent of `c_g`.
    #[serde(default = "default_tan_delta")]
    pub tan_delta: f64,
    #[serde(default = "default_polarity")]
    pub flux_polarity: FluxPolarity,
    /// Half-width of the uniform fractional spread of each junction's
    /// critical current.
    #[serde(default = "default_disorder")]
    pub disorder_amplitude: f64,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default = "default_z0")]
    pub z0: f64,
    /// Frequency at which the loss tangent is converted to a series
    /// resistance. `None` uses the pump (strongest tone) of each run.
    #[serde(default)]
    pub loss_ref_frequency: Option<f64>,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            n_cells: default_n_cells(),
            c_j: default_c_j(),
            c_g: default_c_g(),
            i_c_nominal: default_i_c(),
            r: default_r(),
            tan_delta: default_tan_delta(),
            flux_polarity: default_polarity(),
            disorder_amplitude: default_disorder(),
            rng_seed: 0,
            z0: default_z0(),
            loss_ref_frequency: None,
        }
    }
}

impl ChainConfig {
    /// 100-cell variant used for quick checks.
    pub fn fast_profile() -> Self {
        Self {
            n_cells: 100,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n_cells < 2 {
            return bad(format!("n_cells must be >= 2, got {}", self.n_cells));
        }
        for (name, value) in [
            ("c_j", self.c_j),
            ("c_g", self.c_g),
            ("i_c_nominal", self.i_c_nominal),
            ("z0", self.z0),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return bad(format!("{name} must be positive, got {value}"));
            }
        }
        if !(self.r > 0.0 && self.r < 1.0 / 3.0) {
            return bad(format!("r must lie in (0, 1/3), got {}", self.r));
        }
        if !(self.tan_delta >= 0.0 && self.tan_delta.is_finite()) {
            return bad(format!("tan_delta must be non-negative, got {}", self.tan_delta));
        }
        if !(0.0..=0.2).contains(&self.disorder_amplitude) {
            return bad(format!(
                "disorder_amplitude must lie in [0, 0.2], got {}",
                self.disorder_amplitude
            ));
        }
        if let Some(f) = self.loss_ref_frequency {
            if !(f > 0.0 && f.is_finite()) {
                return bad(format!("loss_ref_frequency must be positive, got {f}"));
            }
        }
        if let FluxPolarity::Explicit(signs) = &self.flux_polarity {
            if signs.len() != self.n_cells {
                return bad(format!(
                    "explicit polarity has {} entries for {} cells",
                    signs.len(),
                    self.n_cells
                ));
            }
            if signs.iter().any(|&s| s != 1 && s != -1) {
                return bad("explicit polarity entries must be +1 or -1".into());
            }
        }
        Ok(())
    }
}

/// Critical currents of the four junctions of one SNAIL: three large ones
/// followed by the small one.
pub type JunctionCurrents = [f64; 4];

/// Draw the junction critical currents for every cell.
///
/// For each cell in order, four values are drawn from a `ChaCha8Rng` seeded
/// with `seed_from_u64(rng_seed)`: the three large junctions first, then the
/// small one. Each draw is `u = rng.random::<f64>()` and the junction gets
/// `nominal * (1 + a * (2u - 1))`, with nominal `i_c` for large junctions
/// and `r * i_c` for the small one. With `a = 0` no draws are made.
pub fn draw_junctions(config: &ChainConfig) -> Vec<JunctionCurrents> {
    let a = config.disorder_amplitude;
    let large = config.i_c_nominal;
    let small = config.r * config.i_c_nominal;
    if a == 0.0 {
        return vec![[large, large, large, small]; config.n_cells];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut spread = move |nominal: f64| nominal * (1.0 + a * (2.0 * rng.random::<f64>() - 1.0));
    (0..config.n_cells)
        .map(|_| {
            let j0 = spread(large);
            let j1 = spread(large);
            let j2 = spread(large);
            let j3 = spread(small);
            [j0, j1, j2, j3]
        })
        .collect()
}

/// Reduce a realized junction set to single-SNAIL parameters.
///
/// The three series junctions become one identical-junction arm with the
/// same total linear inductance, i.e. the harmonic mean of their critical
/// currents.
pub fn effective_snail(junctions: &JunctionCurrents, phi_ext: f64) -> Result<SnailParams> {
    let [a, b, c, small] = *junctions;
    let arm = if a == b && b == c {
        a
    } else {
        3.0 / (1.0 / a + 1.0 / b + 1.0 / c)
    };
    SnailParams::new(small / arm, arm, phi_ext)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub junctions: JunctionCurrents,
    pub polarity: i8,
    pub snail: SnailParams,
    pub coefficients: SnailCoefficients,
}

/// A chain with disorder drawn, flux applied, and working points solved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizedChain {
    pub config: ChainConfig,
    /// External flux in units of Φ₀.
    pub flux: f64,
    pub cells: Vec<Cell>,
    /// Series resistance of each `c_g`, Ω.
    pub esr: f64,
    pub loss_ref_frequency: f64,
}

/// Realize `config` at external flux `flux` (Φ₀ units). `loss_ref_frequency`
/// sets the series resistance `tan_delta / (2π f c_g)` unless the config
/// overrides it.
pub fn build_chain(config: &ChainConfig, flux: f64, loss_ref_frequency: f64) -> Result<RealizedChain> {
    config.validate()?;
    if !flux.is_finite() {
        return Err(Error::InvalidParameter("flux must be finite".into()));
    }
    let f_ref = config.loss_ref_frequency.unwrap_or(loss_ref_frequency);
    if !(f_ref > 0.0 && f_ref.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "loss reference frequency must be positive, got {f_ref}"
        )));
    }
    let phi_ext = crate::constants::flux_to_phase(flux);
    let nominal = SnailParams::new(config.r, config.i_c_nominal, phi_ext)?;
    let nominal_star = crate::snail::find_phi_star(&nominal)?;

    let cells = draw_junctions(config)
        .into_iter()
        .enumerate()
        .map(|(k, junctions)| {
            let polarity = config.flux_polarity.sign(k);
            let snail = effective_snail(&junctions, f64::from(polarity) * phi_ext)?;
            let phi_star = find_phi_star_near(&snail, f64::from(polarity) * nominal_star)?;
            Ok(Cell {
                junctions,
                polarity,
                snail,
                coefficients: coefficients_at(&snail, phi_star),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let esr = config.tan_delta / (2.0 * std::f64::consts::PI * f_ref * config.c_g);
    Ok(RealizedChain {
        config: config.clone(),
        flux,
        cells,
        esr,
        loss_ref_frequency: f_ref,
    })
}
