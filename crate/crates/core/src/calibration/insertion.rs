//! Device insertion loss from the dielectric loss tangent.
//!
//! Each cell is a series branch `Z = 1/(1/(jωL) + jωC_J)` followed by a
//! shunt `Y = 1/(R + 1/(jωC_g))` with `R = tanδ/(ωC_g)` evaluated at the
//! same frequency. The Bloch propagation constant of the periodic ladder
//! obeys `cosh(γa) = 1 + ZY/2`, and the power transmission through
//! `n_cells` matched cells is `exp(−2 n Re γa)`. Port mismatch is excluded.

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::circuit::chain::ChainConfig;
use crate::error::Result;
use crate::snail::{coefficients, SnailParams};

/// Linear elements of one ladder cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderCell {
    /// H.
    pub inductance: f64,
    /// F.
    pub c_j: f64,
    /// F.
    pub c_g: f64,
}

impl LadderCell {
    /// Nominal (disorder-free) cell of `config` biased at `flux` Φ₀.
    pub fn nominal(config: &ChainConfig, flux: f64) -> Result<Self> {
        let params = SnailParams::from_flux(config.r, config.i_c_nominal, flux)?;
        Ok(Self {
            inductance: coefficients(&params)?.inductance,
            c_j: config.c_j,
            c_g: config.c_g,
        })
    }
}

/// Attenuation per cell, nepers (real part of the Bloch exponent).
pub fn attenuation_per_cell(tan_delta: f64, frequency: f64, cell: &LadderCell) -> f64 {
    let omega = 2.0 * std::f64::consts::PI * frequency;
    let j = Complex::new(0.0, 1.0);
    let z = 1.0 / (1.0 / (j * omega * cell.inductance) + j * omega * cell.c_j);
    let esr = tan_delta / (omega * cell.c_g);
    let y = 1.0 / (esr + 1.0 / (j * omega * cell.c_g));
    let cosh = 1.0 + z * y / 2.0;
    // principal acosh; the sign choice only flips γ, take |Re|
    let gamma = (cosh + (cosh * cosh - 1.0).sqrt()).ln();
    gamma.re.abs()
}

/// Power transmission `η` through `n_cells` lossy cells at `frequency`.
pub fn insertion_loss_from_tan_delta(
    tan_delta: f64,
    n_cells: usize,
    frequency: f64,
    cell: &LadderCell,
) -> f64 {
    if tan_delta == 0.0 {
        return 1.0;
    }
    (-2.0 * n_cells as f64 * attenuation_per_cell(tan_delta, frequency, cell)).exp()
}
