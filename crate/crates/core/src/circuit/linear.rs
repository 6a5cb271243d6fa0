//! Small-signal (linearized) frequency-domain solution of the ladder.
//!
//! Each SNAIL is replaced by its working-point inductance, so this solver
//! shares nothing with the time-domain integrator beyond the realized
//! chain. It is used to check the transient solver in the linear regime.

use nalgebra::Complex;

use super::chain::RealizedChain;

type C64 = Complex<f64>;

/// Port voltages for a unit (1 A peak) source current.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortResponse {
    pub input: C64,
    pub output: C64,
}

/// Response at angular frequency `omega`, rad/s.
pub fn port_response(chain: &RealizedChain, omega: f64) -> PortResponse {
    let cfg = &chain.config;
    let n = chain.cells.len();
    let j = C64::new(0.0, 1.0);
    let branch: Vec<C64> = chain
        .cells
        .iter()
        .map(|cell| 1.0 / (j * omega * cell.coefficients.inductance) + j * omega * cfg.c_j)
        .collect();
    let shunt = 1.0 / (C64::new(chain.esr, 0.0) + 1.0 / (j * omega * cfg.c_g));
    let port = C64::new(1.0 / cfg.z0, 0.0);

    let mut diag = vec![C64::new(0.0, 0.0); n + 1];
    diag[0] = port + branch[0];
    for k in 1..=n {
        diag[k] = branch[k - 1] + shunt + if k < n { branch[k] } else { port };
    }
    let mut rhs = vec![C64::new(0.0, 0.0); n + 1];
    rhs[0] = C64::new(1.0, 0.0);

    // Thomas algorithm with off-diagonal -branch[k]
    let mut c_prime = vec![C64::new(0.0, 0.0); n + 1];
    c_prime[0] = -branch[0] / diag[0];
    rhs[0] /= diag[0];
    for k in 1..=n {
        let sub = -branch[k - 1];
        let denom = diag[k] - sub * c_prime[k - 1];
        if k < n {
            c_prime[k] = -branch[k] / denom;
        }
        rhs[k] = (rhs[k] - sub * rhs[k - 1]) / denom;
    }
    for k in (0..n).rev() {
        let next = rhs[k + 1];
        rhs[k] -= c_prime[k] * next;
    }
    PortResponse {
        input: rhs[0],
        output: rhs[n],
    }
}

/// Angular frequency seen by a trapezoidal discretization with step `dt`
/// when driven at `omega` (bilinear-transform warping).
pub fn trapezoidal_warp(omega: f64, dt: f64) -> f64 {
    2.0 / dt * (omega * dt / 2.0).tan()
}
