//! Fixed-step trapezoidal integration of the SNAIL ladder.
//!
//! Nodes `0..=N`: node 0 is the input port, node `k` sits between cell `k`
//! and cell `k + 1`. Cell `k` (1-based) is a SNAIL in parallel with `c_j`
//! from node `k - 1` to node `k`, plus `c_g` in series with its ESR from
//! node `k` to ground. The input is a Norton source (tone current in
//! parallel with `z0`) and node `N` is terminated by `z0`.
//!
//! Unknowns per step are the node voltages. Each branch carries its phase
//! deviation `delta` from the working point, integrated with the same
//! trapezoidal rule, and the SNAIL current is evaluated from the exact
//! current–phase relation. KCL gives a tridiagonal system solved by Newton
//! iteration with the Thomas algorithm.

use serde::{Deserialize, Serialize};

use super::chain::RealizedChain;
use super::drive::DriveSpec;
use crate::constants::REDUCED_FLUX_QUANTUM;
use crate::error::{Error, Result};

const NEWTON_MAX_ITERATIONS: usize = 40;
const NEWTON_RELATIVE_TOLERANCE: f64 = 1e-11;
const NEWTON_ABSOLUTE_TOLERANCE: f64 = 1e-21;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMetadata {
    pub chain: super::chain::ChainConfig,
    pub flux: f64,
    pub drive: DriveSpec,
    pub esr: f64,
}

/// Port voltages sampled at `t = dt, 2dt, …, duration`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeTrace {
    pub dt: f64,
    /// Voltage across the output termination, V.
    pub samples: Vec<f64>,
    /// Voltage at the input port node, V.
    pub input_samples: Vec<f64>,
    pub metadata: TraceMetadata,
}

impl TimeTrace {
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.dt
    }

    pub fn time(&self, index: usize) -> f64 {
        (index + 1) as f64 * self.dt
    }
}

struct Branch {
    phi_star: f64,
    third_star: f64,
    small: f64,
    large: f64,
    offset: f64,
}

impl Branch {
    /// Current and dI/d(delta) at phase deviation `delta`.
    #[inline(always)]
    fn current(&self, delta: f64) -> (f64, f64) {
        let (s1, c1) = (self.phi_star + delta).sin_cos();
        let (s3, c3) = (self.third_star + delta / 3.0).sin_cos();
        (
            self.small * s1 + self.large * s3 - self.offset,
            self.small * c1 + self.large / 3.0 * c3,
        )
    }
}

/// Integrate the ladder under `drive`.
pub fn simulate_transient(chain: &RealizedChain, drive: &DriveSpec) -> Result<TimeTrace> {
    drive.validate()?;
    let cfg = &chain.config;
    let n = chain.cells.len();
    let h = drive.dt;
    let steps = drive.total_steps();

    let branches: Vec<Branch> = chain
        .cells
        .iter()
        .map(|cell| {
            let p = &cell.snail;
            let phi_star = cell.coefficients.phi_star;
            let third_star = (phi_star - p.phi_ext) / 3.0;
            let small = p.r * p.i_c;
            let large = p.i_c;
            Branch {
                phi_star,
                third_star,
                small,
                large,
                offset: small * phi_star.sin() + large * third_star.sin(),
            }
        })
        .collect();

    // trapezoidal phase update: delta' = delta + kappa * (u' + u)
    let kappa = h / (2.0 * REDUCED_FLUX_QUANTUM);
    let cj_conductance = 2.0 * cfg.c_j / h;
    let cap_step = h / (2.0 * cfg.c_g);
    let shunt_conductance = 1.0 / (chain.esr + cap_step);
    let port = 1.0 / cfg.z0;

    // state at t_n
    let mut v = vec![0.0; n + 1];
    let mut v_prev = vec![0.0; n + 1];
    let mut delta = vec![0.0; n];
    let mut i_cj = vec![0.0; n];
    let mut i_g = vec![0.0; n + 1];
    let mut v_cap = vec![0.0; n + 1];

    // Newton workspace
    let mut trial = vec![0.0; n + 1];
    let mut residual = vec![0.0; n + 1];
    let mut diag = vec![0.0; n + 1];
    let mut off = vec![0.0; n];
    let mut branch_current = vec![0.0; n];
    let mut scratch = vec![0.0; n + 1];

    let mut samples = Vec::with_capacity(steps);
    let mut input_samples = Vec::with_capacity(steps);

    for step in 0..steps {
        let source = drive.source_current_at_step(step);

        for k in 0..=n {
            trial[k] = 2.0 * v[k] - v_prev[k];
        }

        let mut converged = false;
        let mut last_update = f64::INFINITY;
        for _ in 0..NEWTON_MAX_ITERATIONS {
            // branch currents and conductances
            for j in 0..n {
                let u_new = trial[j] - trial[j + 1];
                let u_old = v[j] - v[j + 1];
                let d = delta[j] + kappa * (u_new + u_old);
                let (current, slope) = branches[j].current(d);
                branch_current[j] = current + cj_conductance * (u_new - u_old) - i_cj[j];
                off[j] = -(kappa * slope + cj_conductance);
            }
            // KCL residual and tridiagonal Jacobian
            residual[0] = port * trial[0] + branch_current[0] - source;
            diag[0] = port - off[0];
            for k in 1..=n {
                let shunt = shunt_conductance * (trial[k] - v_cap[k] - cap_step * i_g[k]);
                let mut r = -branch_current[k - 1] + shunt;
                let mut d = -off[k - 1] + shunt_conductance;
                if k < n {
                    r += branch_current[k];
                    d -= off[k];
                } else {
                    r += port * trial[k];
                    d += port;
                }
                residual[k] = r;
                diag[k] = d;
            }

            solve_symmetric_tridiagonal(&mut diag, &off, &mut residual, &mut scratch);

            let mut update: f64 = 0.0;
            let mut scale: f64 = 0.0;
            for k in 0..=n {
                trial[k] -= residual[k];
                update = update.max(residual[k].abs());
                scale = scale.max(trial[k].abs());
            }
            last_update = update;
            if !update.is_finite() {
                break;
            }
            if update <= NEWTON_ABSOLUTE_TOLERANCE + NEWTON_RELATIVE_TOLERANCE * scale {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NewtonDivergence {
                step,
                update: last_update,
            });
        }

        // commit t_{n+1}
        for j in 0..n {
            let u_new = trial[j] - trial[j + 1];
            let u_old = v[j] - v[j + 1];
            delta[j] += kappa * (u_new + u_old);
            i_cj[j] = cj_conductance * (u_new - u_old) - i_cj[j];
        }
        for k in 1..=n {
            let current = shunt_conductance * (trial[k] - v_cap[k] - cap_step * i_g[k]);
            v_cap[k] += cap_step * (current + i_g[k]);
            i_g[k] = current;
        }
        std::mem::swap(&mut v_prev, &mut v);
        v.copy_from_slice(&trial);

        samples.push(v[n]);
        input_samples.push(v[0]);
    }

    Ok(TimeTrace {
        dt: h,
        samples,
        input_samples,
        metadata: TraceMetadata {
            chain: cfg.clone(),
            flux: chain.flux,
            drive: drive.clone(),
            esr: chain.esr,
        },
    })
}

/// Solve `A x = b` in place for symmetric tridiagonal `A` with main diagonal
/// `diag` (overwritten) and off-diagonal `off`. `b` is replaced by `x`.
fn solve_symmetric_tridiagonal(diag: &mut [f64], off: &[f64], b: &mut [f64], c_prime: &mut [f64]) {
    let n = diag.len();
    c_prime[0] = off.first().copied().unwrap_or(0.0) / diag[0];
    b[0] /= diag[0];
    for i in 1..n {
        let sub = off[i - 1];
        let denom = diag[i] - sub * c_prime[i - 1];
        if i < n - 1 {
            c_prime[i] = off[i] / denom;
        }
        b[i] = (b[i] - sub * b[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        b[i] -= c_prime[i] * b[i + 1];
    }
}
