//! Shot-noise tunnel junction noise model and its three-parameter fit.

use nalgebra::{Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::constants::{BOLTZMANN, ELEMENTARY_CHARGE, PLANCK};
use crate::error::{Error, Result};

/// Below this |y|, `y coth y` is evaluated as `1 + y²/3`.
const SERIES_THRESHOLD: f64 = 1e-6;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// `y coth y`, finite at `y = 0`.
pub fn x_coth_x(y: f64) -> f64 {
    if y.abs() < SERIES_THRESHOLD {
        1.0 + y * y / 3.0
    } else {
        y / y.tanh()
    }
}

/// `(y / sinh y)²`, the temperature derivative of `T·y·coth y` at fixed `yT`.
fn sech_term(y: f64) -> f64 {
    if y.abs() < SERIES_THRESHOLD {
        1.0 - y * y / 3.0
    } else if y.abs() > 700.0 {
        0.0
    } else {
        let r = y / y.sinh();
        r * r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SntjModel {
    /// Hz.
    pub frequency: f64,
    /// Hz.
    pub bandwidth: f64,
    /// K.
    pub t_electron: f64,
    /// K.
    pub t_sys: f64,
    /// Linear power gain.
    pub g_sys: f64,
}

impl SntjModel {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("frequency", self.frequency),
            ("bandwidth", self.bandwidth),
            ("t_electron", self.t_electron),
            ("t_sys", self.t_sys),
            ("g_sys", self.g_sys),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn g_sys_db(&self) -> f64 {
        linear_to_db(self.g_sys)
    }

    /// True when `k_B T ≥ h f / 5`, where the two-coth form is no longer
    /// deep in the quantum regime.
    pub fn outside_quantum_regime(&self) -> bool {
        BOLTZMANN * self.t_electron >= PLANCK * self.frequency / 5.0
    }

    /// `(eV ± hf) / (2 k_B)`, K.
    fn knee_temperatures(&self, v_bias: f64) -> (f64, f64) {
        let ev = ELEMENTARY_CHARGE * v_bias;
        let hf = PLANCK * self.frequency;
        ((ev + hf) / (2.0 * BOLTZMANN), (ev - hf) / (2.0 * BOLTZMANN))
    }

    /// Noise temperature seen at the input, K.
    pub fn noise_temperature(&self, v_bias: f64) -> f64 {
        let (plus, minus) = self.knee_temperatures(v_bias);
        let t = self.t_electron;
        0.5 * t * (x_coth_x(plus / t) + x_coth_x(minus / t)) + self.t_sys
    }
}

/// Power at the analyzer, W.
pub fn sntj_noise_power(model: &SntjModel, v_bias: f64) -> f64 {
    model.noise_temperature(v_bias) * model.bandwidth * model.g_sys * BOLTZMANN
}

/// Fit parameters: gain in dB and both temperatures in K.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SntjGuess {
    pub g_sys_db: f64,
    pub t_sys: f64,
    pub t_electron: f64,
}

impl SntjGuess {
    /// Internal coordinates `(g_db, ln T_sys, ln T)`.
    fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.g_sys_db, self.t_sys.ln(), self.t_electron.ln())
    }

    /// Gain and `T_sys` from a straight-line fit to the outer quarter of the
    /// bias range on each side, where the noise is linear in `|V|`.
    pub fn from_data(v_bias: &[f64], psd: &[f64], bandwidth: f64) -> Result<Self> {
        check_lengths(v_bias, psd)?;
        let v_max = v_bias.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let (mut sx, mut sy, mut sxx, mut sxy, mut n) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&v, &p) in v_bias.iter().zip(psd) {
            if v.abs() >= 0.75 * v_max {
                let x = v.abs();
                sx += x;
                sy += p;
                sxx += x * x;
                sxy += x * p;
                n += 1.0;
            }
        }
        let denom = n * sxx - sx * sx;
        if n < 2.0 || denom <= 0.0 {
            return Err(Error::IllConditioned("not enough bias spread to seed the fit".into()));
        }
        let slope = (n * sxy - sx * sy) / denom;
        let intercept = (sy - slope * sx) / n;
        // slope = e·BW·G/2, intercept = T_sys·BW·G·k_B
        let g = 2.0 * slope / (ELEMENTARY_CHARGE * bandwidth);
        if !(g > 0.0) {
            return Err(Error::IllConditioned("noise does not grow with bias".into()));
        }
        let t_sys = (intercept / (bandwidth * g * BOLTZMANN)).max(0.1);
        Ok(Self {
            g_sys_db: linear_to_db(g),
            t_sys,
            t_electron: 0.05,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SntjFit {
    pub model: SntjModel,
    pub g_sys_db: f64,
    /// Covariance of `(g_sys_db, t_sys, t_electron)`.
    pub covariance: [[f64; 3]; 3],
    pub std_errors: [f64; 3],
    pub residual_norm: f64,
    pub iterations: usize,
}

pub const FIT_MAX_ITERATIONS: usize = 200;
pub const FIT_STEP_TOLERANCE: f64 = 1e-9;
/// Reciprocal condition number of the scaled normal matrix below which the
/// fit is reported as ill-conditioned.
pub const FIT_MIN_RCOND: f64 = 1e-12;

fn check_lengths(v_bias: &[f64], psd: &[f64]) -> Result<()> {
    if v_bias.len() != psd.len() {
        return Err(Error::DimensionMismatch {
            left: v_bias.len(),
            right: psd.len(),
        });
    }
    Ok(())
}

/// Model value and gradient with respect to `(g_db, ln t_sys, ln t)`.
fn model_and_gradient(p: &Vector3<f64>, frequency: f64, bandwidth: f64, v: f64) -> (f64, Vector3<f64>) {
    let model = SntjModel {
        frequency,
        bandwidth,
        g_sys: db_to_linear(p[0]),
        t_sys: p[1].exp(),
        t_electron: p[2].exp(),
    };
    let scale = bandwidth * model.g_sys * BOLTZMANN;
    let value = model.noise_temperature(v) * scale;
    let (plus, minus) = model.knee_temperatures(v);
    let t = model.t_electron;
    let d_t = 0.5 * (sech_term(plus / t) + sech_term(minus / t)) * scale;
    (
        value,
        Vector3::new(
            value * std::f64::consts::LN_10 / 10.0,
            scale * model.t_sys,
            d_t * t,
        ),
    )
}

/// Levenberg–Marquardt fit of `(G_sys, T_sys, T)` with uniform weights.
/// Residuals are divided by the largest data value for conditioning; this
/// does not change the minimizer.
pub fn fit_sntj(
    v_bias: &[f64],
    psd: &[f64],
    frequency: f64,
    bandwidth: f64,
    initial_guess: SntjGuess,
) -> Result<SntjFit> {
    check_lengths(v_bias, psd)?;
    if v_bias.len() < 10 {
        return Err(Error::InvalidParameter(format!(
            "need at least 10 bias points, got {}",
            v_bias.len()
        )));
    }
    let knee = PLANCK * frequency / ELEMENTARY_CHARGE;
    let (lo, hi) = v_bias
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    if hi - lo < 2.0 * knee {
        return Err(Error::IllConditioned(format!(
            "bias range {:.3e} V is below 2hf/e = {:.3e} V; T and T_sys are degenerate",
            hi - lo,
            2.0 * knee
        )));
    }

    let scale = psd.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(scale > 0.0) {
        return Err(Error::InvalidParameter("data are all zero".into()));
    }

    let evaluate = |p: &Vector3<f64>| -> (f64, Matrix3<f64>, Vector3<f64>) {
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        let mut rss = 0.0;
        for (&v, &y) in v_bias.iter().zip(psd) {
            let (value, grad) = model_and_gradient(p, frequency, bandwidth, v);
            let r = (value - y) / scale;
            let g = grad / scale;
            rss += r * r;
            jtj += g * g.transpose();
            jtr += g * r;
        }
        (rss, jtj, jtr)
    };
    let valid = |p: &Vector3<f64>| p.iter().all(|v| v.is_finite());

    if !(initial_guess.t_sys > 0.0 && initial_guess.t_electron > 0.0) {
        return Err(Error::InvalidParameter("initial temperatures must be positive".into()));
    }
    let mut p = initial_guess.to_vector();
    let (mut rss, mut jtj, mut jtr) = evaluate(&p);
    // damping updated from the gain ratio (Nielsen's rule)
    let mut lambda = 1e-3;
    let mut nu = 2.0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < FIT_MAX_ITERATIONS {
        iterations += 1;
        let mut damped = jtj;
        for k in 0..3 {
            damped[(k, k)] += lambda * jtj[(k, k)].max(f64::MIN_POSITIVE);
        }
        let Some(step) = damped.lu().solve(&(-jtr)) else {
            lambda *= nu;
            nu *= 2.0;
            continue;
        };
        let trial = p + step;
        let trial_rss = if valid(&trial) { evaluate(&trial).0 } else { f64::INFINITY };
        let predicted = -(2.0 * step.dot(&jtr) + (step.transpose() * jtj * step)[0]);
        let rho = if predicted > 0.0 { (rss - trial_rss) / predicted } else { -1.0 };
        if rho > 1e-4 {
            // log coordinates: steps in 1 and 2 are already relative
            let relative = (step[0].abs() / p[0].abs().max(1e-12))
                .max(step[1].abs())
                .max(step[2].abs());
            p = trial;
            (rss, jtj, jtr) = evaluate(&p);
            lambda *= (1.0 - (2.0 * rho - 1.0).powi(3)).max(1.0 / 3.0);
            nu = 2.0;
            if relative < FIT_STEP_TOLERANCE {
                converged = true;
                break;
            }
        } else {
            lambda *= nu;
            nu *= 2.0;
            if lambda > 1e16 {
                // even tiny gradient steps fail to lower the residual
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::FitDivergence {
            iterations,
            residual_norm: rss.sqrt() * scale,
            last: [p[0], p[1].exp(), p[2].exp()],
        });
    }

    // covariance s² (JᵀJ)⁻¹, computed in column-scaled form
    let d = Vector3::from_fn(|k, _| jtj[(k, k)].sqrt().max(f64::MIN_POSITIVE));
    let scaled = Matrix3::from_fn(|i, j| jtj[(i, j)] / (d[i] * d[j]));
    let eig = scaled.symmetric_eigenvalues();
    let rcond = eig.min() / eig.max();
    if !(rcond > FIT_MIN_RCOND) {
        return Err(Error::IllConditioned(format!(
            "normal matrix reciprocal condition {rcond:.2e}"
        )));
    }
    let inverse = scaled
        .try_inverse()
        .ok_or_else(|| Error::IllConditioned("singular normal matrix".into()))?;
    let dof = (v_bias.len() - 3) as f64;
    let s2 = rss / dof;
    let model = SntjModel {
        frequency,
        bandwidth,
        g_sys: db_to_linear(p[0]),
        t_sys: p[1].exp(),
        t_electron: p[2].exp(),
    };
    // back from log coordinates: d(T) = T d(ln T)
    let chain = [1.0, model.t_sys, model.t_electron];
    let mut covariance = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            covariance[i][j] = s2 * inverse[(i, j)] / (d[i] * d[j]) * chain[i] * chain[j];
        }
    }
    if model.outside_quantum_regime() {
        log::warn!(
            "k_B T = {:.3e} J is not << h f = {:.3e} J at {:.4e} Hz",
            BOLTZMANN * model.t_electron,
            PLANCK * frequency,
            frequency
        );
    }
    Ok(SntjFit {
        model,
        g_sys_db: p[0],
        covariance,
        std_errors: [0, 1, 2].map(|k| covariance[k][k].sqrt()),
        residual_norm: rss.sqrt() * scale,
        iterations,
    })
}

/// Bias grid of `points` values spanning `±span_knees · hf/e`.
pub fn bias_grid(frequency: f64, span_knees: f64, points: usize) -> Vec<f64> {
    let v_max = span_knees * PLANCK * frequency / ELEMENTARY_CHARGE;
    let n = points.max(2);
    (0..n)
        .map(|i| -v_max + 2.0 * v_max * i as f64 / (n - 1) as f64)
        .collect()
}

/// Model PSD on `v_bias` with independent Gaussian multiplicative noise of
/// relative size `relative_noise`.
pub fn synthetic_psd(model: &SntjModel, v_bias: &[f64], relative_noise: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    v_bias
        .iter()
        .map(|&v| {
            let z: f64 = StandardNormal.sample(&mut rng);
            sntj_noise_power(model, v) * (1.0 + relative_noise * z)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> SntjModel {
        SntjModel {
            frequency: 3.85e9,
            bandwidth: 100e3,
            t_electron: 0.05,
            t_sys: 4.0,
            g_sys: db_to_linear(61.7),
        }
    }

    #[test]
    fn series_matches_direct_near_threshold() {
        let y = 2e-6;
        assert!((x_coth_x(y) - (1.0 + y * y / 3.0)).abs() < 1e-15);
        assert!((x_coth_x(0.9e-6) - 1.0).abs() < 1e-12);
        assert_eq!(x_coth_x(0.0), 1.0);
    }

    #[test]
    fn even_in_bias() {
        let m = model();
        for v in bias_grid(m.frequency, 5.0, 1001) {
            assert_eq!(sntj_noise_power(&m, v), sntj_noise_power(&m, -v));
        }
    }

    #[test]
    fn finite_at_the_knee() {
        let m = model();
        let knee = PLANCK * m.frequency / ELEMENTARY_CHARGE;
        assert!(sntj_noise_power(&m, knee).is_finite());
    }

    #[test]
    fn large_bias_slope() {
        let m = model();
        let (v1, v2) = (1e-3, 2e-3);
        let slope = (sntj_noise_power(&m, v2) - sntj_noise_power(&m, v1)) / (v2 - v1);
        let expected = ELEMENTARY_CHARGE * m.bandwidth * m.g_sys / 2.0;
        assert!((slope / expected - 1.0).abs() < 1e-9);
    }

    #[test]
    fn quantum_floor_at_zero_bias() {
        let m = SntjModel { t_electron: 1e-3, ..model() };
        let floor = (PLANCK * m.frequency / (2.0 * BOLTZMANN) + m.t_sys) * m.bandwidth * m.g_sys * BOLTZMANN;
        assert!((sntj_noise_power(&m, 0.0) / floor - 1.0).abs() < 1e-12);
    }

    #[test]
    fn regime_flag() {
        assert!(model().outside_quantum_regime());
        assert!(!SntjModel { t_electron: 0.01, ..model() }.outside_quantum_regime());
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let p = Vector3::new(61.7, 4f64.ln(), 0.05f64.ln());
        for v in [-3e-5, 0.0, 1.0e-5, 1.6e-5, 8e-5] {
            let (value, g) = model_and_gradient(&p, 3.85e9, 1e5, v);
            for k in 0..3 {
                let h = 1e-6 * p[k].abs();
                let mut up = p;
                let mut dn = p;
                up[k] += h;
                dn[k] -= h;
                let fd = (model_and_gradient(&up, 3.85e9, 1e5, v).0 - model_and_gradient(&dn, 3.85e9, 1e5, v).0)
                    / (2.0 * h);
                // central differences lose ~1e-16·value/h to cancellation
                let tol = 1e-6 * g[k].abs() + 1e-12 * value / h;
                assert!((fd - g[k]).abs() < tol, "v={v} k={k}: {fd} vs {}", g[k]);
            }
        }
    }

    #[test]
    fn noiseless_fit_recovers_exactly() {
        let m = model();
        let v = bias_grid(m.frequency, 5.0, 201);
        let psd = synthetic_psd(&m, &v, 0.0, 0);
        let guess = SntjGuess { g_sys_db: 60.0, t_sys: 3.0, t_electron: 0.08 };
        let fit = fit_sntj(&v, &psd, m.frequency, m.bandwidth, guess).unwrap();
        assert!((fit.g_sys_db - 61.7).abs() < 1e-8);
        assert!((fit.model.t_sys / 4.0 - 1.0).abs() < 1e-8);
        assert!((fit.model.t_electron / 0.05 - 1.0).abs() < 1e-7);
    }

    #[test]
    fn narrow_range_is_ill_conditioned() {
        let m = model();
        let v = bias_grid(m.frequency, 0.9, 50);
        let psd = synthetic_psd(&m, &v, 0.0, 0);
        let guess = SntjGuess { g_sys_db: 61.0, t_sys: 4.0, t_electron: 0.05 };
        assert!(matches!(
            fit_sntj(&v, &psd, m.frequency, m.bandwidth, guess),
            Err(Error::IllConditioned(_))
        ));
    }

    #[test]
    fn too_few_points() {
        let v = bias_grid(3.85e9, 5.0, 9);
        let psd = vec![1.0; 9];
        let guess = SntjGuess { g_sys_db: 61.0, t_sys: 4.0, t_electron: 0.05 };
        assert!(matches!(fit_sntj(&v, &psd, 3.85e9, 1e5, guess), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn guess_from_data_is_close() {
        let m = model();
        let v = bias_grid(m.frequency, 5.0, 201);
        let psd = synthetic_psd(&m, &v, 0.0, 0);
        let g = SntjGuess::from_data(&v, &psd, m.bandwidth).unwrap();
        assert!((g.g_sys_db - 61.7).abs() < 0.2);
    }
}
