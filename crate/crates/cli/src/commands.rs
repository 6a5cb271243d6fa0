//! One function per subcommand. Each reads the resolved config from the
//! context, writes its result file and `meta.json`, and returns the path
//! of the result.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use twpa_core::calibration::insertion::LadderCell;
use twpa_core::calibration::sntj::{bias_grid, db_to_linear, linear_to_db, synthetic_psd};
use twpa_core::calibration::{
    fit_sntj, input_attenuation, insertion_loss_from_tan_delta, normalization_factor,
    NormalizationParams, SntjGuess, SntjModel,
};
use twpa_core::circuit::{degenerate_gain_vs_phase, flux_sweep_with_setup};
use twpa_core::gaussian::states::{squeeze_parameter_for_db, squeezed_vacuum, two_mode_squeezed};
use twpa_core::gaussian::{
    logarithmic_negativity, principal_squeezing, reconstruct, squeezing_db, CovMatrix,
    SyntheticMeasurement,
};
use twpa_core::{coefficient_sweep, sweep_features};

use crate::config::{self, NormalizeConfig, PipelineConfig, RunConfig, PHI_1, PHI_2};
use crate::error::CliError;
use crate::output::RunContext;

pub fn coeffs(ctx: &RunContext) -> Result<PathBuf, CliError> {
    let c = &ctx.config.coeffs;
    let grid = config::coeff_grid(c)?;
    let rows = coefficient_sweep(c.r, c.i_c, &grid)
        .map_err(|e| CliError::config(format!("coeffs: {e}")))?;
    let features = sweep_features(&grid, &rows)?;
    let table: Vec<Vec<f64>> = grid
        .iter()
        .zip(&rows)
        .map(|(f, k)| vec![*f, k.phi_star, k.alpha_tilde, k.beta, k.gamma, k.inductance])
        .collect();
    let path = ctx.write_csv(
        &["flux", "phi_star", "alpha_tilde", "beta", "gamma", "inductance"],
        &table,
    )?;
    ctx.write_meta(json!({ "features": features }))?;
    Ok(path)
}

fn nearest(grid: &[f64], x: f64) -> usize {
    let mut best = 0;
    for (i, g) in grid.iter().enumerate() {
        if (g - x).abs() < (grid[best] - x).abs() {
            best = i;
        }
    }
    best
}

pub fn flux_sweep(ctx: &RunContext) -> Result<PathBuf, CliError> {
    let grid = config::grid(&ctx.config.flux_sweep.flux, "flux_sweep.flux")?;
    log::info!("flux sweep: {} points, {} cells", grid.len(), ctx.config.chain().n_cells);
    let points = flux_sweep_with_setup(ctx.config.chain(), ctx.config.mixing(), &grid)?;
    let rows: Vec<Vec<f64>> = points
        .iter()
        .map(|p| vec![p.flux, p.psd_3wm_idler, p.psd_4wm_idler])
        .collect();
    let path = ctx.write_csv(&["flux", "psd_3wm_idler_dbm", "psd_4wm_idler_dbm"], &rows)?;
    let deepest_4wm = points
        .iter()
        .min_by(|a, b| a.psd_4wm_idler.total_cmp(&b.psd_4wm_idler))
        .map(|p| p.flux);
    ctx.write_meta(json!({
        "markers": {
            "phi_1": { "flux": PHI_1, "nearest_row": nearest(&grid, PHI_1) },
            "phi_2": { "flux": PHI_2, "nearest_row": nearest(&grid, PHI_2) },
        },
        "deepest_4wm_idler_flux": deepest_4wm,
    }))?;
    Ok(path)
}

pub fn gain_phase(ctx: &RunContext) -> Result<PathBuf, CliError> {
    let phases = config::grid(&ctx.config.gain_phase.phase, "gain_phase.phase")?;
    let flux = ctx.config.gain_phase.flux;
    log::info!("gain vs phase at {flux} Φ₀: {} phases", phases.len());
    let points = degenerate_gain_vs_phase(ctx.config.chain(), flux, ctx.config.mixing(), &phases)?;
    let rows: Vec<Vec<f64>> = points.iter().map(|p| vec![p.pump_phase, p.gain_db]).collect();
    let path = ctx.write_csv(&["pump_phase", "gain_db"], &rows)?;
    let max = points.iter().map(|p| p.gain_db).fold(f64::NEG_INFINITY, f64::max);
    let min = points.iter().map(|p| p.gain_db).fold(f64::INFINITY, f64::min);
    ctx.write_meta(json!({
        "flux": flux,
        "gain_max_db": max,
        "gain_min_db": min,
        "contrast_db": max - min,
    }))?;
    Ok(path)
}

fn normalization_params(chain: &twpa_core::circuit::ChainConfig, n: &NormalizeConfig) -> Result<(NormalizationParams, f64), CliError> {
    if !(n.eta_fraction_of_chain > 0.0 && n.eta_fraction_of_chain <= 1.0) {
        return Err(CliError::config(format!(
            "normalize.eta_fraction_of_chain must be in (0, 1], got {}",
            n.eta_fraction_of_chain
        )));
    }
    let eta = match n.eta {
        Some(eta) => eta,
        None => {
            let cell = LadderCell::nominal(chain, n.flux)
                .map_err(|e| CliError::config(format!("normalize: {e}")))?;
            let full = insertion_loss_from_tan_delta(chain.tan_delta, chain.n_cells, n.f_acq, &cell);
            full.powf(n.eta_fraction_of_chain)
        }
    };
    let params = NormalizationParams {
        eta,
        g_sys: db_to_linear(n.g_sys_db),
        z0: n.z0,
        f_acq: n.f_acq,
        t_int: n.t_int,
        epsilon: n.epsilon,
        gain_correction_db: n.gain_correction_db,
    };
    let upsilon = normalization_factor(&params).map_err(|e| CliError::config(format!("normalize: {e}")))?;
    Ok((params, upsilon))
}

fn measurement(config: &RunConfig, p: &PipelineConfig) -> Result<SyntheticMeasurement, CliError> {
    let upsilon = match p.upsilon {
        Some(u) => u,
        None => normalization_params(config.chain(), &config.normalize)?.1,
    };
    let n_rep = p.n_rep.unwrap_or(0);
    if n_rep < 2 {
        return Err(CliError::config(format!("pipeline.n_rep must be at least 2, got {n_rep}")));
    }
    if !(p.n_add >= 0.0 && upsilon > 0.0) {
        return Err(CliError::config("pipeline: n_add must be ≥ 0 and upsilon > 0"));
    }
    Ok(SyntheticMeasurement {
        n_rep,
        n_add: p.n_add,
        seed: config.seed(),
        upsilon,
        gain_drift_db: p.gain_drift_db,
        gain_uncertainty_db: p.gain_uncertainty_db,
    })
}

#[derive(Serialize)]
struct SmsPoint {
    pump_phase: f64,
    s_x_db: Option<f64>,
    s_p_db: Option<f64>,
    s_min_db: Option<f64>,
    s_max_db: Option<f64>,
    squeezed_angle: Option<f64>,
    physical: bool,
    covariance: CovMatrix,
}

pub fn sms(ctx: &RunContext) -> Result<PathBuf, CliError> {
    let c = &ctx.config.sms;
    let phases = config::grid(&c.phase, "sms.phase")?;
    let m = measurement(&ctx.config, &c.pipeline)?;
    let r = squeeze_parameter_for_db(c.target_db);
    let mut points = Vec::with_capacity(phases.len());
    for (k, &theta) in phases.iter().enumerate() {
        log::info!("sms: phase {}/{}", k + 1, phases.len());
        let target = squeezed_vacuum(r, theta / 2.0)?;
        let rec = reconstruct(&target, &m, k as u64)?;
        let sq = squeezing_db(&rec.state).ok();
        let principal = principal_squeezing(&rec.state).ok();
        points.push(SmsPoint {
            pump_phase: theta,
            s_x_db: sq.map(|s| s.0),
            s_p_db: sq.map(|s| s.1),
            s_min_db: principal.map(|p| p.s_min_db),
            s_max_db: principal.map(|p| p.s_max_db),
            squeezed_angle: principal.map(|p| p.angle),
            physical: rec.physical,
            covariance: rec.state,
        });
    }
    let path = ctx.write_json(&json!({
        "target_db": c.target_db,
        "squeeze_parameter": r,
        "measurement": m,
        "points": points,
    }))?;
    ctx.write_meta(json!({ "upsilon": m.upsilon }))?;
    Ok(path)
}

#[derive(Serialize)]
struct TmsPoint {
    r: f64,
    e_n: Option<f64>,
    nu_minus: Option<f64>,
    /// Logarithmic negativity of the generated state before measurement.
    e_n_expected: f64,
    physical: bool,
    covariance: CovMatrix,
}

pub fn tms(ctx: &RunContext) -> Result<PathBuf, CliError> {
    let c = &ctx.config.tms;
    let grid = config::grid(&c.r, "tms.r")?;
    if grid.iter().any(|&r| r < 0.0) || c.n_th < 0.0 {
        return Err(CliError::config("tms: r and n_th must be non-negative"));
    }
    let m = measurement(&ctx.config, &c.pipeline)?;
    let mut points = Vec::with_capacity(grid.len());
    for (k, &r) in grid.iter().enumerate() {
        log::info!("tms: r = {r} ({}/{})", k + 1, grid.len());
        let target = two_mode_squeezed(r, c.n_th)?;
        let expected = logarithmic_negativity(&target)?;
        let rec = reconstruct(&target, &m, k as u64)?;
        let n = logarithmic_negativity(&rec.state).ok();
        points.push(TmsPoint {
            r,
            e_n: n.map(|n| n.e_n),
            nu_minus: n.map(|n| n.nu_minus),
            e_n_expected: expected.e_n,
            physical: rec.physical,
            covariance: rec.state,
        });
    }
    let path = ctx.write_json(&json!({
        "n_th": c.n_th,
        "measurement": m,
        "points": points,
    }))?;
    ctx.write_meta(json!({ "upsilon": m.upsilon }))?;
    Ok(path)
}

/// `v_bias,psd` columns; `#` lines are comments.
pub fn read_sntj_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::config(format!("{}: missing column {name}", path.display())))
    };
    let (iv, ip) = (column("v_bias")?, column("psd")?);
    let (mut v, mut p) = (Vec::new(), Vec::new());
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let parse = |i: usize| -> Result<f64, CliError> {
            rec.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| CliError::config(format!("{}: row {row}: bad number", path.display())))
        };
        v.push(parse(iv)?);
        p.push(parse(ip)?);
    }
    Ok((v, p))
}

pub fn sntj_fit(ctx: &RunContext) -> Result<PathBuf, CliError> {
    let c = &ctx.config.sntj_fit;
    let (v, psd, source) = match &c.input {
        Some(path) => {
            let (v, p) = read_sntj_csv(path)?;
            (v, p, json!({ "file": path }))
        }
        None => {
            let s = &c.synthetic;
            let model = SntjModel {
                frequency: c.frequency,
                bandwidth: c.bandwidth,
                t_electron: s.t_electron,
                t_sys: s.t_sys,
                g_sys: db_to_linear(s.g_sys_db),
            };
            model.validate().map_err(|e| CliError::config(format!("sntj_fit.synthetic: {e}")))?;
            let v = bias_grid(c.frequency, s.span_knees, s.points.unwrap_or(10_001));
            let p = synthetic_psd(&model, &v, s.relative_noise, ctx.config.seed());
            (v, p, json!({ "synthetic": s }))
        }
    };
    let guess = match c.initial_guess {
        Some(g) => g,
        None => SntjGuess::from_data(&v, &psd, c.bandwidth)?,
    };
    let fit = fit_sntj(&v, &psd, c.frequency, c.bandwidth, guess)?;
    let path = ctx.write_json(&json!({
        "source": source,
        "points": v.len(),
        "initial_guess": guess,
        "fit": fit,
    }))?;
    ctx.write_meta(json!({ "g_sys_db": fit.g_sys_db }))?;
    Ok(path)
}

pub fn normalize(ctx: &RunContext) -> Result<PathBuf, CliError> {
    let (params, upsilon) = normalization_params(ctx.config.chain(), &ctx.config.normalize)?;
    let path = ctx.write_json(&json!({
        "params": params,
        "eta_db": linear_to_db(params.eta),
        "corrected_gain_db": linear_to_db(params.corrected_gain()),
        "upsilon": upsilon,
    }))?;
    ctx.write_meta(json!({}))?;
    Ok(path)
}

pub fn attenuation(ctx: &RunContext) -> Result<PathBuf, CliError> {
    let a = &ctx.config.attenuation;
    let s21 = a
        .s21_off_db
        .ok_or_else(|| CliError::config("attenuation.s21_off_db is required"))?;
    let eta_db = match a.eta_db {
        Some(e) => e,
        None => linear_to_db(normalization_params(ctx.config.chain(), &ctx.config.normalize)?.0.eta),
    };
    let ledger = input_attenuation(s21, eta_db, a.g_sys_db);
    let path = ctx.write_json(&ledger)?;
    ctx.write_meta(json!({}))?;
    Ok(path)
}
