//! Batch driver for the `twpa` binary: run configuration, subcommands, and
//! the output directory format.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{Profile, RunConfig};
pub use error::CliError;
use output::RunContext;

#[derive(Debug, Parser)]
#[command(name = "twpa", version, about = "SNAIL TWPA simulation and analysis runs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON run configuration. Defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides `master_seed` and `chain.rng_seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (default `runs/<command>`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "ci")]
    pub profile: Profile,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// α̃, β, γ over a flux grid.
    Coeffs(Common),
    /// 3WM and 4WM idler power vs flux.
    FluxSweep(Common),
    /// Degenerate gain vs pump phase.
    GainPhase(Common),
    /// Synthetic single-mode squeezing pipeline.
    Sms(Common),
    /// Synthetic two-mode squeezing pipeline.
    Tms(Common),
    /// Fit an SNTJ noise-vs-bias curve.
    SntjFit {
        #[command(flatten)]
        common: Common,
        /// CSV with `v_bias,psd` columns; overrides `sntj_fit.input`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Quadrature normalization factor.
    Normalize(Common),
    /// Input line attenuation.
    Attenuation(Common),
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Command::Coeffs(c) => ("coeffs", c),
            Command::FluxSweep(c) => ("flux-sweep", c),
            Command::GainPhase(c) => ("gain-phase", c),
            Command::Sms(c) => ("sms", c),
            Command::Tms(c) => ("tms", c),
            Command::SntjFit { common, .. } => ("sntj-fit", common),
            Command::Normalize(c) => ("normalize", c),
            Command::Attenuation(c) => ("attenuation", c),
        }
    }
}

/// Load, resolve and execute. Returns the path of the result file.
pub fn run(command: &Command) -> Result<PathBuf, CliError> {
    let (name, common) = command.parts();
    let mut config = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Command::SntjFit { input: Some(input), .. } = command {
        config.sntj_fit.input = Some(input.clone());
    }
    let config = config.resolve(common.profile, common.seed)?;
    let ctx = RunContext::new(name, common.profile, config, common.out.clone());
    log::info!("{name}: writing to {}", ctx.out_dir.display());
    match command {
        Command::Coeffs(_) => commands::coeffs(&ctx),
        Command::FluxSweep(_) => commands::flux_sweep(&ctx),
        Command::GainPhase(_) => commands::gain_phase(&ctx),
        Command::Sms(_) => commands::sms(&ctx),
        Command::Tms(_) => commands::tms(&ctx),
        Command::SntjFit { .. } => commands::sntj_fit(&ctx),
        Command::Normalize(_) => commands::normalize(&ctx),
        Command::Attenuation(_) => commands::attenuation(&ctx),
    }
}
