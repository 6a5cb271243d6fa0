//! Transient simulation of the SNAIL ladder and spectral read-out.

pub mod chain;
pub mod drive;
pub mod linear;
pub mod spectrum;
pub mod sweep;
pub mod transient;

pub use chain::{build_chain, ChainConfig, FluxPolarity, RealizedChain};
pub use drive::{DriveSpec, MixingSetup, Tone};
pub use spectrum::{extract_spectrum, Spectrum};
pub use sweep::{
    degenerate_gain_vs_phase, flux_sweep_idler, flux_sweep_with_setup, four_wave_idler,
    locate_four_wave_notch, GainPoint, IdlerPoint, NotchSearch,
};
pub use transient::{simulate_transient, TimeTrace};
