//! Oracles and helpers shared by the integration tests. Each oracle is an
//! independent computation, not a call into the code under test.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nalgebra::DMatrix;
use twpa_core::gaussian::CovMatrix;

pub fn twpa() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_twpa"));
    c.env("RUST_LOG", "warn");
    c
}

pub fn run(args: &[&str]) -> Output {
    twpa().args(args).output().expect("binary runs")
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// γ at zero flux worked out by hand from the Taylor expansion of the
/// current–phase relation around φ* = 0.
pub fn gamma_at_zero_flux(r: f64) -> f64 {
    (r + 1.0 / 27.0) / (r + 1.0 / 3.0) / 6.0
}

/// Smallest symplectic eigenvalue of the partial transpose by brute force:
/// flip p of the second mode, then take the moduli of the eigenvalues of
/// `Ω σ`, which come in ± i ν pairs.
pub fn nu_minus_brute_force(sigma: &CovMatrix) -> f64 {
    assert_eq!(sigma.dim, 4);
    let flip = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, 1.0, -1.0]));
    let pt = &flip * sigma.to_matrix() * &flip;
    let mut omega = DMatrix::zeros(4, 4);
    for k in 0..2 {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    (omega * pt)
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(f64::INFINITY, f64::min)
}
