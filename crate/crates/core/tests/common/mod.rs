//! Independent oracles for the integration tests.

#![allow(dead_code)]

use nalgebra::{Complex, DMatrix, DVector};
use twpa_core::gaussian::CovMatrix;

type C64 = Complex<f64>;

const PHI0: f64 = 6.626_070_15e-34 / (2.0 * 1.602_176_634e-19);

/// Working-point phase of `r sin φ + sin((φ − φ_ext)/3) = 0` by plain
/// bisection on `u = (φ − φ_ext)/3 ∈ [−asin r, asin r]`.
pub fn phi_star_bisection(r: f64, phi_ext: f64) -> f64 {
    let g = |u: f64| r * (3.0 * u + phi_ext).sin() + u.sin();
    let (mut lo, mut hi) = (-r.asin(), r.asin());
    if g(lo) > 0.0 {
        std::mem::swap(&mut lo, &mut hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    3.0 * 0.5 * (lo + hi) + phi_ext
}

/// Small-signal SNAIL inductance, H.
pub fn snail_inductance(r: f64, i_c: f64, flux: f64) -> f64 {
    let phi_ext = 2.0 * std::f64::consts::PI * flux;
    let phi = phi_star_bisection(r, phi_ext);
    let alpha = r * phi.cos() + ((phi - phi_ext) / 3.0).cos() / 3.0;
    PHI0 / (2.0 * std::f64::consts::PI * alpha * i_c)
}

pub struct Ladder {
    pub n_cells: usize,
    pub inductance: f64,
    pub c_j: f64,
    pub c_g: f64,
    pub esr: f64,
    pub z0: f64,
}

/// Output-port voltage per ampere of source current, from a dense nodal
/// solve of the uniform ladder (Norton source with `z0` at node 0, `z0` load
/// at node N).
pub fn ladder_transfer(l: &Ladder, omega: f64) -> C64 {
    let j = C64::new(0.0, 1.0);
    let n = l.n_cells + 1;
    let yb = 1.0 / (j * omega * l.inductance) + j * omega * l.c_j;
    let ys = 1.0 / (C64::new(l.esr, 0.0) + 1.0 / (j * omega * l.c_g));
    let yp = C64::new(1.0 / l.z0, 0.0);
    let mut y = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for k in 0..l.n_cells {
        y[(k, k)] += yb;
        y[(k + 1, k + 1)] += yb;
        y[(k, k + 1)] -= yb;
        y[(k + 1, k)] -= yb;
        y[(k + 1, k + 1)] += ys;
    }
    y[(0, 0)] += yp;
    y[(n - 1, n - 1)] += yp;
    let mut rhs = DVector::from_element(n, C64::new(0.0, 0.0));
    rhs[0] = C64::new(1.0, 0.0);
    let v = y.lu().solve(&rhs).expect("nonsingular nodal matrix");
    v[n - 1]
}

/// Smallest symplectic eigenvalue of the partial transpose, by taking the
/// moduli of the eigenvalues of `Ω σ^{T_B}`.
pub fn nu_minus_brute_force(sigma: &CovMatrix) -> f64 {
    let flip = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 1.0, -1.0]));
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

/// Local symplectic map: rotation by `theta` then squeezing by `s` on each
/// mode independently.
pub fn local_symplectic(theta: [f64; 2], s: [f64; 2]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(4, 4);
    for k in 0..2 {
        let (sn, cs) = theta[k].sin_cos();
        let (a, b) = ((-s[k]).exp(), s[k].exp());
        m[(2 * k, 2 * k)] = a * cs;
        m[(2 * k, 2 * k + 1)] = a * sn;
        m[(2 * k + 1, 2 * k)] = -b * sn;
        m[(2 * k + 1, 2 * k + 1)] = b * cs;
    }
    m
}

pub fn transform(sigma: &CovMatrix, s: &DMatrix<f64>) -> CovMatrix {
    CovMatrix::from_matrix(&(s * sigma.to_matrix() * s.transpose())).unwrap()
}
