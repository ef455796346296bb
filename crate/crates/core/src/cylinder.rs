//! Closed-form reference values for the cylindrical and spherical
//! solutions. Every other module validates against these.

use crate::ode::CylState;
use std::f64::consts::PI;

/// Spherical-harmonic eigenvalue lambda = k(n-2+k).
pub fn lambda(n: u32, k: u32) -> f64 {
    let (n, k) = (n as f64, k as f64);
    k * (n - 2.0 + k)
}

/// The two squared exponents of the constant-coefficient mode-k linearized
/// ODE at the cylinder:
///
/// mu^2, mu~^2 = ( (n(n-4)+8+4 lambda)/2 +- sqrt(n^4/4 - 16(n-1-lambda)) ) / 2.
pub fn cyl_mu_squared(n: u32, k: u32) -> (f64, f64) {
    let lam = lambda(n, k);
    let nf = n as f64;
    let half_c2 = (nf * (nf - 4.0) + 8.0 + 4.0 * lam) / 2.0;
    let disc = (nf.powi(4) / 4.0 - 16.0 * (nf - 1.0 - lam)).sqrt();
    (0.5 * (half_c2 + disc), 0.5 * (half_c2 - disc))
}

/// Fundamental period of the cylindrical solution, 2 pi / sqrt(-mu~_0^2).
///
/// Note: the closed form below carries "- n(n-4) - 8" under the radical.
/// Expanding 2 pi / sqrt(-mu~_0^2) from [`cyl_mu_squared`] forces this sign;
/// a "+8" variant circulates in the literature but is inconsistent with the
/// mode expansion. [`cyl_period_plus8_variant`] exposes the other variant
/// so the discrepancy stays auditable; all numerics consume this one.
pub fn cyl_period(n: u32) -> f64 {
    let (_, mut0_sq) = cyl_mu_squared(n, 0);
    debug_assert!(mut0_sq < 0.0);
    2.0 * PI / (-mut0_sq).sqrt()
}

/// The uncorrected "+8" variant of the period radical. Kept only for
/// comparison; do not use in computations.
pub fn cyl_period_plus8_variant(n: u32) -> f64 {
    let nf = n as f64;
    let inner = (nf.powi(4) - 64.0 * nf + 64.0).sqrt() - nf * (nf - 4.0) + 8.0;
    2.0 * PI / (0.5 * inner.sqrt())
}

/// Indicial roots of the mode-k constant-coefficient operator:
/// k = 0 gives {0 (double), +-sqrt(mu_0^2)}; k >= 1 gives +-sqrt of both squares.
pub fn cyl_indicial(n: u32, k: u32) -> Vec<f64> {
    let (mu_sq, mut_sq) = cyl_mu_squared(n, k);
    let mu = mu_sq.sqrt();
    if k == 0 {
        // mu~_0^2 < 0: purely oscillatory pair, growth rate 0 with multiplicity 2.
        vec![-mu, 0.0, 0.0, mu]
    } else {
        let mt = mut_sq.sqrt();
        vec![-mu, -mt, mt, mu]
    }
}

/// 4-jet of the spherical solution (cosh t)^((4-n)/2).
pub fn sph_state(n: u32, t: f64) -> CylState {
    let c = (4.0 - n as f64) / 2.0;
    let u = t.tanh();
    let sech2 = 1.0 - u * u;
    let v = t.cosh().powf(c);
    let v1 = c * v * u;
    // v'' = v g with g = c + c(c-1) u^2.
    let g = c + c * (c - 1.0) * u * u;
    let v2 = v * g;
    // v''' = v' g + v g' with g' = 2 c (c-1) u sech^2.
    let v3 = v1 * g + v * 2.0 * c * (c - 1.0) * u * sech2;
    CylState::new(t, v, v1, v2, v3)
}
