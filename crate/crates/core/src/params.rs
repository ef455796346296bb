//! Dimension-dependent constants of the fourth-order ODE and its cylinder
//! and sphere closed forms.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// All dimension-n constants of the ODE
/// v'''' - C2 v'' + C0 v = K_nl v^p
/// together with the cylinder closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionParams {
    pub n: u32,
    /// Nonlinear exponent (n+4)/(n-4).
    pub p: f64,
    /// Coefficient of the nonlinearity, n(n-4)(n^2-4)/16.
    pub k_nl: f64,
    /// Coefficient of v'', (n(n-4)+8)/2.
    pub c2: f64,
    /// Coefficient of v, n^2(n-4)^2/16.
    pub c0: f64,
    /// Coefficient of the linearized potential, n(n+4)(n^2-4)/16.
    pub k_lin: f64,
    /// The constant (cylindrical) solution, (n(n-4)/(n^2-4))^((n-4)/8).
    pub v_cyl: f64,
    /// Delaunay parameter of the cylindrical solution; equals v_cyl.
    pub eps_n: f64,
    /// First integral of the cylindrical solution, -(n-4)(n^2-4)/8 * (n(n-4)/(n^2-4))^(n/4).
    pub h_cyl: f64,
    /// Fundamental period of the cylindrical solution (corrected radical,
    /// see [`crate::cylinder::cyl_period`]).
    pub t_cyl: f64,
    /// Volume of the unit n-ball.
    pub omega_n: f64,
    /// Area of the unit (n-1)-sphere, n * omega_n.
    pub sphere_area: f64,
    /// Area of the unit (n-2)-sphere.
    pub sphere_area_nm2: f64,
}

/// Gamma function at m/2 for a positive integer m, built from
/// Gamma(1) = 1 and Gamma(1/2) = sqrt(pi) by the recurrence.
pub(crate) fn gamma_half(m: u32) -> f64 {
    assert!(m >= 1);
    let mut g = if m % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut k = if m % 2 == 0 { 2 } else { 1 };
    while k < m {
        g *= k as f64 / 2.0;
        k += 2;
    }
    g
}

/// Area of the unit (d-1)-sphere in R^d: 2 pi^(d/2) / Gamma(d/2).
fn sphere_surface(d: u32) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma_half(d)
}

pub fn make_params(n: i64) -> Result<DimensionParams> {
    if n <= 4 {
        return Err(Error::InvalidDimension(n));
    }
    let n = n as u32;
    let nf = n as f64;
    let ratio = nf * (nf - 4.0) / (nf * nf - 4.0);
    let v_cyl = ratio.powf((nf - 4.0) / 8.0);
    let h_cyl = -(nf - 4.0) * (nf * nf - 4.0) / 8.0 * ratio.powf(nf / 4.0);
    let omega_n = PI.powf(nf / 2.0) / gamma_half(n + 2);
    let params = DimensionParams {
        n,
        p: (nf + 4.0) / (nf - 4.0),
        k_nl: nf * (nf - 4.0) * (nf * nf - 4.0) / 16.0,
        c2: (nf * (nf - 4.0) + 8.0) / 2.0,
        c0: nf * nf * (nf - 4.0) * (nf - 4.0) / 16.0,
        k_lin: nf * (nf + 4.0) * (nf * nf - 4.0) / 16.0,
        v_cyl,
        eps_n: v_cyl,
        h_cyl,
        t_cyl: crate::cylinder::cyl_period(n),
        omega_n,
        sphere_area: sphere_surface(n),
        sphere_area_nm2: sphere_surface(n - 1),
    };
    Ok(params)
}
