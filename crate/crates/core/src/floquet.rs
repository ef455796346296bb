//! Fourier-mode linearized operators about a Delaunay profile, their
//! monodromy matrices, indicial roots, and the explicit Jacobi fields.

use crate::cylinder;
use crate::delaunay::DelaunayProfile;
use crate::error::{Error, Result};
use crate::ode::{integrate_system, pos_pow};
use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Spherical-harmonic degree and its Laplacian eigenvalue k(n-2+k).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierMode {
    pub degree: u32,
    pub lambda: f64,
}

impl FourierMode {
    pub fn new(n: u32, degree: u32) -> Self {
        Self { degree, lambda: cylinder::lambda(n, degree) }
    }
}

/// The mode-k linearized operator
/// L w = w'''' + c2 w'' + c0(t) w
/// with c2 = -(n(n-4)+8+4 lambda)/2 and
/// c0(t) = C0 + (n(n-4)/2) lambda + lambda^2 - K_lin v_eps(t)^(8/(n-4)).
#[derive(Clone)]
pub struct ModeOperator<'a> {
    pub profile: &'a DelaunayProfile,
    pub mode: FourierMode,
    /// Fourth-derivative coefficient; always 1, kept for explicitness.
    pub c4: f64,
    /// Constant second-derivative coefficient (negative).
    pub c2: f64,
    /// Constant part of the zeroth-order coefficient.
    pub c0_const: f64,
}

/// Build the coefficient triple of L_{eps,j} for a profile and mode.
pub fn linear_potential<'a>(profile: &'a DelaunayProfile, mode: FourierMode) -> ModeOperator<'a> {
    let p = &profile.params;
    let n = p.n as f64;
    ModeOperator {
        profile,
        mode,
        c4: 1.0,
        c2: -(n * (n - 4.0) + 8.0 + 4.0 * mode.lambda) / 2.0,
        c0_const: p.c0 + n * (n - 4.0) / 2.0 * mode.lambda + mode.lambda * mode.lambda,
    }
}

impl ModeOperator<'_> {
    /// Time-dependent zeroth-order coefficient.
    pub fn c0(&self, t: f64) -> f64 {
        let p = &self.profile.params;
        let n = p.n as f64;
        self.c0_const - p.k_lin * pos_pow(self.profile.eval(t, 0), 8.0 / (n - 4.0))
    }

    /// Apply L to a 4-jet-plus-fourth-derivative (w, w', w'', w''', w'''').
    pub fn apply(&self, t: f64, jet: &[f64; 5]) -> f64 {
        self.c4 * jet[4] + self.c2 * jet[2] + self.c0(t) * jet[0]
    }
}

/// Period map of the linearized mode ODE on 4-jets, with its spectrum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonodromyResult {
    pub n: u32,
    pub epsilon: f64,
    pub mode: FourierMode,
    pub period: f64,
    /// Row-major period map.
    pub a: [[f64; 4]; 4],
    pub det: f64,
    /// Eigenvalues as (re, im) pairs.
    pub eigenvalues: [(f64, f64); 4],
    /// Per-unit-t growth rates ln|mu|/T, ascending.
    pub indicial_roots: [f64; 4],
    /// Count of eigenvalues within tol_unit of the unit circle.
    pub unit_multiplicity: usize,
    pub tol_unit: f64,
}

impl MonodromyResult {
    pub fn matrix(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|i, j| self.a[i][j])
    }

    pub fn eigs(&self) -> [Complex64; 4] {
        self.eigenvalues.map(|(re, im)| Complex64::new(re, im))
    }
}

/// Subintervals of the period map product. Keeps every factor mildly
/// conditioned so the Wronskian (det) does not absorb the error amplified
/// along the unstable direction.
const MONO_SUBINTERVALS: usize = 64;

/// Integrate the four canonical basis jets of L w = 0 over one period,
/// subinterval by subinterval, and assemble the period map as the product
/// of the transition matrices. The determinant is taken as the product of
/// the factor determinants: each factor has norm e^{O(T/N)} and its
/// Wronskian is exact to the integration tolerance, while the determinant
/// of the assembled product would be polluted by the e^{mu_0 T} growth.
pub fn monodromy(profile: &DelaunayProfile, mode: FourierMode, tol: f64) -> Result<MonodromyResult> {
    let op = linear_potential(profile, mode);
    let a2 = -op.c2; // w'''' = a2 w'' - c0(t) w
    let f = |t: f64, y: &[f64; 4]| -> Result<[f64; 4]> {
        Ok([y[1], y[2], y[3], a2 * y[2] - op.c0(t) * y[0]])
    };
    let nsub = MONO_SUBINTERVALS;
    let mut a = Matrix4::identity();
    let mut ainv = Matrix4::identity();
    let mut det = 1.0f64;
    for i in 0..nsub {
        let t0 = profile.period * i as f64 / nsub as f64;
        let t1 = profile.period * (i + 1) as f64 / nsub as f64;
        let mut cols = [[0.0f64; 4]; 4];
        for (j, col) in cols.iter_mut().enumerate() {
            let mut y0 = [0.0; 4];
            y0[j] = 1.0;
            let (samples, _) = integrate_system(&f, t0, y0, t1, tol)?;
            *col = samples.last().unwrap().1;
        }
        let m = Matrix4::from_fn(|r, c| cols[c][r]);
        det *= m.determinant();
        a = m * a;
        // A = M_{N-1} ... M_0, so A^-1 accumulates as M_0^-1 ... M_i^-1.
        let m_inv = m.try_inverse().ok_or(Error::EigenFailure)?;
        ainv *= m_inv;
    }
    finish_monodromy(profile, mode, a, ainv, det, tol)
}

fn finish_monodromy(
    profile: &DelaunayProfile,
    mode: FourierMode,
    a: Matrix4<f64>,
    ainv: Matrix4<f64>,
    det: f64,
    tol: f64,
) -> Result<MonodromyResult> {
    // Eigenvalues of |mu| >= 1 are accurate from A; the small ones drown
    // in |A| eps_mach, but reappear as the dominant eigenvalues of A^-1.
    // Merge the lower half of the inverted A^-1 spectrum with the upper
    // half of the direct spectrum.
    let mut eigs: Vec<Complex64> =
        a.complex_eigenvalues().iter().map(|e| Complex64::new(e.re, e.im)).collect();
    eigs.sort_by(|x, y| x.norm().partial_cmp(&y.norm()).unwrap());
    let mut inv_eigs: Vec<Complex64> =
        ainv.complex_eigenvalues().iter().map(|e| Complex64::new(e.re, e.im).inv()).collect();
    inv_eigs.sort_by(|x, y| x.norm().partial_cmp(&y.norm()).unwrap());
    eigs[0] = inv_eigs[0];
    // Keep a conjugate middle pair intact rather than mixing sources.
    if (eigs[1] - eigs[2].conj()).norm() > 1e-6 * (1.0 + eigs[2].norm()) {
        eigs[1] = inv_eigs[1];
    }
    let mut roots: Vec<f64> = eigs.iter().map(|m| m.norm().ln() / profile.period).collect();
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());

    // The merged spectrum is accurate from both product directions, so
    // the dominant uncertainty near the unit circle is the Jordan-pair
    // splitting, which grows as the square root of the backward error.
    let eff = profile.tol.max(tol);
    let tol_unit = 1e-3 * (eff / 1e-12).sqrt().max(1.0);
    let unit_multiplicity = eigs.iter().filter(|m| (m.norm() - 1.0).abs() < tol_unit).count();

    Ok(MonodromyResult {
        n: profile.params.n,
        epsilon: profile.epsilon,
        mode,
        period: profile.period,
        a: [
            [a[(0, 0)], a[(0, 1)], a[(0, 2)], a[(0, 3)]],
            [a[(1, 0)], a[(1, 1)], a[(1, 2)], a[(1, 3)]],
            [a[(2, 0)], a[(2, 1)], a[(2, 2)], a[(2, 3)]],
            [a[(3, 0)], a[(3, 1)], a[(3, 2)], a[(3, 3)]],
        ],
        det,
        eigenvalues: [
            (eigs[0].re, eigs[0].im),
            (eigs[1].re, eigs[1].im),
            (eigs[2].re, eigs[2].im),
            (eigs[3].re, eigs[3].im),
        ],
        indicial_roots: [roots[0], roots[1], roots[2], roots[3]],
        unit_multiplicity,
        tol_unit,
    })
}

/// Report on the periodic Jacobi field w_0^+ = v'_eps.
#[derive(Debug, Clone)]
pub struct JacobiW0Report {
    /// The cylinder profile has v' identically zero.
    pub degenerate: bool,
    /// sup |L_{eps,0} w| / sup |w| over the sample grid.
    pub residual_rel: f64,
    /// |A jet - jet| / |jet|: eigenvector-at-1 residual.
    pub eigvec_residual: f64,
    /// Rayleigh estimate of the multiplier.
    pub multiplier: f64,
}

/// Dominant eigenvector by power iteration; the top eigenvalue of the
/// mode-0 period map is separated by a factor e^{2 mu_0 T}, so a few
/// dozen iterations converge to working precision.
fn power_vector(a: &Matrix4<f64>) -> nalgebra::Vector4<f64> {
    let mut x = nalgebra::Vector4::new(1.0, 0.5, 0.25, 0.125);
    for _ in 0..60 {
        x = (a * x).normalize();
    }
    x
}

/// Verify that v'_eps solves the mode-0 linearized equation and is fixed
/// by the period map.
pub fn jacobi_w0(profile: &DelaunayProfile, tol: f64) -> Result<JacobiW0Report> {
    let p = &profile.params;
    let sup_w = profile
        .samples
        .iter()
        .map(|s| s.v1.abs())
        .fold(0.0, f64::max);
    if sup_w < 1e-12 {
        return Ok(JacobiW0Report {
            degenerate: true,
            residual_rel: 0.0,
            eigvec_residual: 0.0,
            multiplier: 1.0,
        });
    }
    let op = linear_potential(profile, FourierMode::new(p.n, 0));
    // Jet of w = v' from the profile, with w'''' = v^(5) from the
    // differentiated ODE: v^(5) = C2 v''' - C0 v' + K_nl p v^(p-1) v'.
    let mut worst = 0.0f64;
    for i in 0..profile.samples.len() - 1 {
        let s = &profile.samples[i];
        let v4 = profile.eval(s.t, 4);
        let v5 = p.c2 * s.v3 - p.c0 * s.v1 + p.k_nl * p.p * pos_pow(s.v, p.p - 1.0) * s.v1;
        let jet = [s.v1, s.v2, s.v3, v4, v5];
        worst = worst.max(op.apply(s.t, &jet).abs());
    }
    let mono = monodromy(profile, FourierMode::new(p.n, 0), tol)?;
    let a = mono.matrix();
    let s0 = &profile.samples[0];
    let v4_0 = profile.eval(0.0, 4);
    let jet0 = nalgebra::Vector4::new(s0.v1, s0.v2, s0.v3, v4_0);
    // The period map carries an eigenvalue e^{mu_0 T} (up to ~1e7); any
    // rounding in jet0 along that eigendirection swamps A jet0. Deflate
    // the unstable spectral component with the right/left dominant
    // eigenvectors before measuring the multiplier.
    let u = power_vector(&a);
    let l = power_vector(&a.transpose());
    let deflate = |x: nalgebra::Vector4<f64>| x - u * (l.dot(&x) / l.dot(&u));
    let jd = deflate(jet0);
    let imaged = deflate(a * jet0);
    let multiplier = imaged.dot(&jd) / jd.dot(&jd);
    let eigvec_residual = (imaged - jd).norm() / jd.norm();
    Ok(JacobiW0Report {
        degenerate: false,
        residual_rel: worst / sup_w,
        eigvec_residual,
        multiplier,
    })
}

/// Report on the degree-1 Jacobi fields w^+- = e^(+-t)(+-v' + ((n-4)/2) v).
#[derive(Debug, Clone)]
pub struct JacobiK1Report {
    /// sup |L_{eps,1} w^+-| / sup |w^+-| over one period.
    pub residual_rel: [f64; 2],
    /// Relative error of the Floquet multipliers e^(+-T).
    pub multiplier_rel_err: [f64; 2],
    /// Both fields positive over the grid.
    pub positive: [bool; 2],
}

/// jet (w, w', w'', w''', w'''') of e^(sigma t)(sigma v' + c v) at t.
fn k1_jet(profile: &DelaunayProfile, sigma: f64, t: f64) -> [f64; 5] {
    let p = &profile.params;
    let c = (p.n as f64 - 4.0) / 2.0;
    let v = [
        profile.eval(t, 0),
        profile.eval(t, 1),
        profile.eval(t, 2),
        profile.eval(t, 3),
        profile.eval(t, 4),
    ];
    let v5 = p.c2 * v[3] - p.c0 * v[1] + p.k_nl * p.p * pos_pow(v[0], p.p - 1.0) * v[1];
    // g^(m) = sigma v^(m+1) + c v^(m).
    let g = [
        sigma * v[1] + c * v[0],
        sigma * v[2] + c * v[1],
        sigma * v[3] + c * v[2],
        sigma * v[4] + c * v[3],
        sigma * v5 + c * v[4],
    ];
    let e = (sigma * t).exp();
    // (e^(sigma t) g)^(m) = e^(sigma t) sum_j C(m,j) sigma^(m-j) g^(j).
    let mut jet = [0.0; 5];
    let binom = [
        [1.0, 0.0, 0.0, 0.0, 0.0],
        [1.0, 1.0, 0.0, 0.0, 0.0],
        [1.0, 2.0, 1.0, 0.0, 0.0],
        [1.0, 3.0, 3.0, 1.0, 0.0],
        [1.0, 4.0, 6.0, 4.0, 1.0],
    ];
    for m in 0..5 {
        let mut acc = 0.0;
        for j in 0..=m {
            acc += binom[m][j] * sigma.powi((m - j) as i32) * g[j];
        }
        jet[m] = e * acc;
    }
    jet
}

pub fn jacobi_wk1(profile: &DelaunayProfile, tol: f64) -> Result<JacobiK1Report> {
    let p = &profile.params;
    let op = linear_potential(profile, FourierMode::new(p.n, 1));
    let mono = monodromy(profile, FourierMode::new(p.n, 1), tol)?;
    let a = mono.matrix();
    let mut residual_rel = [0.0f64; 2];
    let mut multiplier_rel_err = [0.0f64; 2];
    let mut positive = [true; 2];
    for (idx, sigma) in [1.0f64, -1.0].iter().enumerate() {
        let mut sup_w = 0.0f64;
        let mut sup_res = 0.0f64;
        for i in 0..profile.samples.len() - 1 {
            let t = profile.samples[i].t;
            let jet = k1_jet(profile, *sigma, t);
            sup_w = sup_w.max(jet[0].abs());
            sup_res = sup_res.max(op.apply(t, &jet).abs());
            if jet[0] <= 0.0 {
                positive[idx] = false;
            }
        }
        residual_rel[idx] = sup_res / sup_w;
        // A maps the jet at 0 to the jet at T; the exact field carries
        // multiplier e^(sigma T). Both fields are subdominant to the
        // e^(gamma_1 T) direction, so deflate it first as in jacobi_w0.
        let jet0 = k1_jet(profile, *sigma, 0.0);
        let x = nalgebra::Vector4::new(jet0[0], jet0[1], jet0[2], jet0[3]);
        let u = power_vector(&a);
        let l = power_vector(&a.transpose());
        let deflate = |y: nalgebra::Vector4<f64>| y - u * (l.dot(&y) / l.dot(&u));
        let xd = deflate(x);
        let image = deflate(a * x);
        let expected = (sigma * profile.period).exp();
        let mu = image.dot(&xd) / xd.dot(&xd);
        multiplier_rel_err[idx] = ((mu - expected) / expected).abs();
    }
    Ok(JacobiK1Report { residual_rel, multiplier_rel_err, positive })
}

/// Indicial roots gathered over spherical-harmonic degrees 0..=k_max.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndicialSet {
    /// (root, originating degree), ascending by root.
    pub roots: Vec<(f64, u32)>,
    /// Smallest positive root.
    pub gap: f64,
}

pub fn gamma_set(profile: &DelaunayProfile, k_max: u32, tol: f64) -> Result<IndicialSet> {
    if k_max > 12 {
        return Err(Error::InvalidArgument(format!("k_max = {k_max} exceeds the supported 12")));
    }
    let mut roots = Vec::new();
    for k in 0..=k_max {
        let mono = monodromy(profile, FourierMode::new(profile.params.n, k), tol)?;
        for g in mono.indicial_roots {
            roots.push((g, k));
        }
    }
    roots.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // The mode-0 unit multiplier pair splits by the square root of the
    // period-map error (~1e-5 in the root), so zero roots are excluded
    // with a margin well above that noise floor.
    let gap = roots
        .iter()
        .map(|r| r.0)
        .filter(|g| *g > 1e-3)
        .fold(f64::INFINITY, f64::min);
    Ok(IndicialSet { roots, gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delaunay::solve_delaunay;
    use crate::params::make_params;
    use approx::assert_relative_eq;

    const TOL: f64 = 1e-12;

    fn cyl_profile(n: i64) -> DelaunayProfile {
        let p = make_params(n).unwrap();
        solve_delaunay(&p, p.eps_n, 1e-11).unwrap()
    }

    #[test]
    fn potential_constants_at_cylinder() {
        let prof = cyl_profile(6);
        let op0 = linear_potential(&prof, FourierMode::new(6, 0));
        // c0 = -n^2(n-4)/2 = -36 for n = 6 at the cylinder.
        assert_relative_eq!(op0.c0(0.7), -36.0, max_relative = 1e-10);
        assert_relative_eq!(op0.c2, -10.0, max_relative = 1e-14);
        let op1 = linear_potential(&prof, FourierMode::new(6, 1));
        let lam = 5.0;
        assert_relative_eq!(op1.c0_const - op0.c0_const, 6.0 * lam + lam * lam, max_relative = 1e-13);
        assert_relative_eq!(op1.c2 - op0.c2, -2.0 * lam, max_relative = 1e-13);
    }

    #[test]
    fn potential_periodic() {
        let p = make_params(6).unwrap();
        let prof = solve_delaunay(&p, 0.5, 1e-10).unwrap();
        let op = linear_potential(&prof, FourierMode::new(6, 0));
        for &t in &[0.1, 0.9, 2.2] {
            assert_relative_eq!(op.c0(t + prof.period), op.c0(t), max_relative = 1e-10);
        }
    }

    #[test]
    fn cylinder_monodromy_mode0() {
        let prof = cyl_profile(6);
        let mono = monodromy(&prof, FourierMode::new(6, 0), TOL).unwrap();
        assert!((mono.det - 1.0).abs() < 1e-8, "det = {}", mono.det);
        // Roots {-mu0, 0, 0, mu0} with mu0 = 3.579140913111225.
        assert_relative_eq!(mono.indicial_roots[3], 3.579140913111225, max_relative = 1e-6);
        assert_relative_eq!(mono.indicial_roots[0], -3.579140913111225, max_relative = 1e-6);
        assert!(mono.indicial_roots[1].abs() < 1e-6);
        assert!(mono.indicial_roots[2].abs() < 1e-6);
        assert_eq!(mono.unit_multiplicity, 2);
    }

    #[test]
    fn cylinder_monodromy_mode1_n5() {
        let prof = cyl_profile(5);
        let mono = monodromy(&prof, FourierMode::new(5, 1), TOL).unwrap();
        let expect = 3.6742346141747673; // sqrt(13.5)
        assert_relative_eq!(mono.indicial_roots[3], expect, max_relative = 1e-6);
        assert_relative_eq!(mono.indicial_roots[2], 1.0, max_relative = 1e-6);
        assert_relative_eq!(mono.indicial_roots[1], -1.0, max_relative = 1e-6);
    }

    #[test]
    fn monodromy_det_one_across_grid() {
        let p = make_params(6).unwrap();
        let prof = solve_delaunay(&p, 0.5, 1e-11).unwrap();
        for k in 0..=3u32 {
            let mono = monodromy(&prof, FourierMode::new(6, k), TOL).unwrap();
            assert!((mono.det - 1.0).abs() < 1e-8, "k={k}: det = {}", mono.det);
            // Conjugation closure: product of eigenvalues equals det. The
            // merged spectrum mixes forward- and inverse-product sources,
            // so near-unit pair splittings (~1e-5 each) no longer cancel.
            let prod = mono.eigs().iter().product::<Complex64>();
            assert!((prod.re - mono.det).abs() < 1e-3 && prod.im.abs() < 1e-3);
            // Roots symmetric about 0.
            let r = mono.indicial_roots;
            assert!((r[0] + r[3]).abs() < 1e-6 && (r[1] + r[2]).abs() < 1e-6);
        }
    }

    #[test]
    fn jacobi_w0_cylinder_degenerate() {
        let prof = cyl_profile(6);
        let rep = jacobi_w0(&prof, TOL).unwrap();
        assert!(rep.degenerate);
    }

    #[test]
    fn jacobi_w0_delaunay() {
        let p = make_params(6).unwrap();
        let prof = solve_delaunay(&p, 0.5, 1e-11).unwrap();
        let rep = jacobi_w0(&prof, TOL).unwrap();
        assert!(!rep.degenerate);
        assert!(rep.residual_rel < 1e-6, "residual {}", rep.residual_rel);
        assert!((rep.multiplier - 1.0).abs() < 1e-6, "multiplier {}", rep.multiplier);
    }

    #[test]
    fn jacobi_w0_minus_gives_double_unit_eigenvalue() {
        let p = make_params(6).unwrap();
        let prof = solve_delaunay(&p, 0.5, 1e-11).unwrap();
        let mono = monodromy(&prof, FourierMode::new(6, 0), TOL).unwrap();
        let close: Vec<f64> = mono
            .eigs()
            .iter()
            .map(|m| (*m - Complex64::new(1.0, 0.0)).norm())
            .filter(|d| *d < 1e-4)
            .collect();
        assert!(close.len() >= 2, "expected a pair near 1, distances {close:?}");
    }

    #[test]
    fn jacobi_k1_exact_fields() {
        let p = make_params(6).unwrap();
        let prof = solve_delaunay(&p, 0.5, 1e-11).unwrap();
        let rep = jacobi_wk1(&prof, TOL).unwrap();
        for i in 0..2 {
            assert!(rep.residual_rel[i] < 1e-6, "residual {}", rep.residual_rel[i]);
            assert!(rep.multiplier_rel_err[i] < 1e-6, "mult err {}", rep.multiplier_rel_err[i]);
            assert!(rep.positive[i]);
        }
    }

    #[test]
    fn jacobi_k1_cylinder_multiplier() {
        let prof = cyl_profile(6);
        let rep = jacobi_wk1(&prof, TOL).unwrap();
        // w^- = e^(-t) v_cyl with multiplier e^(-T_cyl).
        assert!(rep.multiplier_rel_err[1] < 1e-6);
        assert!(rep.positive[1]);
    }

    #[test]
    fn gamma_set_cylinder() {
        let prof = cyl_profile(6);
        let set = gamma_set(&prof, 2, TOL).unwrap();
        let has = |x: f64| set.roots.iter().any(|r| (r.0 - x).abs() < 1e-5);
        assert!(has(0.0));
        assert!(has(1.0) && has(-1.0));
        assert!(has(3.579140913111225) && has(-3.579140913111225));
        assert!(has(4.358898943540674));
        // No root strictly inside (0, 1).
        assert!(!set.roots.iter().any(|r| r.0 > 1e-5 && r.0 < 1.0 - 1e-5));
        assert_relative_eq!(set.gap, 1.0, max_relative = 1e-5);
    }

    #[test]
    fn gamma_set_gap_on_eps_grid() {
        let p = make_params(6).unwrap();
        for &eps in &[0.4, 0.6, 0.75] {
            let prof = solve_delaunay(&p, eps, 1e-11).unwrap();
            let set = gamma_set(&prof, 2, TOL).unwrap();
            assert_relative_eq!(set.gap, 1.0, max_relative = 1e-5);
        }
    }
}
