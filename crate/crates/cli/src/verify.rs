//! The `verify` subcommand: one PASS/FAIL line per invariant, grouped by
//! module. Output is deterministic so warm-cache reruns are
//! byte-identical.

use crate::{cache, fmt};
use num_complex::Complex64;
use qcdel_core::bands::{
    band_edges, bottom_band_holder_value, discriminant_check, discriminant_floor,
    verify_band_props, DEFAULT_M,
};
use qcdel_core::cylinder::{cyl_indicial, sph_state};
use qcdel_core::delaunay::DelaunayProfile;
use qcdel_core::families::{
    expansion_error, h_rad_radial, pde_residual, AxisymField, FamilyKind, TranslationSpec,
};
use qcdel_core::floquet::{jacobi_w0, jacobi_wk1, monodromy, FourierMode};
use qcdel_core::fourier_laplace::{
    fl_inverse, fl_transform, transform_norm_sq, weighted_norm_sq, FLSample,
};
use qcdel_core::ode::hamiltonian;
use qcdel_core::{make_params, CylState, Result};
use std::f64::consts::PI;
use std::path::Path;

struct Report {
    lines: Vec<(bool, String)>,
}

impl Report {
    fn new() -> Self {
        Self { lines: Vec::new() }
    }

    fn check(&mut self, name: &str, pass: bool, detail: String) {
        self.lines.push((pass, format!("{name}: {detail}")));
    }

    fn lt(&mut self, name: &str, value: f64, bound: f64) {
        self.check(name, value < bound, format!("{} (bound {})", fmt(value), fmt(bound)));
    }

    fn finish(self) -> bool {
        let mut ok = true;
        for (pass, line) in &self.lines {
            ok &= pass;
            println!("{} {line}", if *pass { "PASS" } else { "FAIL" });
        }
        let failed = self.lines.iter().filter(|(p, _)| !p).count();
        println!(
            "{}: {} checks, {} failed",
            if ok { "OK" } else { "FAILED" },
            self.lines.len(),
            failed
        );
        ok
    }
}

pub fn run(dir: &Path, n: i64, quick: bool, tol: f64) -> Result<bool> {
    let params = make_params(n)?;
    let mut rep = Report::new();

    // Spherical orbit sits on the zero level of the first integral.
    let mut worst = 0.0f64;
    for t in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        worst = worst.max(hamiltonian(&params, &sph_state(params.n, t))?.abs());
    }
    rep.lt("ode.spherical_energy_zero", worst, 1e-12);

    // Cylinder closed forms: equilibrium residual and first integral.
    let cyl = CylState::new(0.0, params.v_cyl, 0.0, 0.0, 0.0);
    let eq = (params.c0 * params.v_cyl
        - params.k_nl * params.v_cyl.powf(params.p))
    .abs();
    rep.lt("ode.cylinder_equilibrium", eq, 1e-12);
    let h_rel = ((hamiltonian(&params, &cyl)? - params.h_cyl) / params.h_cyl).abs();
    rep.lt("ode.cylinder_energy", h_rel, 1e-12);

    // Delaunay profiles across the necksize range.
    let eps_list: Vec<f64> = if params.n == 6 {
        vec![0.3, 0.5, 0.7]
    } else {
        [0.4, 0.65, 0.9].iter().map(|f| f * params.eps_n).collect()
    };
    let mut profiles: Vec<DelaunayProfile> = Vec::new();
    for &eps in &eps_list {
        let p = cache::get_profile(dir, n, eps, tol)?;
        let tag = fmt(eps);
        rep.lt(&format!("delaunay.energy_drift[{tag}]"), p.energy_drift()?, 1e-8);
        rep.lt(&format!("delaunay.symmetry[{tag}]"), p.symmetry_residual(), 1e-8);
        let vmin = p.samples.iter().map(|s| s.v).fold(f64::INFINITY, f64::min);
        let vmax = p.samples.iter().map(|s| s.v).fold(0.0, f64::max);
        rep.check(
            &format!("delaunay.range[{tag}]"),
            vmin >= eps - 1e-10 && vmax < 1.0,
            format!("v in [{}, {}]", fmt(vmin), fmt(vmax)),
        );
        profiles.push(p);
    }
    let mono_t = profiles.windows(2).all(|w| w[0].period > w[1].period);
    let mono_h = profiles.windows(2).all(|w| w[0].energy > w[1].energy);
    rep.check("delaunay.period_decreasing", mono_t, format!("{mono_t}"));
    rep.check("delaunay.energy_decreasing", mono_h, format!("{mono_h}"));
    let near = cache::get_profile(dir, n, 0.99 * params.eps_n, tol)?;
    let t_rel = ((near.period - params.t_cyl) / params.t_cyl).abs();
    rep.lt("delaunay.period_near_cylinder", t_rel, 0.01);

    // Floquet: Wronskian, cylinder oracle, exact Jacobi fields.
    let mid = &profiles[1];
    for k in 0..=3u32 {
        let mono = monodromy(mid, FourierMode::new(params.n, k), 1e-12)?;
        rep.lt(&format!("floquet.det_one[k={k}]"), (mono.det - 1.0).abs(), 1e-8);
    }
    let cyl_prof = cache::get_profile(dir, n, params.eps_n, tol)?;
    let mut worst_rel = 0.0f64;
    for k in 0..=4u32 {
        let mono = monodromy(&cyl_prof, FourierMode::new(params.n, k), 1e-12)?;
        let mut expect = cyl_indicial(params.n, k);
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in mono.indicial_roots.iter().zip(&expect) {
            let d = (got - want).abs() / want.abs().max(1.0);
            worst_rel = worst_rel.max(d);
        }
    }
    rep.lt("floquet.cylinder_indicial_oracle", worst_rel, 1e-6);
    let w0 = jacobi_w0(mid, 1e-12)?;
    rep.lt("floquet.w0_residual", w0.residual_rel, 1e-6);
    rep.lt("floquet.w0_multiplier", (w0.multiplier - 1.0).abs(), 1e-6);
    let k1 = jacobi_wk1(mid, 1e-12)?;
    rep.lt("floquet.k1_residual", k1.residual_rel[0].max(k1.residual_rel[1]), 1e-6);
    rep.lt(
        "floquet.k1_multipliers",
        k1.multiplier_rel_err[0].max(k1.multiplier_rel_err[1]),
        1e-6,
    );
    let mono0 = monodromy(mid, FourierMode::new(params.n, 0), 1e-12)?;
    let pair = mono0
        .eigs()
        .iter()
        .filter(|m| (*m - Complex64::new(1.0, 0.0)).norm() < 1e-4)
        .count();
    rep.check("floquet.double_unit_eigenvalue", pair >= 2, format!("{pair} within 1e-4 of 1"));

    // Bands.
    let t0 = band_edges(mid, FourierMode::new(params.n, 0), 8, DEFAULT_M)?;
    let s = &t0.curves[0];
    rep.check("bands.bottom_negative", s[0] < 0.0, format!("sigma_0(0) = {}", fmt(s[0])));
    let nf = params.n as f64;
    let uniform = -nf * (nf * nf - 4.0) / 2.0;
    rep.check(
        "bands.uniform_lower_bound",
        s[0] >= uniform - 1e-6,
        format!("{} >= {}", fmt(s[0]), fmt(uniform)),
    );
    rep.lt("bands.zero_mode_edge", s[1].abs().min(s[2].abs()), 1e-4);
    let props = verify_band_props(&t0, &t0)?;
    rep.check(
        "bands.ordering",
        props.ordering_ok,
        format!("violation {}", fmt(props.ordering_violation)),
    );
    rep.check(
        "bands.nondegenerate",
        props.nondegenerate_ok,
        format!("min length {}", fmt(props.min_band_length)),
    );
    rep.check(
        "bands.phase_monotone",
        props.monotone_ok,
        format!("violation {}", fmt(props.monotonicity_violation)),
    );
    for k in 1..=3u32 {
        let tk = band_edges(mid, FourierMode::new(params.n, k), 8, DEFAULT_M)?;
        let lo = tk.bands.iter().map(|(lo, _)| *lo).fold(f64::INFINITY, f64::min);
        rep.check(
            &format!("bands.positive[k={k}]"),
            lo > 0.0,
            format!("lowest edge {}", fmt(lo)),
        );
        if k == 1 {
            let p1 = verify_band_props(&tk, &t0)?;
            rep.check(
                "bands.higher_band_bound",
                p1.higher_band_ok,
                format!("margin {}", fmt(p1.higher_band_margin.unwrap_or(f64::NAN))),
            );
        }
    }
    rep.check(
        "bands.holder_value_informational",
        true,
        format!("holder expression {}", fmt(bottom_band_holder_value(mid))),
    );
    let mode0 = FourierMode::new(params.n, 0);
    let mut edge_ok = true;
    let mut n_edges = 0usize;
    let last = t0.curves.last().unwrap();
    for j in 0..s.len() {
        for (sig, phi) in [(s[j], 0.0), (last[j], PI)] {
            // Skip edges past the f64 conditioning floor of the product.
            if discriminant_floor(mid, mode0, sig) < 1e-4 {
                n_edges += 1;
                edge_ok &= discriminant_check(mid, mode0, sig, phi, 1e-4)?;
            }
        }
    }
    rep.check(
        "bands.discriminant_edges",
        edge_ok && n_edges >= 10,
        format!("{n_edges} certifiable edges, all pass {edge_ok}"),
    );
    let mut cross_ok = true;
    for k in 0..=2u32 {
        let mode = FourierMode::new(params.n, k);
        let tk = band_edges(mid, mode, 8, DEFAULT_M)?;
        let zero_in = tk.bands.iter().any(|(lo, hi)| *lo <= 1e-6 && *hi >= -1e-6);
        let unit = monodromy(mid, mode, 1e-12)?.unit_multiplicity > 0;
        cross_ok &= zero_in == unit;
    }
    rep.check("bands.zero_iff_unit_multiplier", cross_ok, format!("{cross_ok}"));

    // Families: expansion decay, Pohozaev invariant, PDE residual.
    let spec = TranslationSpec::new(mid, 0.1, FamilyKind::Kelvin, 0.0)?;
    let exp = expansion_error(&spec, 2.0, 8.0, 25, 41)?;
    rep.check(
        "families.expansion_rate",
        exp.beta_hat >= 1.9,
        format!("beta_hat {}", fmt(exp.beta_hat)),
    );
    let scale = params.sphere_area * mid.energy;
    let mut sup_dev = 0.0f64;
    for &t in &[0.0, 1.3, 2.9] {
        let h = h_rad_radial(mid, t, 64)?;
        sup_dev = sup_dev.max(((h - scale) / scale).abs());
    }
    rep.lt("families.poho_matches_energy", sup_dev, 1e-3);
    if !quick {
        let half = TranslationSpec::new(mid, 0.05, FamilyKind::Kelvin, 0.0)?;
        let exp_half = expansion_error(&half, 2.0, 8.0, 25, 41)?;
        let mut ratio_lo = f64::INFINITY;
        let mut ratio_hi = 0.0f64;
        for ((_, e1), (_, e2)) in exp.curve.iter().zip(&exp_half.curve) {
            if *e1 > 1e-12 {
                let r = e1 / e2;
                ratio_lo = ratio_lo.min(r);
                ratio_hi = ratio_hi.max(r);
            }
        }
        rep.check(
            "families.expansion_quadratic_in_a",
            ratio_lo > 3.5 && ratio_hi < 4.5,
            format!("halving ratio in [{}, {}]", fmt(ratio_lo), fmt(ratio_hi)),
        );
        let coarse = AxisymField::from_family(&spec, 2.0, 6.0, 81, 81)?;
        let fine = AxisymField::from_family(&spec, 2.0, 6.0, 161, 161)?;
        let factor = pde_residual(&coarse, &params)? / pde_residual(&fine, &params)?;
        rep.check(
            "families.pde_residual_fourth_order",
            factor > 8.0 && factor < 32.0,
            format!("halving factor {}", fmt(factor)),
        );
    }

    // Fourier-Laplace identities on the geometric fixture.
    let sample = FLSample::new(1.0, 1.0, 1.0, Box::new(|t: f64| (-t).exp()))?;
    let mut hol = 0.0f64;
    for &t in &[0.1, 0.6] {
        for &(eta, nu) in &[(0.9, 0.0), (2.0, 0.4)] {
            let xi = Complex64::new(eta, nu);
            // One-period shift acts on the transform by the factor e^(i xi).
            let lhs = fl_transform(&sample, t + 1.0, xi)?;
            let rhs = (Complex64::i() * xi).exp() * fl_transform(&sample, t, xi)?;
            hol = hol.max((lhs - rhs).norm());
        }
    }
    rep.lt("fourier_laplace.holonomy", hol, 1e-12);
    let mut round = 0.0f64;
    for &t in &[0.3, 1.7, 4.2] {
        round = round.max((fl_inverse(&sample, 0.0, t, 512)? - sample.w(t)).abs());
    }
    rep.lt("fourier_laplace.roundtrip", round, 1e-8);
    let lhs = transform_norm_sq(&sample, 0.0, 64, 256)?;
    let rhs = 2.0 * PI * weighted_norm_sq(&sample, 0.0)?;
    rep.lt("fourier_laplace.parseval", ((lhs - rhs) / rhs).abs(), 1e-8);

    Ok(rep.finish())
}
