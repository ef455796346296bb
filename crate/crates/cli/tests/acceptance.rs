//! Full acceptance gate: one printed pass/fail line per criterion, with
//! pinned tolerances. Run with `--nocapture` to see the report on
//! success.

use num_complex::Complex64;
use qcdel_core::bands::{
    band_edges, band_eigs, discriminant_check, discriminant_floor, verify_band_props, DEFAULT_M,
};
use qcdel_core::cylinder::{cyl_indicial, sph_state};
use qcdel_core::delaunay::{solve_delaunay, DelaunayProfile};
use qcdel_core::families::{
    expansion_error, family_poho_jet, h_rad, h_rad_radial, pde_residual, AxisymField, FamilyKind,
    TranslationSpec,
};
use qcdel_core::floquet::{jacobi_w0, jacobi_wk1, monodromy, FourierMode};
use qcdel_core::fourier_laplace::{
    fl_inverse, fl_transform, transform_norm_sq, weighted_norm_sq, FLSample,
};
use qcdel_core::ode::hamiltonian;
use qcdel_core::{make_params, CylState, DimensionParams};
use std::f64::consts::PI;

const TOL: f64 = 1e-11;

struct Gate {
    results: Vec<(bool, &'static str, String)>,
}

impl Gate {
    fn new() -> Self {
        Self { results: Vec::new() }
    }

    fn record(&mut self, name: &'static str, pass: bool, detail: String) {
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        self.results.push((pass, name, detail));
    }
}

fn profile(params: &DimensionParams, eps: f64) -> DelaunayProfile {
    solve_delaunay(params, eps, TOL).unwrap()
}

#[test]
fn acceptance() {
    let mut gate = Gate::new();
    let p6 = make_params(6).unwrap();
    let mid = profile(&p6, 0.5);
    let cyl6 = profile(&p6, p6.eps_n);

    // 1. The spherical orbit lies on the zero energy level.
    {
        let mut worst = 0.0f64;
        for n in [5u32, 6, 8] {
            let p = make_params(n as i64).unwrap();
            for t in [-2.0, -1.0, 0.0, 1.0, 2.0] {
                worst = worst.max(hamiltonian(&p, &sph_state(n, t)).unwrap().abs());
            }
        }
        gate.record("spherical_energy", worst < 1e-12, format!("sup |H| = {worst:.3e}"));
    }

    // 2. Cylinder constants against independent closed-form evaluation.
    {
        let mut worst = 0.0f64;
        for n in [5i64, 6, 8] {
            let p = make_params(n).unwrap();
            let nf = n as f64;
            let c0 = nf * nf * (nf - 4.0) * (nf - 4.0) / 16.0;
            let k_nl = nf * (nf - 4.0) * (nf * nf - 4.0) / 16.0;
            let pw = (nf + 4.0) / (nf - 4.0);
            let v_ind = (c0 / k_nl).powf(1.0 / (pw - 1.0));
            let h_ind = hamiltonian(&p, &CylState::new(0.0, v_ind, 0.0, 0.0, 0.0)).unwrap();
            worst = worst.max(((p.v_cyl - v_ind) / v_ind).abs());
            worst = worst.max(((p.h_cyl - h_ind) / h_ind).abs());
        }
        let pinned = (p6.h_cyl - (-1.8371173)).abs() < 1e-6;
        gate.record(
            "cylinder_constants",
            worst < 1e-12 && pinned,
            format!("worst rel = {worst:.3e}, H(6) = {:.7}", p6.h_cyl),
        );
    }

    // 3. Profile invariants across the necksize range.
    {
        let mut ok = true;
        let mut detail = String::new();
        for eps in [0.3, 0.5, 0.7] {
            let p = profile(&p6, eps);
            let drift = p.energy_drift().unwrap();
            let sym = p.symmetry_residual();
            let vmin = p.samples.iter().map(|s| s.v).fold(f64::INFINITY, f64::min);
            let vmax = p.samples.iter().map(|s| s.v).fold(0.0, f64::max);
            ok &= drift < 1e-8 && sym < 1e-8 && vmin >= eps - 1e-10 && vmax < 1.0;
            detail = format!("last: drift {drift:.2e}, sym {sym:.2e}, v in [{vmin:.3}, {vmax:.3}]");
        }
        gate.record("delaunay_profiles", ok, detail);
    }

    // 4. Period and energy strictly decreasing; period limit at the
    // cylinder.
    {
        let mut prev: Option<(f64, f64)> = None;
        let mut mono = true;
        for i in 0..20 {
            let eps = (0.3 + 0.69 * i as f64 / 19.0) * p6.eps_n;
            let p = profile(&p6, eps);
            if let Some((t, h)) = prev {
                mono &= p.period < t && p.energy < h;
            }
            prev = Some((p.period, p.energy));
        }
        let near = profile(&p6, 0.99 * p6.eps_n);
        let rel = ((near.period - p6.t_cyl) / p6.t_cyl).abs();
        gate.record(
            "monotone_period_energy",
            mono && rel < 0.01,
            format!("monotone {mono}, T(0.99) rel dev {rel:.3e} of {:.6}", p6.t_cyl),
        );
    }

    // 5. Unit Wronskian of every computed period map.
    {
        let mut worst = 0.0f64;
        for eps in [0.3, 0.5, 0.7] {
            let p = profile(&p6, eps);
            for k in 0..=3u32 {
                let m = monodromy(&p, FourierMode::new(6, k), 1e-12).unwrap();
                worst = worst.max((m.det - 1.0).abs());
            }
        }
        gate.record("monodromy_det", worst < 1e-8, format!("sup |det - 1| = {worst:.3e}"));
    }

    // 6. Indicial roots at the cylinder against the closed-form oracle.
    {
        let mut worst = 0.0f64;
        let mut k1_ok = true;
        for n in [5u32, 6, 8] {
            let p = make_params(n as i64).unwrap();
            let cyl = profile(&p, p.eps_n);
            for k in 0..=6u32 {
                let m = monodromy(&cyl, FourierMode::new(n, k), 1e-12).unwrap();
                let mut expect = cyl_indicial(n, k);
                expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
                for (got, want) in m.indicial_roots.iter().zip(&expect) {
                    worst = worst.max((got - want).abs() / want.abs().max(1.0));
                }
                if k == 1 {
                    let s = ((n as f64 * n as f64 + 2.0) / 2.0).sqrt();
                    let want = [-s, -1.0, 1.0, s];
                    for (g, w) in m.indicial_roots.iter().zip(&want) {
                        k1_ok &= (g - w).abs() / w.abs() < 1e-6;
                    }
                }
            }
        }
        gate.record(
            "cylinder_indicial",
            worst < 1e-6 && k1_ok,
            format!("worst rel = {worst:.3e}, k=1 set ok {k1_ok}"),
        );
    }

    // 7. Exact Jacobi fields: residuals, multipliers e^(-+T), and the
    // double unit eigenvalue of the mode-0 period map.
    {
        let w0 = jacobi_w0(&mid, 1e-12).unwrap();
        let k1 = jacobi_wk1(&mid, 1e-12).unwrap();
        let m0 = monodromy(&mid, FourierMode::new(6, 0), 1e-12).unwrap();
        let near_one = m0
            .eigs()
            .iter()
            .filter(|m| (*m - Complex64::new(1.0, 0.0)).norm() < 1e-4)
            .count();
        let pass = w0.residual_rel < 1e-6
            && (w0.multiplier - 1.0).abs() < 1e-6
            && k1.residual_rel[0].max(k1.residual_rel[1]) < 1e-6
            && k1.multiplier_rel_err[0].max(k1.multiplier_rel_err[1]) < 1e-6
            && near_one >= 2;
        gate.record(
            "jacobi_fields",
            pass,
            format!(
                "res {:.2e}/{:.2e}, mult err {:.2e}, unit count {near_one}",
                w0.residual_rel,
                k1.residual_rel[0].max(k1.residual_rel[1]),
                k1.multiplier_rel_err[0].max(k1.multiplier_rel_err[1])
            ),
        );
    }

    // 8. Band structure at eps = 0.5 and at the cylinder. The bottom
    // eigenvalue obeys the uniform potential bound -n(n^2-4)/2 (the
    // sharper mean-field expression fails off the cylinder; see README).
    let t0 = band_edges(&mid, FourierMode::new(6, 0), 8, DEFAULT_M).unwrap();
    {
        let s0 = t0.curves[0][0];
        let uniform = -6.0 * (36.0 - 4.0) / 2.0;
        let zero_edge = t0.curves[0][1].abs().min(t0.curves[0][2].abs());
        let props = verify_band_props(&t0, &t0).unwrap();
        let mut positive = true;
        let mut higher_ok = true;
        for k in 1..=3u32 {
            let tk = band_edges(&mid, FourierMode::new(6, k), 8, DEFAULT_M).unwrap();
            positive &= tk.bands.iter().all(|(lo, _)| *lo > 0.0);
            if k == 1 {
                higher_ok = verify_band_props(&tk, &t0).unwrap().higher_band_ok;
            }
        }
        let cyl_row = band_eigs(&cyl6, FourierMode::new(6, 0), 0.0, DEFAULT_M).unwrap();
        let cyl_bottom = (cyl_row[0] + 36.0).abs() < 1e-6;
        let cyl_zero = cyl_row.iter().any(|s| s.abs() < 1e-6);
        let pass = s0 >= uniform - 1e-6
            && s0 < 0.0
            && zero_edge < 1e-4
            && props.ordering_ok
            && positive
            && higher_ok
            && cyl_bottom
            && cyl_zero;
        gate.record(
            "band_structure",
            pass,
            format!(
                "sigma_0 {s0:.4} >= {uniform}, zero edge {zero_edge:.2e}, ordering {}, k>=1 positive {positive}, cyl bottom {:.4}",
                props.ordering_ok, cyl_row[0]
            ),
        );
    }

    // 9. Cross-method: band edges against the Floquet discriminant; zero
    // in a band iff a unit multiplier.
    {
        // Edges whose product conditioning cannot support the 1e-4
        // certificate in f64 are excluded by the floor estimate.
        let mut edges_ok = true;
        let mut checked = 0usize;
        for k in 0..=1u32 {
            let mode = FourierMode::new(6, k);
            let tk = band_edges(&mid, mode, 8, DEFAULT_M).unwrap();
            let first = &tk.curves[0];
            let last = tk.curves.last().unwrap();
            for j in 0..=8usize {
                for (sig, phi) in [(first[j], 0.0), (last[j], PI)] {
                    if discriminant_floor(&mid, mode, sig) < 1e-4 {
                        checked += 1;
                        edges_ok &= discriminant_check(&mid, mode, sig, phi, 1e-4).unwrap();
                    }
                }
            }
        }
        edges_ok &= checked >= 16;
        let mut cross = true;
        for k in 0..=2u32 {
            let mode = FourierMode::new(6, k);
            let tk = band_edges(&mid, mode, 8, DEFAULT_M).unwrap();
            let zero_in = tk.bands.iter().any(|(lo, hi)| *lo <= 1e-6 && *hi >= -1e-6);
            let unit = monodromy(&mid, mode, 1e-12).unwrap().unit_multiplicity > 0;
            cross &= zero_in == unit;
        }
        gate.record(
            "discriminant_cross_check",
            edges_ok && cross,
            format!("{checked} edges ok {edges_ok}, zero iff unit multiplier {cross}"),
        );
    }

    // 10. Translated-family expansion error decays like e^(-2t) and
    // scales quadratically in |a|.
    let spec = TranslationSpec::new(&mid, 0.1, FamilyKind::Kelvin, 0.0).unwrap();
    {
        let rep = expansion_error(&spec, 2.0, 8.0, 25, 41).unwrap();
        let half = TranslationSpec::new(&mid, 0.05, FamilyKind::Kelvin, 0.0).unwrap();
        let rep_h = expansion_error(&half, 2.0, 8.0, 25, 41).unwrap();
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for ((_, e1), (_, e2)) in rep.curve.iter().zip(&rep_h.curve) {
            if *e1 > 1e-12 {
                lo = lo.min(e1 / e2);
                hi = hi.max(e1 / e2);
            }
        }
        gate.record(
            "expansion_asymptotics",
            rep.beta_hat >= 1.9 && lo > 3.5 && hi < 4.5,
            format!("beta_hat {:.4}, halving ratio [{lo:.3}, {hi:.3}]", rep.beta_hat),
        );
    }

    // 11. Radial Pohozaev invariant: t-independent and proportional to
    // the profile energy; pinned value at the cylinder.
    {
        let expect = p6.sphere_area * mid.energy;
        let mut vals = Vec::new();
        for &t in &[3.0, 4.0, 5.0, 6.0, 7.0] {
            vals.push(h_rad(&p6, |s| family_poho_jet(&spec, t, s, 0.02), 64).unwrap());
        }
        let spread = vals.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v))
            - vals.iter().fold(f64::INFINITY, |m, v| m.min(*v));
        let t_indep = spread / expect.abs() < 1e-4;
        let matches = vals.iter().all(|h| ((h - expect) / expect).abs() < 1e-3);
        let cyl_val = h_rad_radial(&cyl6, 1.0, 64).unwrap();
        let pinned = (cyl_val - (-56.96169)).abs() < 1e-3;
        gate.record(
            "pohozaev",
            t_indep && matches && pinned,
            format!("spread {spread:.2e}, cylinder value {cyl_val:.5}"),
        );
    }

    // 12. PDE residual of the family converges at fourth order.
    {
        let coarse = AxisymField::from_family(&spec, 2.0, 6.0, 81, 81).unwrap();
        let fine = AxisymField::from_family(&spec, 2.0, 6.0, 161, 161).unwrap();
        let factor = pde_residual(&coarse, &p6).unwrap() / pde_residual(&fine, &p6).unwrap();
        gate.record(
            "pde_residual_order",
            factor > 8.0 && factor < 32.0,
            format!("halving factor {factor:.2}"),
        );
    }

    // 13. Transform identities on the geometric-series fixture.
    {
        let sample = FLSample::new(1.0, 1.0, 1.0, Box::new(|t: f64| (-t).exp())).unwrap();
        let mut hol = 0.0f64;
        let mut round = 0.0f64;
        for &t in &[0.3, 1.7, 4.2] {
            round = round.max((fl_inverse(&sample, 0.0, t, 512).unwrap() - sample.w(t)).abs());
        }
        for &t in &[0.1, 0.6] {
            for &(eta, nu) in &[(0.9, 0.0), (2.0, 0.4)] {
                let xi = Complex64::new(eta, nu);
                let lhs = fl_transform(&sample, t + 1.0, xi).unwrap();
                let rhs = (Complex64::i() * xi).exp() * fl_transform(&sample, t, xi).unwrap();
                hol = hol.max((lhs - rhs).norm());
            }
        }
        let lhs = transform_norm_sq(&sample, 0.0, 64, 256).unwrap();
        let rhs = 2.0 * PI * weighted_norm_sq(&sample, 0.0).unwrap();
        let pars = ((lhs - rhs) / rhs).abs();
        gate.record(
            "fourier_laplace",
            hol < 1e-12 && pars < 1e-8 && round < 1e-8,
            format!("holonomy {hol:.2e}, parseval {pars:.2e}, roundtrip {round:.2e}"),
        );
    }

    // 14. Warm-cache verify runs are byte-identical.
    {
        let dir = tempfile::tempdir().unwrap();
        let run = || {
            std::process::Command::new(env!("CARGO_BIN_EXE_qcdel-cli"))
                .args(["--cache-dir"])
                .arg(dir.path())
                .args(["verify", "--n", "6", "--quick"])
                .output()
                .unwrap()
        };
        let warmup = run();
        let first = run();
        let second = run();
        let pass = warmup.status.success()
            && first.status.success()
            && second.status.success()
            && first.stdout == second.stdout;
        gate.record(
            "cli_determinism",
            pass,
            format!("exit {:?}, identical {}", first.status.code(), first.stdout == second.stdout),
        );
    }

    let failed: Vec<&str> = gate.results.iter().filter(|(p, _, _)| !p).map(|(_, n, _)| *n).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
