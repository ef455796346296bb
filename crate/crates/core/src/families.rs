//! Translated Delaunay families, the refined asymptotic expansion, PDE
//! residuals of axisymmetric fields, and the radial Pohozaev invariant.

use crate::delaunay::DelaunayProfile;
use crate::error::{Error, Result};
use crate::numerics::{fd_weights, gauss_legendre, linfit};
use crate::ode::pos_pow;
use crate::params::DimensionParams;

/// Which translation generated the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    /// v-bar: plain translation, singular at t = -log|a|.
    Inner,
    /// Kelvin-conjugated translation, singular at t = +log|a|.
    Kelvin,
}

/// A translated Delaunay solution v_{eps,a} or v-bar_{eps,a}, reduced to
/// the axisymmetric variables (t, s) with s = <theta, a/|a|>.
pub struct TranslationSpec<'a> {
    pub profile: &'a DelaunayProfile,
    pub a_mag: f64,
    pub kind: FamilyKind,
    pub t_shift: f64,
}

/// Half-width of the excluded neighborhood around the singular time.
const SINGULAR_GUARD: f64 = 0.5;

impl<'a> TranslationSpec<'a> {
    pub fn new(profile: &'a DelaunayProfile, a_mag: f64, kind: FamilyKind, t_shift: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&a_mag) {
            return Err(Error::InvalidArgument(format!("|a| = {a_mag} outside [0, 0.5]")));
        }
        Ok(Self { profile, a_mag, kind, t_shift })
    }

    /// Time at which the family is singular (at s = 1), if |a| > 0.
    pub fn singular_time(&self) -> Option<f64> {
        if self.a_mag == 0.0 {
            return None;
        }
        Some(match self.kind {
            FamilyKind::Inner => -self.a_mag.ln(),
            FamilyKind::Kelvin => self.a_mag.ln(),
        })
    }

    fn guard(&self, t: f64) -> Result<()> {
        if let Some(ts) = self.singular_time() {
            if (t - ts).abs() < SINGULAR_GUARD {
                return Err(Error::SingularPoint(format!(
                    "t = {t} within {SINGULAR_GUARD} of the singular time {ts}"
                )));
            }
        }
        Ok(())
    }
}

/// Evaluate the family at (t, s), s = <theta, a/|a|> in [-1, 1].
///
/// Kelvin: rho^((4-n)/2) v_eps(t + T + log rho), rho = |theta - e^(-t) a|.
/// Inner:  rho^((4-n)/2) v_eps(t + T - log rho), rho = |theta - e^(+t) a|.
pub fn eval_family(spec: &TranslationSpec, t: f64, s: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&s) {
        return Err(Error::InvalidArgument(format!("s = {s} outside [-1, 1]")));
    }
    spec.guard(t)?;
    let n = spec.profile.params.n as f64;
    let (r, log_sign) = match spec.kind {
        FamilyKind::Kelvin => ((-t).exp() * spec.a_mag, 1.0),
        FamilyKind::Inner => (t.exp() * spec.a_mag, -1.0),
    };
    let rho_sq = 1.0 - 2.0 * s * r + r * r;
    if rho_sq < 1e-12 {
        return Err(Error::SingularPoint(format!("rho^2 = {rho_sq} at (t, s) = ({t}, {s})")));
    }
    let log_rho = 0.5 * rho_sq.ln();
    let arg = t + spec.t_shift + log_sign * log_rho;
    Ok(pos_pow(rho_sq, (4.0 - n) / 4.0) * spec.profile.eval(arg, 0))
}

/// Sup-over-s error of the first-order expansion
/// v_{eps,a}(t, s) ~ v_eps(t) + e^(-t) s |a| (-v' + ((n-4)/2) v)(t)
/// together with the decay rate fitted from log E(t) = log C - beta t.
pub struct ExpansionReport {
    /// (t, E(t)) samples.
    pub curve: Vec<(f64, f64)>,
    /// Fitted decay rate; the remainder is O(e^(-2t)), so ~2.
    pub beta_hat: f64,
}

pub fn expansion_error(
    spec: &TranslationSpec,
    t0: f64,
    t1: f64,
    nt: usize,
    ns: usize,
) -> Result<ExpansionReport> {
    if spec.kind != FamilyKind::Kelvin {
        return Err(Error::InvalidArgument("expansion is stated for the Kelvin family".into()));
    }
    if !(2.0..=12.0).contains(&t0) || !(t0..=12.0).contains(&t1) {
        return Err(Error::InvalidArgument(format!("t-range [{t0}, {t1}] outside [2, 12]")));
    }
    spec.guard(t0)?;
    spec.guard(t1)?;
    let prof = spec.profile;
    let c = (prof.params.n as f64 - 4.0) / 2.0;
    let mut curve = Vec::with_capacity(nt);
    for i in 0..nt {
        let t = t0 + (t1 - t0) * i as f64 / (nt - 1) as f64;
        let ts = t + spec.t_shift;
        let v = prof.eval(ts, 0);
        let w_minus = -prof.eval(ts, 1) + c * v;
        let mut sup = 0.0f64;
        for j in 0..ns {
            let s = -1.0 + 2.0 * j as f64 / (ns - 1) as f64;
            let exact = eval_family(spec, t, s)?;
            let approx = v + (-t).exp() * s * spec.a_mag * w_minus;
            sup = sup.max((exact - approx).abs());
        }
        curve.push((t, sup));
    }
    // Fit only where E is above round-off.
    let fit: Vec<(f64, f64)> = curve.iter().filter(|(_, e)| *e > 1e-14).copied().collect();
    let beta_hat = if fit.len() >= 2 {
        let xs: Vec<f64> = fit.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = fit.iter().map(|p| p.1.ln()).collect();
        -linfit(&xs, &ys).1
    } else {
        f64::INFINITY
    };
    Ok(ExpansionReport { curve, beta_hat })
}

/// Uniform (t, s) samples of an axisymmetric function on the cylinder.
pub struct AxisymField {
    pub ts: Vec<f64>,
    pub ss: Vec<f64>,
    /// vals[i][j] = v(ts[i], ss[j]).
    pub vals: Vec<Vec<f64>>,
    pub h_t: f64,
    pub h_s: f64,
}

impl AxisymField {
    /// Sample a closure on a uniform grid; s covers [-1, 1].
    pub fn sample<F: Fn(f64, f64) -> Result<f64>>(
        f: F,
        t0: f64,
        t1: f64,
        nt: usize,
        ns: usize,
    ) -> Result<Self> {
        if nt < 9 || ns < 9 {
            return Err(Error::GridTooCoarse(format!("grid {nt} x {ns} below 9 x 9")));
        }
        let h_t = (t1 - t0) / (nt - 1) as f64;
        let h_s = 2.0 / (ns - 1) as f64;
        let ts: Vec<f64> = (0..nt).map(|i| t0 + i as f64 * h_t).collect();
        let ss: Vec<f64> = (0..ns).map(|j| -1.0 + j as f64 * h_s).collect();
        let mut vals = Vec::with_capacity(nt);
        for &t in &ts {
            let mut row = Vec::with_capacity(ns);
            for &s in &ss {
                row.push(f(t, s.clamp(-1.0, 1.0))?);
            }
            vals.push(row);
        }
        Ok(Self { ts, ss, vals, h_t, h_s })
    }

    pub fn from_family(spec: &TranslationSpec, t0: f64, t1: f64, nt: usize, ns: usize) -> Result<Self> {
        Self::sample(|t, s| eval_family(spec, t, s), t0, t1, nt, ns)
    }
}

/// Centered stencils of 4th-order accuracy: 5 points for derivatives 1-2,
/// 7 points for 3-4.
struct Stencils {
    d1: Vec<f64>,
    d2: Vec<f64>,
    d3: Vec<f64>,
    d4: Vec<f64>,
}

fn make_stencils(h: f64) -> Stencils {
    let five: Vec<f64> = (-2..=2).map(|i| i as f64 * h).collect();
    let seven: Vec<f64> = (-3..=3).map(|i| i as f64 * h).collect();
    let w5 = fd_weights(0.0, &five, 2);
    let w7 = fd_weights(0.0, &seven, 4);
    Stencils { d1: w5[1].clone(), d2: w5[2].clone(), d3: w7[3].clone(), d4: w7[4].clone() }
}

fn apply<F: Fn(i64) -> f64>(w: &[f64], get: F) -> f64 {
    let half = (w.len() as i64 - 1) / 2;
    w.iter()
        .enumerate()
        .map(|(i, c)| c * get(i as i64 - half))
        .sum()
}

/// Sup-norm residual of the cylindrical PDE
/// v_tttt - C2 v_tt + C0 v + Lap^2 v + 2 Lap v_tt - (n(n-4)/2) Lap v
///   = K_nl v^p
/// over the interior grid, with Lap the axisymmetric sphere Laplacian
/// Lap f = (1-s^2) f_ss - (n-1) s f_s.
pub fn pde_residual(field: &AxisymField, params: &DimensionParams) -> Result<f64> {
    let nt = field.ts.len();
    let ns = field.ss.len();
    if nt < 13 || ns < 13 {
        return Err(Error::GridTooCoarse(format!("grid {nt} x {ns} too coarse for stencils")));
    }
    let st = make_stencils(field.h_t);
    let ss_st = make_stencils(field.h_s);
    let n = params.n as f64;
    // t-derivatives on the full s-range first; Lap(v_tt) then needs only
    // s-stencils of the dt2 grid.
    let mt = 3usize; // t margin
    let ms = 3usize; // s margin
    let mut dt2 = vec![vec![0.0f64; ns]; nt];
    let mut dt4 = vec![vec![0.0f64; ns]; nt];
    for i in mt..nt - mt {
        for j in 0..ns {
            dt2[i][j] = apply(&st.d2, |o| field.vals[(i as i64 + o) as usize][j]);
            dt4[i][j] = apply(&st.d4, |o| field.vals[(i as i64 + o) as usize][j]);
        }
    }
    let lap = |s: f64, f1: f64, f2: f64| (1.0 - s * s) * f2 - (n - 1.0) * s * f1;
    let mut worst = 0.0f64;
    for i in mt..nt - mt {
        for j in ms..ns - ms {
            let s = field.ss[j];
            let v = field.vals[i][j];
            let row = &field.vals[i];
            let f1 = apply(&ss_st.d1, |o| row[(j as i64 + o) as usize]);
            let f2 = apply(&ss_st.d2, |o| row[(j as i64 + o) as usize]);
            let f3 = apply(&ss_st.d3, |o| row[(j as i64 + o) as usize]);
            let f4 = apply(&ss_st.d4, |o| row[(j as i64 + o) as usize]);
            // Lap^2 f expanded in s-derivatives of f: with g = Lap f,
            // g'  = (1-s^2) f3 - (n+1) s f2 - (n-1) f1
            // g'' = (1-s^2) f4 - (n+3) s f3 - 2n f2.
            let g = lap(s, f1, f2);
            let gp = (1.0 - s * s) * f3 - (n + 1.0) * s * f2 - (n - 1.0) * f1;
            let gpp = (1.0 - s * s) * f4 - (n + 3.0) * s * f3 - 2.0 * n * f2;
            let lap2 = (1.0 - s * s) * gpp - (n - 1.0) * s * gp;
            let d2row = &dt2[i];
            let w1 = apply(&ss_st.d1, |o| d2row[(j as i64 + o) as usize]);
            let w2 = apply(&ss_st.d2, |o| d2row[(j as i64 + o) as usize]);
            let lap_dt2 = lap(s, w1, w2);
            let res = dt4[i][j] - params.c2 * dt2[i][j] + params.c0 * v + lap2
                + 2.0 * lap_dt2
                - n * (n - 4.0) / 2.0 * g
                - params.k_nl * pos_pow(v, params.p);
            worst = worst.max(res.abs());
        }
    }
    Ok(worst)
}

/// Jet of an axisymmetric function at one (t, s) point, as needed by the
/// radial Pohozaev integrand.
#[derive(Debug, Clone, Copy, Default)]
pub struct PohoJet {
    pub v: f64,
    pub vt: f64,
    pub vtt: f64,
    pub vttt: f64,
    pub vs: f64,
    pub vss: f64,
    pub vts: f64,
}

/// The radial Pohozaev invariant at time t:
///
/// H_rad(v)(t) = int_{S^(n-1)} [ -v_t v_ttt + v_tt^2/2
///   + ((n(n-4)+8)/4) v_t^2 - (n^2(n-4)^2/32) v^2
///   + ((n-4)^2(n^2-4)/32) v^(2n/(n-4)) - (Lap v)^2/2
///   - (n(n-4)/4) |grad_theta v|^2 + |grad_theta v_t|^2 ] dsigma,
///
/// reduced to a weighted integral over s in [-1, 1] by axisymmetry.
pub fn h_rad<F: Fn(f64) -> Result<PohoJet>>(
    params: &DimensionParams,
    jet_at_s: F,
    n_quad: usize,
) -> Result<f64> {
    let n = params.n as f64;
    let (nodes, weights) = gauss_legendre(n_quad);
    let mut acc = 0.0;
    for (&s, &w) in nodes.iter().zip(&weights) {
        let j = jet_at_s(s)?;
        let one_m = 1.0 - s * s;
        let lap = one_m * j.vss - (n - 1.0) * s * j.vs;
        let grad_sq = one_m * j.vs * j.vs;
        let grad_t_sq = one_m * j.vts * j.vts;
        let integrand = -j.vt * j.vttt + 0.5 * j.vtt * j.vtt
            + (n * (n - 4.0) + 8.0) / 4.0 * j.vt * j.vt
            - n * n * (n - 4.0) * (n - 4.0) / 32.0 * j.v * j.v
            + (n - 4.0) * (n - 4.0) * (n * n - 4.0) / 32.0 * pos_pow(j.v, 2.0 * n / (n - 4.0))
            - 0.5 * lap * lap
            - n * (n - 4.0) / 4.0 * grad_sq
            + grad_t_sq;
        acc += w * pos_pow(one_m, (n - 3.0) / 2.0) * integrand;
    }
    Ok(params.sphere_area_nm2 * acc)
}

/// Pohozaev jets of a translated family by centered finite differences in
/// t and s (order 4; 7-point stencils for the third t-derivative).
pub fn family_poho_jet(spec: &TranslationSpec, t: f64, s: f64, h: f64) -> Result<PohoJet> {
    let st = make_stencils(h);
    let sc = s.min(1.0 - 3.5 * h).max(-1.0 + 3.5 * h);
    let at = |ot: i64, os: i64| eval_family(spec, t + ot as f64 * h, sc + os as f64 * h);
    // Gather once; eval_family is cheap but fallible.
    let mut grid = [[0.0f64; 7]; 7];
    for (a, row) in grid.iter_mut().enumerate() {
        for (b, x) in row.iter_mut().enumerate() {
            *x = at(a as i64 - 3, b as i64 - 3)?;
        }
    }
    let v = grid[3][3];
    let vt = apply(&st.d1, |o| grid[(3 + o) as usize][3]);
    let vtt = apply(&st.d2, |o| grid[(3 + o) as usize][3]);
    let vttt = apply(&st.d3, |o| grid[(3 + o) as usize][3]);
    let vs = apply(&st.d1, |o| grid[3][(3 + o) as usize]);
    let vss = apply(&st.d2, |o| grid[3][(3 + o) as usize]);
    let vts = apply(&st.d1, |ot| apply(&st.d1, |os| grid[(3 + ot) as usize][(3 + os) as usize]));
    // Shifted stencil center changes vs/vss meaning if sc != s; callers
    // pass quadrature nodes in (-1, 1) so the clamp rarely binds.
    let _ = v;
    Ok(PohoJet { v: grid[3][3], vt, vtt, vttt, vs, vss, vts })
}

/// H_rad of a radial profile: the angular terms vanish and the result is
/// sphere_area * H_eps.
pub fn h_rad_radial(profile: &DelaunayProfile, t: f64, n_quad: usize) -> Result<f64> {
    h_rad(
        &profile.params,
        |_s| {
            Ok(PohoJet {
                v: profile.eval(t, 0),
                vt: profile.eval(t, 1),
                vtt: profile.eval(t, 2),
                vttt: profile.eval(t, 3),
                ..Default::default()
            })
        },
        n_quad,
    )
}

/// CSV for an expansion-error curve: header plus (t, E) rows and the
/// fitted rate in a trailing comment-free summary column.
pub fn expansion_csv(report: &ExpansionReport) -> String {
    let mut out = String::from("t,sup_error,beta_hat\n");
    for (t, e) in &report.curve {
        out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", t, e, report.beta_hat));
    }
    out
}

/// CSV for an H_rad table: (t, value) rows.
pub fn h_rad_csv(rows: &[(f64, f64)]) -> String {
    let mut out = String::from("t,h_rad\n");
    for (t, v) in rows {
        out.push_str(&format!("{:.16e},{:.16e}\n", t, v));
    }
    out
}
