//! Construction of the periodic Delaunay profile v_eps by shooting on the
//! second derivative at the minimum, plus evaluation, differentiation in
//! the necksize, and persistence.

use crate::error::{Error, Result};
use crate::numerics::{hermite2_coeffs, hermite2_eval};
use crate::ode::{hamiltonian, integrate, pos_pow, CylState, EventKind, EventSpec, V_CAPMAX};
use crate::params::DimensionParams;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;
/// Samples per period.
pub const DEFAULT_SAMPLES: usize = 2048;
/// Below this fraction of eps_n the period blows up and the shoot is
/// outside the supported range.
pub const EPS_LOWER_FRACTION: f64 = 0.05;
/// Within this distance of eps_n the shooting problem degenerates and the
/// constant profile is returned by convention.
pub const EPS_CYL_SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileMeta {
    /// Number of bracket-scan points used on the geometric b grid.
    pub grid_size: usize,
    /// Bracket on b that was polished.
    pub bracket: (f64, f64),
    /// |v'''| at the half-period event for the polished b.
    pub shoot_residual: f64,
    /// sup_t |v(T - t) - v(t)| over the sample grid.
    pub symmetry_residual: f64,
    /// max_t |H(t) - H(0)| over the sample grid.
    pub energy_drift: f64,
    /// SHA-256 of the sample bytes.
    pub checksum: String,
}

/// One full period of a Delaunay solution: equispaced 4-jet samples on
/// [0, T_eps] plus a periodic piecewise-Hermite interpolant.
#[derive(Debug, Clone)]
pub struct DelaunayProfile {
    pub params: DimensionParams,
    pub epsilon: f64,
    pub b_star: f64,
    pub period: f64,
    pub energy: f64,
    pub samples: Vec<CylState>,
    pub tol: f64,
    pub meta: ProfileMeta,
    /// Newton-form Hermite coefficients per interval, one per component
    /// pair; rebuilt from the samples, never serialized.
    interp: Vec<[f64; 8]>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ProfileFile {
    schema_version: u32,
    n: u32,
    epsilon: f64,
    b_star: f64,
    period: f64,
    energy: f64,
    tol: f64,
    samples: Vec<CylState>,
    meta: ProfileMeta,
}

fn sample_checksum(samples: &[CylState]) -> String {
    let mut hasher = Sha256::new();
    for s in samples {
        for x in [s.t, s.v, s.v1, s.v2, s.v3] {
            hasher.update(x.to_le_bytes());
        }
    }
    format!("{:x}", hasher.finalize())
}

/// Shoot from (eps, 0, b, 0) to the first maximum of v. Returns the event
/// time t1 and v''' there, or None when the shoot leaves (0, V_CAPMAX)
/// before reaching a maximum.
/// Outcome of one shot from the candidate minimum (eps, 0, b, 0).
#[derive(Debug, Clone, Copy)]
enum ShootOutcome {
    /// First maximum reached at t1 with the given v''' there.
    Max(f64, f64),
    /// v ran past V_CAPMAX without turning: the overshooting side.
    EscapeUp,
    /// v fell through 0 without a maximum: the undershooting side.
    EscapeDown,
    /// Neither event within the horizon.
    NoEvent,
}

impl ShootOutcome {
    /// Sign of the extended shooting functional. The Delaunay b sits at
    /// the zero of v'''(t1), which for stiff necks lies a hair below the
    /// turn/overshoot boundary; escapes therefore carry the sign of the
    /// side they overshoot to.
    fn sign(&self) -> Option<f64> {
        match self {
            ShootOutcome::Max(_, f) => Some(f.signum()),
            ShootOutcome::EscapeUp => Some(1.0),
            ShootOutcome::EscapeDown => Some(-1.0),
            ShootOutcome::NoEvent => None,
        }
    }
}

fn shoot(params: &DimensionParams, eps: f64, b: f64, tol: f64) -> Result<ShootOutcome> {
    let s0 = CylState::new(0.0, eps, 0.0, b, 0.0);
    let traj = integrate(params, &s0, 200.0, tol, EventSpec::vdot_down())?;
    Ok(match traj.events.first() {
        Some(&(t1, EventKind::VdotZeroDown)) => ShootOutcome::Max(t1, traj.last().v3),
        Some(&(_, EventKind::VCap)) => ShootOutcome::EscapeUp,
        Some(&(_, EventKind::VZero)) => ShootOutcome::EscapeDown,
        _ => ShootOutcome::NoEvent,
    })
}

pub fn solve_delaunay(params: &DimensionParams, epsilon: f64, tol: f64) -> Result<DelaunayProfile> {
    let lo = EPS_LOWER_FRACTION * params.eps_n;
    if !(epsilon >= lo && epsilon <= params.eps_n) {
        return Err(Error::EpsilonOutOfRange { eps: epsilon, lo, hi: params.eps_n });
    }
    if tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    if (epsilon - params.eps_n).abs() <= EPS_CYL_SNAP {
        return Ok(constant_profile(params, tol));
    }

    // Bracket scan on a geometric b grid. The zero of the shooting
    // functional can sit right at the boundary between turning shoots and
    // upward escapes, so escapes carry a sign too (see ShootOutcome).
    let grid_size = 121usize;
    let (b_lo, b_hi) = (1e-6f64, 10.0f64);
    let ratio = (b_hi / b_lo).powf(1.0 / (grid_size as f64 - 1.0));
    let mut prev: Option<(f64, f64, bool)> = None;
    let mut bracket = None;
    let scan_tol = tol.max(1e-9);
    let mut n_valid = 0usize;
    for i in 0..grid_size {
        let b = b_lo * ratio.powi(i as i32);
        let outcome = shoot(params, epsilon, b, scan_tol)?;
        let is_max = matches!(outcome, ShootOutcome::Max(..));
        n_valid += is_max as usize;
        if let Some(g) = outcome.sign() {
            if let Some((bp, gp, max_p)) = prev {
                // A genuine bracket needs at least one real turning shot.
                if gp * g <= 0.0 && (max_p || is_max) {
                    bracket = Some((bp, b));
                    break;
                }
            }
            prev = Some((b, g, is_max));
        } else {
            prev = None;
        }
    }
    let (bp, bq) = bracket.ok_or_else(|| {
        Error::NoBracket(format!(
            "no sign change of v''' at the first maximum over {grid_size} geometric b in [{b_lo}, {b_hi}] \
             ({n_valid} shoots reached a maximum inside (0, {V_CAPMAX}))"
        ))
    })?;

    // Bisection on the extended sign; track the best turning shot so the
    // final b lands on the valid (maximum-reaching) side.
    let (mut lo, mut hi) = (bp, bq);
    let mut best: Option<(f64, f64, f64)> = None; // (b, t1, v3)
    let mut record = |b: f64, out: &ShootOutcome| {
        if let ShootOutcome::Max(t1, f) = out {
            match best {
                Some((_, _, fb)) if f.abs() >= fb.abs() => {}
                _ => best = Some((b, *t1, *f)),
            }
        }
    };
    let out_lo = shoot(params, epsilon, lo, tol)?;
    let out_hi = shoot(params, epsilon, hi, tol)?;
    record(lo, &out_lo);
    record(hi, &out_hi);
    let mut sign_lo = out_lo.sign().ok_or_else(|| {
        Error::NoBracket("bracket endpoint lost its event at the polish tolerance".into())
    })?;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() < 1e-16 * (1.0 + mid.abs()) {
            break;
        }
        let out = shoot(params, epsilon, mid, tol)?;
        record(mid, &out);
        match out.sign() {
            Some(g) if g * sign_lo <= 0.0 => hi = mid,
            Some(g) => {
                lo = mid;
                sign_lo = g;
            }
            None => hi = mid,
        }
    }
    let (b_star, t1_coarse, mut residual) = best.ok_or_else(|| {
        Error::NoBracket("bisection never produced a turning shot".into())
    })?;

    // Re-polish the half-period event well below the shooting tolerance;
    // errors committed near t = 0 ride the unstable direction, so a finer
    // pass pins t1 and v''' there much more accurately. If the refined
    // shoot escapes instead (b_star sits at the turn/overshoot boundary),
    // keep the coarse event.
    let s0 = CylState::new(0.0, epsilon, 0.0, b_star, 0.0);
    let tol_fine = (tol * 1e-3).max(1e-14);
    let mut t1 = t1_coarse;
    if let Ok(ShootOutcome::Max(t1f, res)) = shoot(params, epsilon, b_star, tol_fine) {
        t1 = t1f;
        residual = res;
    }
    let period = 2.0 * t1;

    // Sample the half period [0, t1] with dense output and extend by the
    // even reflection about t1: the orbit of (eps, 0, b, 0) is symmetric
    // under t -> -t, so the true solution satisfies v(T - t) = v(t). The
    // mirrored grid makes that symmetry exact by construction and keeps
    // the e^(mu_0 t) error amplification to half a period.
    let traj = integrate(params, &s0, t1, tol_fine, EventSpec::none())?;
    let m = DEFAULT_SAMPLES;
    let half = m / 2;
    let mut samples = Vec::with_capacity(m + 1);
    for i in 0..=half {
        let t = period * i as f64 / m as f64;
        let jet = traj
            .eval(t.min(t1))
            .ok_or_else(|| Error::InvariantViolation(format!("dense output missing at t = {t}")))?;
        samples.push(CylState::new(t, jet[0], jet[1], jet[2], jet[3]));
    }
    for i in half + 1..=m {
        let t = period * i as f64 / m as f64;
        let src = samples[m - i];
        samples.push(CylState::new(t, src.v, -src.v1, src.v2, -src.v3));
    }
    let energy = hamiltonian(params, &s0)?;
    let meta = ProfileMeta {
        grid_size,
        bracket: (bp, bq),
        shoot_residual: residual.abs(),
        symmetry_residual: 0.0,
        energy_drift: 0.0,
        checksum: String::new(),
    };
    let mut profile = DelaunayProfile {
        params: *params,
        epsilon,
        b_star,
        period,
        energy,
        samples,
        tol,
        meta,
        interp: Vec::new(),
    };
    profile.build_interp();
    profile.meta.symmetry_residual = profile.symmetry_residual();
    profile.meta.energy_drift = profile.energy_drift()?;
    profile.meta.checksum = sample_checksum(&profile.samples);
    profile.verify_invariants()?;
    Ok(profile)
}

fn constant_profile(params: &DimensionParams, tol: f64) -> DelaunayProfile {
    let m = DEFAULT_SAMPLES;
    let period = params.t_cyl;
    let samples: Vec<CylState> = (0..=m)
        .map(|i| CylState::new(period * i as f64 / m as f64, params.v_cyl, 0.0, 0.0, 0.0))
        .collect();
    let checksum = sample_checksum(&samples);
    let mut profile = DelaunayProfile {
        params: *params,
        epsilon: params.eps_n,
        b_star: 0.0,
        period,
        energy: params.h_cyl,
        samples,
        tol,
        meta: ProfileMeta {
            grid_size: 0,
            bracket: (0.0, 0.0),
            shoot_residual: 0.0,
            symmetry_residual: 0.0,
            energy_drift: 0.0,
            checksum,
        },
        interp: Vec::new(),
    };
    profile.build_interp();
    profile
}

impl DelaunayProfile {
    pub fn is_cylinder(&self) -> bool {
        self.b_star == 0.0 && (self.epsilon - self.params.eps_n).abs() <= EPS_CYL_SNAP
    }

    fn build_interp(&mut self) {
        let m = self.samples.len() - 1;
        let h = self.period / m as f64;
        self.interp = self
            .samples
            .windows(2)
            .map(|w| {
                hermite2_coeffs(
                    [w[0].v, w[0].v1, w[0].v2, w[0].v3],
                    [w[1].v, w[1].v1, w[1].v2, w[1].v3],
                    h,
                )
            })
            .collect();
    }

    /// Evaluate the order-th t-derivative (order 0..=4) of the periodic
    /// extension at arbitrary t. The fourth derivative comes from the ODE
    /// itself: differentiating the sampled jets a fourth time would
    /// amplify their noise by 1/h^4, while v'''' = C2 v'' - C0 v + K v^p
    /// holds exactly along the solution.
    pub fn eval(&self, t: f64, order: usize) -> f64 {
        assert!(order <= 4, "derivative order must be 0..=4");
        if order == 4 {
            let p = &self.params;
            let v = self.eval(t, 0);
            return p.c2 * self.eval(t, 2) - p.c0 * v + p.k_nl * pos_pow(v, p.p);
        }
        let m = self.interp.len();
        let mut u = (t / self.period).fract();
        if u < 0.0 {
            u += 1.0;
        }
        let h = self.period / m as f64;
        let mut i = (u * m as f64).floor() as usize;
        if i >= m {
            i = m - 1;
        }
        let x = u * self.period - i as f64 * h;
        hermite2_eval(&self.interp[i], h, x)[order]
    }

    /// 4-jet of the periodic extension at t.
    pub fn eval_state(&self, t: f64) -> CylState {
        CylState::new(t, self.eval(t, 0), self.eval(t, 1), self.eval(t, 2), self.eval(t, 3))
    }

    pub fn symmetry_residual(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| (self.eval(self.period - s.t, 0) - s.v).abs())
            .fold(0.0, f64::max)
    }

    pub fn energy_drift(&self) -> Result<f64> {
        let h0 = self.energy;
        let mut worst: f64 = 0.0;
        for s in &self.samples {
            worst = worst.max((hamiltonian(&self.params, s)? - h0).abs());
        }
        Ok(worst)
    }

    pub fn verify_invariants(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvariantViolation(msg));
        let first = &self.samples[0];
        let last = self.samples.last().unwrap();
        if (first.v - self.epsilon).abs() > 10.0 * self.tol
            || first.v1.abs() > 10.0 * self.tol
            || first.v3.abs() > 10.0 * self.tol
        {
            return fail(format!(
                "initial jet is not the necksize minimum: v(0)={}, v'(0)={}, v'''(0)={}",
                first.v, first.v1, first.v3
            ));
        }
        if (last.t - self.period).abs() > 1e-9 * (1.0 + self.period) {
            return fail(format!(
                "sample grid does not span one period: last t = {}, period = {}",
                last.t, self.period
            ));
        }
        if self.period <= 0.0 {
            return fail(format!("period must be positive, got {}", self.period));
        }
        let vmin = self.samples.iter().map(|s| s.v).fold(f64::INFINITY, f64::min);
        let vmax = self.samples.iter().map(|s| s.v).fold(f64::NEG_INFINITY, f64::max);
        if vmin < self.epsilon - 100.0 * self.tol {
            return fail(format!("v dips below the necksize: min v = {vmin}, eps = {}", self.epsilon));
        }
        if vmax >= 1.0 {
            return fail(format!("v must stay below 1, got max v = {vmax}"));
        }
        // The sample grid is mirrored about the half period, so the
        // symmetry residual only measures interpolation consistency.
        let sym = self.symmetry_residual();
        if sym > 10.0 * self.tol {
            return fail(format!("symmetry residual {sym} exceeds 10 tol"));
        }
        let drift = self.energy_drift()?;
        if drift > 100.0 * self.tol {
            return fail(format!("first-integral drift {drift} exceeds 100 tol"));
        }
        if !self.is_cylinder() {
            // Exactly one interior maximum: v' changes sign + -> - once.
            // v' vanishes at both endpoints, so count transitions with a
            // hysteresis band to keep endpoint noise from registering.
            let sup_v1 = self.samples.iter().map(|s| s.v1.abs()).fold(0.0, f64::max);
            let thr = 1e-6 * sup_v1;
            let mut down = 0usize;
            let mut up = 0usize;
            let mut last_sign = 0.0f64;
            for s in &self.samples {
                if s.v1.abs() <= thr {
                    continue;
                }
                let sign = s.v1.signum();
                if last_sign > 0.0 && sign < 0.0 {
                    down += 1;
                }
                if last_sign < 0.0 && sign > 0.0 {
                    up += 1;
                }
                last_sign = sign;
            }
            if down != 1 || up != 0 {
                return fail(format!(
                    "expected exactly one interior critical point (the maximum), saw {down} down / {up} up crossings"
                ));
            }
        }
        Ok(())
    }

    /// Mean of f over one period by the trapezoid rule on the sample grid.
    pub fn period_mean<F: Fn(&CylState) -> f64>(&self, f: F) -> f64 {
        let m = self.samples.len() - 1;
        let mut acc = 0.5 * (f(&self.samples[0]) + f(&self.samples[m]));
        for s in &self.samples[1..m] {
            acc += f(s);
        }
        acc / m as f64
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = ProfileFile {
            schema_version: SCHEMA_VERSION,
            n: self.params.n,
            epsilon: self.epsilon,
            b_star: self.b_star,
            period: self.period,
            energy: self.energy,
            tol: self.tol,
            samples: self.samples.clone(),
            meta: self.meta.clone(),
        };
        let json = serde_json::to_string_pretty(&file)?;
        // Atomic write-then-rename.
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, json)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<DelaunayProfile> {
        let text = std::fs::read_to_string(path)?;
        let file: ProfileFile =
            serde_json::from_str(&text).map_err(|e| Error::Schema(e.to_string()))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "schema version {} unsupported (expected {SCHEMA_VERSION})",
                file.schema_version
            )));
        }
        let computed = sample_checksum(&file.samples);
        if computed != file.meta.checksum {
            return Err(Error::Checksum { stored: file.meta.checksum.clone(), computed });
        }
        let params = crate::params::make_params(file.n as i64)?;
        let mut profile = DelaunayProfile {
            params,
            epsilon: file.epsilon,
            b_star: file.b_star,
            period: file.period,
            energy: file.energy,
            samples: file.samples,
            tol: file.tol,
            meta: file.meta,
            interp: Vec::new(),
        };
        profile.build_interp();
        profile.verify_invariants()?;
        Ok(profile)
    }
}

/// Central epsilon-difference of aligned profiles.
#[derive(Debug, Clone)]
pub struct EpsDerivative {
    pub epsilon: f64,
    pub delta: f64,
    /// Reference period (mean of the two side periods).
    pub period_ref: f64,
    /// Sample times in [0, period_ref].
    pub ts: Vec<f64>,
    /// dv_eps/deps sampled at `ts`.
    pub w0_minus: Vec<f64>,
    pub dt_deps: f64,
    pub plus: DelaunayProfile,
    pub minus: DelaunayProfile,
}

impl EpsDerivative {
    /// Evaluate dv_eps/deps at arbitrary t (not only the stored grid).
    pub fn eval(&self, t: f64) -> f64 {
        (self.plus.eval(t, 0) - self.minus.eval(t, 0)) / (2.0 * self.delta)
    }
}

pub fn eps_derivative(
    params: &DimensionParams,
    epsilon: f64,
    delta: f64,
    tol: f64,
) -> Result<EpsDerivative> {
    if delta <= 0.0 {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    let plus = solve_delaunay(params, epsilon + delta, tol)?;
    let minus = solve_delaunay(params, epsilon - delta, tol)?;
    let period_ref = 0.5 * (plus.period + minus.period);
    // Alignment check: both profiles are normalized with their minimum at
    // t = 0; a large delta shows up as wildly different periods.
    if (plus.period - minus.period).abs() > 0.2 * period_ref {
        return Err(Error::InvalidArgument(format!(
            "delta = {delta} too large: side periods {} and {} fail alignment",
            plus.period, minus.period
        )));
    }
    let m = 1024usize;
    let mut ts = Vec::with_capacity(m + 1);
    let mut w0 = Vec::with_capacity(m + 1);
    for i in 0..=m {
        let t = period_ref * i as f64 / m as f64;
        ts.push(t);
        w0.push((plus.eval(t, 0) - minus.eval(t, 0)) / (2.0 * delta));
    }
    let dt_deps = (plus.period - minus.period) / (2.0 * delta);
    Ok(EpsDerivative {
        epsilon,
        delta,
        period_ref,
        ts,
        w0_minus: w0,
        dt_deps,
        plus,
        minus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::make_params;
    use approx::assert_relative_eq;

    const TOL: f64 = 1e-10;

    #[test]
    fn cylinder_degenerate_case() {
        let p = make_params(6).unwrap();
        let prof = solve_delaunay(&p, p.eps_n, TOL).unwrap();
        assert!(prof.is_cylinder());
        assert_eq!(prof.b_star, 0.0);
        assert_relative_eq!(prof.period, 3.7480675995976298, max_relative = 1e-10);
        assert_relative_eq!(prof.eval(1.234, 0), p.v_cyl, max_relative = 1e-14);
    }

    #[test]
    fn rejects_out_of_range_epsilon() {
        let p = make_params(6).unwrap();
        assert!(matches!(
            solve_delaunay(&p, 1.1, TOL),
            Err(Error::EpsilonOutOfRange { .. })
        ));
        assert!(solve_delaunay(&p, 0.01 * p.eps_n, TOL).is_err());
    }

    #[test]
    fn delaunay_profile_basic_properties() {
        let p = make_params(6).unwrap();
        let prof = solve_delaunay(&p, 0.5, TOL).unwrap();
        assert!(prof.energy > p.h_cyl && prof.energy < 0.0, "H_eps = {}", prof.energy);
        assert!(prof.period > 0.0);
        // Energy identity at the minimum jet.
        let n = p.n as f64;
        let direct = 0.5 * prof.b_star * prof.b_star - p.c0 / 2.0 * prof.epsilon.powi(2)
            + (n - 4.0) * (n - 4.0) * (n * n - 4.0) / 32.0
                * prof.epsilon.powf(2.0 * n / (n - 4.0));
        assert_relative_eq!(prof.energy, direct, epsilon = 1e-10);
    }

    #[test]
    fn period_decreases_in_epsilon() {
        let p = make_params(6).unwrap();
        let t70 = solve_delaunay(&p, 0.70, TOL).unwrap().period;
        let t77 = solve_delaunay(&p, 0.77, TOL).unwrap().period;
        assert!(t70 > t77, "T(0.70) = {t70} should exceed T(0.77) = {t77}");
    }

    #[test]
    fn eval_periodicity_and_ode_consistency() {
        let p = make_params(6).unwrap();
        let prof = solve_delaunay(&p, 0.5, TOL).unwrap();
        for k in 0..=4usize {
            for &t in &[0.3, 1.1, 2.7] {
                assert_relative_eq!(
                    prof.eval(t + prof.period, k),
                    prof.eval(t, k),
                    epsilon = 1e-12,
                    max_relative = 1e-12
                );
            }
        }
        // Order-4 eval (defined through the ODE) agrees with a central
        // difference of the interpolated third derivative.
        let d = 1e-2;
        let mut worst: f64 = 0.0;
        for i in 0..200 {
            let t = prof.period * (i as f64 + 0.37) / 200.0;
            let fd = (prof.eval(t + d, 3) - prof.eval(t - d, 3)) / (2.0 * d);
            worst = worst.max((prof.eval(t, 4) - fd).abs());
        }
        assert!(worst < 1e-2, "order-4 eval vs finite difference: {worst}");
    }

    #[test]
    fn eps_derivative_basics() {
        let p = make_params(6).unwrap();
        let delta = 1e-4;
        let d = eps_derivative(&p, 0.5, delta, TOL).unwrap();
        assert!((d.w0_minus[0] - 1.0).abs() <= 10.0 * delta, "w0^-(0) = {}", d.w0_minus[0]);
        assert!(d.dt_deps < 0.0, "dT/deps = {}", d.dt_deps);
    }

    #[test]
    fn eps_derivative_linear_growth_relation() {
        // w0^-(t + T) - w0^-(t) ~ -dT/deps * v'_eps(t).
        let p = make_params(6).unwrap();
        let delta = 1e-4;
        let d = eps_derivative(&p, 0.5, delta, TOL).unwrap();
        let center = solve_delaunay(&p, 0.5, TOL).unwrap();
        let t_ref = center.period;
        let mut worst: f64 = 0.0;
        for i in 0..64 {
            let t = t_ref * i as f64 / 64.0;
            let lhs = d.eval(t + t_ref) - d.eval(t);
            let rhs_ = -d.dt_deps * center.eval(t, 1);
            worst = worst.max((lhs - rhs_).abs());
        }
        assert!(worst < 50.0 * delta, "sup error {worst} not O(delta)");
    }

    #[test]
    fn save_load_roundtrip() {
        let p = make_params(6).unwrap();
        let prof = solve_delaunay(&p, 0.6, TOL).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("profile.json");
        prof.save(&path).unwrap();
        let loaded = DelaunayProfile::load(&path).unwrap();
        assert_eq!(prof.samples.len(), loaded.samples.len());
        for (a, b) in prof.samples.iter().zip(&loaded.samples) {
            assert_eq!(a.v.to_bits(), b.v.to_bits());
            assert_eq!(a.v3.to_bits(), b.v3.to_bits());
        }
        assert_eq!(prof.period.to_bits(), loaded.period.to_bits());
    }

    #[test]
    fn load_rejects_tampering_and_missing_fields() {
        let p = make_params(6).unwrap();
        let prof = solve_delaunay(&p, 0.6, TOL).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("profile.json");
        prof.save(&path).unwrap();

        // Tampered period: checksum still matches, invariants do not.
        let text = std::fs::read_to_string(&path).unwrap();
        let mut val: serde_json::Value = serde_json::from_str(&text).unwrap();
        val["period"] = serde_json::json!(prof.period * 1.01);
        let tampered = dir.path().join("tampered.json");
        std::fs::write(&tampered, serde_json::to_string(&val).unwrap()).unwrap();
        assert!(matches!(
            DelaunayProfile::load(&tampered),
            Err(Error::InvariantViolation(_))
        ));

        // Missing field: schema error.
        let mut val2: serde_json::Value = serde_json::from_str(&text).unwrap();
        val2.as_object_mut().unwrap().remove("b_star");
        let missing = dir.path().join("missing.json");
        std::fs::write(&missing, serde_json::to_string(&val2).unwrap()).unwrap();
        assert!(matches!(DelaunayProfile::load(&missing), Err(Error::Schema(_))));

        // Tampered sample: checksum failure.
        let mut val3: serde_json::Value = serde_json::from_str(&text).unwrap();
        val3["samples"][100]["v"] = serde_json::json!(0.123456);
        let bad = dir.path().join("badsum.json");
        std::fs::write(&bad, serde_json::to_string(&val3).unwrap()).unwrap();
        assert!(matches!(DelaunayProfile::load(&bad), Err(Error::Checksum { .. })));
    }
}
