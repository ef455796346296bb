//! The fourth-order ODE right-hand side, its first integral, and an
//! adaptive Dormand-Prince 5(4) integrator with dense output and
//! event detection.

use crate::error::{Error, Result};
use crate::params::DimensionParams;
use serde::{Deserialize, Serialize};

/// Upper cap on v; a Delaunay orbit satisfies 0 < v < 1, so any excursion
/// past this value is a diverging shoot.
pub const V_CAPMAX: f64 = 1.5;

/// The 4-jet (v, v', v'', v''') of a solution at time t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylState {
    pub t: f64,
    pub v: f64,
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
}

impl CylState {
    pub fn new(t: f64, v: f64, v1: f64, v2: f64, v3: f64) -> Self {
        Self { t, v, v1, v2, v3 }
    }

    pub fn jet(&self) -> [f64; 4] {
        [self.v, self.v1, self.v2, self.v3]
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.v.is_finite()
            && self.v1.is_finite()
            && self.v2.is_finite()
            && self.v3.is_finite()
    }
}

/// v^p computed as exp(p ln v); caller guarantees v > 0.
#[inline]
pub fn pos_pow(v: f64, p: f64) -> f64 {
    (p * v.ln()).exp()
}

/// Right-hand side of the first-order system equivalent to
/// v'''' = C2 v'' - C0 v + K_nl v^p.
pub fn rhs(params: &DimensionParams, state: &CylState) -> Result<[f64; 4]> {
    if state.v <= 0.0 {
        return Err(Error::NonPositiveV(state.v));
    }
    Ok([
        state.v1,
        state.v2,
        state.v3,
        params.c2 * state.v2 - params.c0 * state.v + params.k_nl * pos_pow(state.v, params.p),
    ])
}

/// First integral of the ODE:
/// H = -v' v''' + v''^2/2 + (C2/2) v'^2 - (C0/2) v^2 + ((n-4)^2(n^2-4)/32) v^(2n/(n-4)).
pub fn hamiltonian(params: &DimensionParams, state: &CylState) -> Result<f64> {
    if state.v <= 0.0 {
        return Err(Error::NonPositiveV(state.v));
    }
    let n = params.n as f64;
    let q = 2.0 * n / (n - 4.0);
    Ok(-state.v1 * state.v3
        + 0.5 * state.v2 * state.v2
        + 0.5 * params.c2 * state.v1 * state.v1
        - 0.5 * params.c0 * state.v * state.v
        + (n - 4.0) * (n - 4.0) * (n * n - 4.0) / 32.0 * pos_pow(state.v, q))
}

/// Truth of -v'' + 2 v' + (n(n-4)/4) v - Delta_theta v > 0,
/// the cylindrical form of the superharmonicity condition.
pub fn check_pos_laplacian(
    params: &DimensionParams,
    v: f64,
    v1: f64,
    v2: f64,
    lap_theta_v: f64,
) -> bool {
    let n = params.n as f64;
    -v2 + 2.0 * v1 + n * (n - 4.0) / 4.0 * v - lap_theta_v > 0.0
}

/// What stopped an integration, and where.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EventKind {
    /// v' crossed zero going downward (a maximum of v).
    VdotZeroDown,
    /// v' crossed zero going upward (a minimum of v).
    VdotZeroUp,
    /// v reached zero from above.
    VZero,
    /// v exceeded the blow-up cap.
    VCap,
    /// Reached the requested end time.
    TEnd,
}

/// Event specification: which sign changes to watch for, and whether
/// hitting them halts the integration. Leaving (0, V_CAPMAX) always halts.
#[derive(Debug, Clone, Copy, Default)]
pub struct EventSpec {
    pub vdot_zero_down: bool,
    pub vdot_zero_up: bool,
}

impl EventSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn vdot_down() -> Self {
        Self { vdot_zero_down: true, vdot_zero_up: false }
    }
}

/// Dense-output coefficients of one accepted step, in Hairer's
/// `contd5` form: u(theta) = r1 + theta (r2 + (1-theta)(r3 + theta (r4 + (1-theta) r5))).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DenseStep {
    pub t0: f64,
    pub h: f64,
    pub rcont: [[f64; 4]; 5],
}

impl DenseStep {
    pub fn eval(&self, t: f64) -> [f64; 4] {
        let theta = (t - self.t0) / self.h;
        let th1 = 1.0 - theta;
        let mut out = [0.0; 4];
        for i in 0..4 {
            let r = &self.rcont;
            out[i] = r[0][i] + theta * (r[1][i] + th1 * (r[2][i] + theta * (r[3][i] + th1 * r[4][i])));
        }
        out
    }
}

/// Result of an adaptive integration: step-end samples, dense-output
/// coefficients for every accepted step, and the events encountered.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: DimensionParams,
    pub samples: Vec<CylState>,
    pub steps: Vec<DenseStep>,
    pub events: Vec<(f64, EventKind)>,
    pub tol: f64,
}

impl Trajectory {
    pub fn last(&self) -> &CylState {
        self.samples.last().expect("trajectory has at least the initial state")
    }

    /// Evaluate the 4-jet at any time inside the integrated range.
    pub fn eval(&self, t: f64) -> Option<[f64; 4]> {
        if self.steps.is_empty() {
            let s = self.samples.first()?;
            if (t - s.t).abs() < 1e-14 {
                return Some(s.jet());
            }
            return None;
        }
        let first = self.steps.first()?;
        let last = self.steps.last()?;
        let (lo, hi) = (first.t0, last.t0 + last.h);
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        if t < lo - 1e-12 || t > hi + 1e-12 {
            return None;
        }
        let step = self
            .steps
            .iter()
            .find(|s| {
                let (a, b) = if s.h >= 0.0 { (s.t0, s.t0 + s.h) } else { (s.t0 + s.h, s.t0) };
                t >= a - 1e-12 && t <= b + 1e-12
            })
            .unwrap_or(last);
        Some(step.eval(t))
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
// b - b_hat (error weights).
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// Dense-output weights for the extra contribution rcont5.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

fn axpy(y: &[f64; 4], h: f64, coeffs: &[f64], ks: &[[f64; 4]]) -> [f64; 4] {
    let mut out = *y;
    for (c, k) in coeffs.iter().zip(ks.iter()) {
        if *c != 0.0 {
            for i in 0..4 {
                out[i] += h * c * k[i];
            }
        }
    }
    out
}

/// Generic adaptive DP5(4) driver over a user-supplied RHS. Used both for
/// the nonlinear flow and for the linearized (Floquet) systems.
pub fn integrate_system<F>(
    f: F,
    t0: f64,
    y0: [f64; 4],
    t_end: f64,
    tol: f64,
) -> Result<(Vec<(f64, [f64; 4])>, Vec<DenseStep>)>
where
    F: Fn(f64, &[f64; 4]) -> Result<[f64; 4]>,
{
    if tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let span = (t_end - t0).abs();
    if span == 0.0 {
        return Ok((vec![(t0, y0)], Vec::new()));
    }
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y)?;
    let mut h = dir * (span / 100.0).min(0.1).max(1e-8);
    let mut samples = vec![(t, y)];
    let mut steps = Vec::new();
    let mut err_prev: f64 = 1.0;
    let h_min = span * 1e-15;

    loop {
        if (t - t_end) * dir >= 0.0 {
            break;
        }
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }
        if h.abs() < h_min {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        let mut ks = [[0.0; 4]; 7];
        ks[0] = k1;
        let mut failed = false;
        for s in 0..6 {
            let ys = axpy(&y, h, &A[s][..=s], &ks[..=s]);
            match f(t + C[s] * h, &ys) {
                Ok(k) => ks[s + 1] = k,
                Err(Error::NonPositiveV(_)) => {
                    // Stage left the domain; retry with a smaller step.
                    failed = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if failed {
            h *= 0.5;
            continue;
        }
        let y_new = axpy(&y, h, &A[5], &ks[..6]);
        // FSAL: ks[6] is f at the step end.
        let mut err: f64 = 0.0;
        for i in 0..4 {
            let mut e = 0.0;
            for (s, d) in E.iter().enumerate() {
                e += d * ks[s][i];
            }
            e *= h;
            let sc = tol + tol * y[i].abs().max(y_new[i].abs());
            err += (e / sc) * (e / sc);
        }
        err = (err / 4.0).sqrt().max(1e-30);

        if err <= 1.0 {
            // Accept; build dense output.
            let ydiff = [
                y_new[0] - y[0],
                y_new[1] - y[1],
                y_new[2] - y[2],
                y_new[3] - y[3],
            ];
            let mut rcont = [[0.0; 4]; 5];
            for i in 0..4 {
                let bspl = h * ks[0][i] - ydiff[i];
                rcont[0][i] = y[i];
                rcont[1][i] = ydiff[i];
                rcont[2][i] = bspl;
                rcont[3][i] = ydiff[i] - h * ks[6][i] - bspl;
                let mut d = 0.0;
                for (s, w) in D.iter().enumerate() {
                    d += w * ks[s][i];
                }
                rcont[4][i] = h * d;
            }
            steps.push(DenseStep { t0: t, h, rcont });
            t += h;
            y = y_new;
            k1 = ks[6];
            samples.push((t, y));
            // PI step-size control.
            let fac = 0.9 * err.powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
            h *= fac.clamp(0.2, 5.0);
            err_prev = err;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
    }
    Ok((samples, steps))
}

/// Integrate the nonlinear flow from `state0`, halting at `t_end`, at the
/// first triggered event, or when v leaves (0, V_CAPMAX). Event times are
/// polished on the dense output to within `tol`.
pub fn integrate(
    params: &DimensionParams,
    state0: &CylState,
    t_end: f64,
    tol: f64,
    events: EventSpec,
) -> Result<Trajectory> {
    if state0.v <= 0.0 {
        return Err(Error::NonPositiveV(state0.v));
    }
    if tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    let p = *params;
    let f = move |t: f64, y: &[f64; 4]| {
        rhs(&p, &CylState::new(t, y[0], y[1], y[2], y[3]))
    };

    let dir = if t_end >= state0.t { 1.0 } else { -1.0 };
    let mut t = state0.t;
    let mut y = state0.jet();
    let mut traj = Trajectory {
        params: p,
        samples: vec![*state0],
        steps: Vec::new(),
        events: Vec::new(),
        tol,
    };
    let mut k1 = f(t, &y)?;
    let span = (t_end - state0.t).abs();
    let mut h = dir * (span / 100.0).min(0.05).max(1e-10);
    let mut err_prev: f64 = 1.0;
    let h_min = span.max(1.0) * 1e-15;

    'outer: loop {
        if (t - t_end) * dir >= -1e-15 {
            traj.events.push((t, EventKind::TEnd));
            break;
        }
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }
        if h.abs() < h_min {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        let mut ks = [[0.0; 4]; 7];
        ks[0] = k1;
        let mut stage_failed = false;
        for s in 0..6 {
            let ys = axpy(&y, h, &A[s][..=s], &ks[..=s]);
            if ys[0] <= 0.0 {
                stage_failed = true;
                break;
            }
            ks[s + 1] = f(t + C[s] * h, &ys)?;
        }
        if stage_failed {
            // v is heading through zero inside the step; shrink until the
            // crossing is resolved by the event logic below. Break before
            // the underflow guard can trip.
            if h.abs() < 8.0 * h_min {
                traj.events.push((t, EventKind::VZero));
                break;
            }
            h *= 0.5;
            continue;
        }
        let y_new = axpy(&y, h, &A[5], &ks[..6]);
        let mut err: f64 = 0.0;
        for i in 0..4 {
            let mut e = 0.0;
            for (s, d) in E.iter().enumerate() {
                e += d * ks[s][i];
            }
            e *= h;
            let sc = tol + tol * y[i].abs().max(y_new[i].abs());
            err += (e / sc) * (e / sc);
        }
        err = (err / 4.0).sqrt().max(1e-30);

        if err > 1.0 {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            continue;
        }

        let ydiff = [
            y_new[0] - y[0],
            y_new[1] - y[1],
            y_new[2] - y[2],
            y_new[3] - y[3],
        ];
        let mut rcont = [[0.0; 4]; 5];
        for i in 0..4 {
            let bspl = h * ks[0][i] - ydiff[i];
            rcont[0][i] = y[i];
            rcont[1][i] = ydiff[i];
            rcont[2][i] = bspl;
            rcont[3][i] = ydiff[i] - h * ks[6][i] - bspl;
            let mut d = 0.0;
            for (s, w) in D.iter().enumerate() {
                d += w * ks[s][i];
            }
            rcont[4][i] = h * d;
        }
        let step = DenseStep { t0: t, h, rcont };

        // Event tests over the accepted step, in time order.
        let mut hits: Vec<(f64, EventKind)> = Vec::new();
        if y[0] > 0.0 && y_new[0] <= 0.0 {
            if let Some(te) = bisect_root(&step, 0, t, t + h) {
                hits.push((te, EventKind::VZero));
            }
        }
        if y[0] < V_CAPMAX && y_new[0] >= V_CAPMAX {
            if let Some(te) = bisect_level(&step, 0, V_CAPMAX, t, t + h) {
                hits.push((te, EventKind::VCap));
            }
        }
        if events.vdot_zero_down && y[1] > 0.0 && y_new[1] <= 0.0 {
            if let Some(te) = bisect_root(&step, 1, t, t + h) {
                hits.push((te, EventKind::VdotZeroDown));
            }
        }
        if events.vdot_zero_up && y[1] < 0.0 && y_new[1] >= 0.0 {
            if let Some(te) = bisect_root(&step, 1, t, t + h) {
                hits.push((te, EventKind::VdotZeroUp));
            }
        }
        if !hits.is_empty() {
            hits.sort_by(|a, b| ((a.0 - t) * dir).partial_cmp(&((b.0 - t) * dir)).unwrap());
            let (te, kind) = hits[0];
            let jet = step.eval(te);
            let mut cut = step.clone();
            cut.h = te - cut.t0;
            traj.steps.push(cut);
            traj.samples.push(CylState::new(te, jet[0], jet[1], jet[2], jet[3]));
            traj.events.push((te, kind));
            break 'outer;
        }

        traj.steps.push(step);
        t += h;
        y = y_new;
        k1 = ks[6];
        traj.samples.push(CylState::new(t, y[0], y[1], y[2], y[3]));
        let fac = 0.9 * err.powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
        h *= fac.clamp(0.2, 5.0);
        err_prev = err;
    }
    Ok(traj)
}

/// Bisection for component `idx` of the dense output crossing zero in [ta, tb].
fn bisect_root(step: &DenseStep, idx: usize, ta: f64, tb: f64) -> Option<f64> {
    bisect_level(step, idx, 0.0, ta, tb)
}

fn bisect_level(step: &DenseStep, idx: usize, level: f64, ta: f64, tb: f64) -> Option<f64> {
    let fa = step.eval(ta)[idx] - level;
    let fb = step.eval(tb)[idx] - level;
    if fa == 0.0 {
        return Some(ta);
    }
    if fb == 0.0 {
        return Some(tb);
    }
    if fa * fb > 0.0 {
        return None;
    }
    let (mut a, mut b, mut fa) = (ta, tb, fa);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = step.eval(m)[idx] - level;
        if fm == 0.0 || (b - a).abs() < 1e-15 * (1.0 + m.abs()) {
            return Some(m);
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    Some(0.5 * (a + b))
}
