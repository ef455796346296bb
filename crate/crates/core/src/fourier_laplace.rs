//! Scalar demonstrator of the Fourier-Laplace transform used in the
//! linear analysis: re-index w on half-lines of spacing T into a
//! quasi-periodic function of (t, xi), invert, and check Parseval.

use crate::error::{Error, Result};
use crate::numerics::gauss_legendre;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Tail bound target for the truncated bi-infinite sum.
const TAIL_TOL: f64 = 1e-12;

/// A scalar function w on [0, infinity), zero for t < 0, with a known
/// exponential decay envelope |w(t)| <= decay_const e^(-decay_rate t).
pub struct FLSample {
    pub t_period: f64,
    pub decay_rate: f64,
    pub decay_const: f64,
    w: Box<dyn Fn(f64) -> f64>,
}

impl FLSample {
    pub fn new(
        t_period: f64,
        decay_rate: f64,
        decay_const: f64,
        w: Box<dyn Fn(f64) -> f64>,
    ) -> Result<Self> {
        if t_period <= 0.0 || decay_rate <= 0.0 || decay_const <= 0.0 {
            return Err(Error::InvalidArgument("period, rate, and constant must be positive".into()));
        }
        Ok(Self { t_period, decay_rate, decay_const, w })
    }

    pub fn w(&self, t: f64) -> f64 {
        if t < 0.0 {
            0.0
        } else {
            (self.w)(t)
        }
    }

    /// Truncation K so the tail of the sum at Im(xi) = nu is below
    /// TAIL_TOL. Errors when the sum diverges.
    pub fn truncation(&self, nu: f64) -> Result<i64> {
        // Term k: e^(nu k) |w(t + kT)| <= C e^(-(rate T - nu) k).
        let margin = self.decay_rate * self.t_period - nu;
        if margin <= 0.0 {
            return Err(Error::Divergence(format!(
                "Im(xi) = {nu} at or above the convergence threshold {}",
                self.decay_rate * self.t_period
            )));
        }
        let geo = (-margin).exp();
        let k = ((self.decay_const / (TAIL_TOL * (1.0 - geo))).ln() / margin).ceil();
        Ok((k as i64).max(1))
    }
}

/// Truncated transform sum_k e^(-i xi k) w(t + kT). Valid for any t >= 0;
/// terms with t + kT < 0 vanish by the zero extension.
pub fn fl_transform(sample: &FLSample, t: f64, xi: Complex64) -> Result<Complex64> {
    let k_max = sample.truncation(xi.im)?;
    let k_min = (-t / sample.t_period).ceil() as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in k_min..=k_max {
        let phase = (-Complex64::i() * xi * k as f64).exp();
        acc += phase * sample.w(t + k as f64 * sample.t_period);
    }
    Ok(acc)
}

/// Inverse transform at time t = t_tilde + l T, t_tilde in [0, T):
/// w(t) = (1/2pi) int_0^2pi e^(i l xi) w_hat(t_tilde, eta + i nu) d eta,
/// by the trapezoid rule on the 2pi-periodic integrand.
pub fn fl_inverse(sample: &FLSample, nu: f64, t: f64, n_nodes: usize) -> Result<f64> {
    if n_nodes < 8 {
        return Err(Error::GridTooCoarse(format!("{n_nodes} eta nodes below the minimum 8")));
    }
    let l = (t / sample.t_period).floor();
    let t_tilde = t - l * sample.t_period;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n_nodes {
        let eta = 2.0 * PI * j as f64 / n_nodes as f64;
        let xi = Complex64::new(eta, nu);
        let what = fl_transform(sample, t_tilde, xi)?;
        acc += (Complex64::i() * xi * l).exp() * what;
    }
    Ok((acc / n_nodes as f64).re)
}

/// Left side of Parseval: the squared L^2 norm of w_hat over
/// [0, T] x [0, 2pi] at height nu, by Gauss-Legendre in t and the
/// trapezoid rule in eta.
pub fn transform_norm_sq(sample: &FLSample, nu: f64, n_t: usize, n_eta: usize) -> Result<f64> {
    let (nodes, weights) = gauss_legendre(n_t);
    let half = sample.t_period / 2.0;
    let mut acc = 0.0;
    for (&x, &wt) in nodes.iter().zip(&weights) {
        let t = half * (x + 1.0);
        let mut row = 0.0;
        for j in 0..n_eta {
            let eta = 2.0 * PI * j as f64 / n_eta as f64;
            row += fl_transform(sample, t, Complex64::new(eta, nu))?.norm_sqr();
        }
        acc += wt * half * (row * 2.0 * PI / n_eta as f64);
    }
    Ok(acc)
}

/// Weighted squared norm of w: int_0^inf e^(2 nu t / T) w(t)^2 dt,
/// integrated period by period until the tail bound is met.
pub fn weighted_norm_sq(sample: &FLSample, nu: f64) -> Result<f64> {
    let k_max = sample.truncation(nu)?;
    let (nodes, weights) = gauss_legendre(32);
    let half = sample.t_period / 2.0;
    let mut acc = 0.0;
    for k in 0..=k_max {
        for (&x, &wt) in nodes.iter().zip(&weights) {
            let t = k as f64 * sample.t_period + half * (x + 1.0);
            let w = sample.w(t);
            acc += wt * half * (2.0 * nu * t / sample.t_period).exp() * w * w;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// The closed-form fixture: w(t) = e^(-t) 1_{t >= 0}, T = 1, with
    /// w_hat(t, xi) = e^(-t) / (1 - e^(-(i xi + 1))) on [0, 1).
    fn geometric() -> FLSample {
        FLSample::new(1.0, 1.0, 1.0, Box::new(|t: f64| (-t).exp())).unwrap()
    }

    fn geometric_hat(t: f64, xi: Complex64) -> Complex64 {
        (-t).exp() / (1.0 - (-(Complex64::i() * xi + 1.0)).exp())
    }

    #[test]
    fn compact_support_single_term() {
        let s = FLSample::new(
            1.0,
            50.0,
            1.0,
            Box::new(|t: f64| if t < 1.0 { (3.0 * t).sin() + 2.0 } else { 0.0 }),
        )
        .unwrap();
        for &eta in &[0.0, 1.0, 4.0] {
            let xi = Complex64::new(eta, 0.0);
            let got = fl_transform(&s, 0.4, xi).unwrap();
            assert_relative_eq!(got.re, s.w(0.4), max_relative = 1e-12);
            assert!(got.im.abs() < 1e-12);
        }
    }

    #[test]
    fn geometric_closed_form() {
        let s = geometric();
        for &t in &[0.0, 0.3, 0.9] {
            for &(eta, nu) in &[(0.0, 0.0), (1.7, 0.0), (2.5, 0.5), (4.0, -1.0)] {
                let xi = Complex64::new(eta, nu);
                let got = fl_transform(&s, t, xi).unwrap();
                let want = geometric_hat(t, xi);
                assert_relative_eq!(got.re, want.re, epsilon = 1e-10);
                assert_relative_eq!(got.im, want.im, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn divergence_detected() {
        let s = geometric();
        // Convergence requires Im(xi) < rate * T = 1.
        assert!(matches!(
            fl_transform(&s, 0.0, Complex64::new(0.0, 1.0)),
            Err(Error::Divergence(_))
        ));
    }

    #[test]
    fn holonomy() {
        let s = geometric();
        for &t in &[0.1, 0.6] {
            for &(eta, nu) in &[(0.9, 0.0), (2.0, 0.4), (5.5, -0.7)] {
                let xi = Complex64::new(eta, nu);
                let lhs = fl_transform(&s, t + s.t_period, xi).unwrap();
                let rhs = (Complex64::i() * xi).exp() * fl_transform(&s, t, xi).unwrap();
                assert!((lhs - rhs).norm() < 1e-12, "holonomy off by {}", (lhs - rhs).norm());
            }
        }
    }

    #[test]
    fn roundtrip_geometric() {
        let s = geometric();
        let mut sup = 0.0f64;
        for &t in &[0.2, 0.7, 1.4, 2.3, 3.8] {
            let got = fl_inverse(&s, 0.0, t, 512).unwrap();
            sup = sup.max((got - s.w(t)).abs());
        }
        assert!(sup <= 1e-8, "roundtrip sup error {sup}");
    }

    #[test]
    fn roundtrip_compact_support() {
        let s = FLSample::new(
            0.7,
            80.0,
            1.0,
            Box::new(|t: f64| if t < 0.7 { (t * 2.0).cos() } else { 0.0 }),
        )
        .unwrap();
        for &t in &[0.1, 0.45, 0.69] {
            let got = fl_inverse(&s, 0.0, t, 64).unwrap();
            assert_relative_eq!(got, s.w(t), epsilon = 1e-10);
        }
    }

    #[test]
    fn roundtrip_at_nonzero_nu() {
        let s = geometric();
        for &nu in &[-0.5, 0.3] {
            for &t in &[0.4, 1.7] {
                let got = fl_inverse(&s, nu, t, 512).unwrap();
                assert_relative_eq!(got, s.w(t), epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn parseval_nu_zero() {
        let s = geometric();
        let lhs = transform_norm_sq(&s, 0.0, 48, 256).unwrap();
        let rhs = 2.0 * PI * weighted_norm_sq(&s, 0.0).unwrap();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-8);
    }

    #[test]
    fn weighted_parseval_comparable() {
        let s = FLSample::new(
            1.3,
            0.9,
            2.0,
            Box::new(|t: f64| 2.0 * (-0.9 * t).exp() * (1.0 + 0.3 * (5.0 * t).sin())),
        )
        .unwrap();
        for &nu in &[-0.5, 0.0, 0.5] {
            let lhs = transform_norm_sq(&s, nu, 48, 256).unwrap();
            let rhs = 2.0 * PI * weighted_norm_sq(&s, nu).unwrap();
            let ratio = lhs / rhs;
            assert!(ratio > 0.5 && ratio < 2.0, "nu = {nu}: ratio {ratio}");
        }
    }

    #[test]
    fn linearity_and_translation() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let (a, b): (f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let f = move |t: f64| (-1.2 * t).exp() * (2.0 * t).cos();
        let g = move |t: f64| (-1.5 * t).exp();
        let sf = FLSample::new(1.0, 1.2, 1.0, Box::new(f)).unwrap();
        let sg = FLSample::new(1.0, 1.5, 1.0, Box::new(g)).unwrap();
        let sfg = FLSample::new(1.0, 1.2, 4.1, Box::new(move |t| a * f(t) + b * g(t))).unwrap();
        let xi = Complex64::new(1.3, 0.2);
        for &t in &[0.15, 0.8] {
            let lhs = fl_transform(&sfg, t, xi).unwrap();
            let rhs = a * fl_transform(&sf, t, xi).unwrap() + b * fl_transform(&sg, t, xi).unwrap();
            assert!((lhs - rhs).norm() < 1e-10);
        }
        // Translation by a full period acts by the holonomy factor, up to
        // the k = -1 term lost to the zero extension of the translate.
        let shifted = FLSample::new(1.0, 1.2, 4.0, Box::new(move |t| f(t + 1.0))).unwrap();
        for &t in &[0.15, 0.8] {
            let lhs = fl_transform(&shifted, t, xi).unwrap();
            let rhs = (Complex64::i() * xi).exp() * fl_transform(&sf, t, xi).unwrap();
            let lost = (Complex64::i() * xi).exp() * sf.w(t);
            assert!((lhs + lost - rhs).norm() < 1e-8, "off by {}", (lhs + lost - rhs).norm());
        }
    }
}
