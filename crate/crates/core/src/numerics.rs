//! Shared numerical kernels: Gauss-Legendre quadrature, finite-difference
//! weights, two-point Hermite interpolation, and a least-squares line fit.

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_deriv(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Fornberg's algorithm: weights approximating the m-th derivative at `x0`
/// from samples at `nodes`. Returns weights for each derivative order 0..=m.
pub fn fd_weights(x0: f64, nodes: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    assert!(n > m);
    // In-place 2D form of the recurrence; c[j][k] is the weight at node j
    // for the k-th derivative.
    let mut c = vec![vec![0.0f64; m + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    (0..=m)
        .map(|k| c.iter().map(|row| row[k]).collect())
        .collect()
}

/// Two-point Hermite interpolation on [0, h] from the value and first
/// four derivatives at each endpoint (degree 7 once the fourth derivative
/// is dropped; here we use derivatives 0..=3 at both ends).
///
/// `left` and `right` are (f, f', f'', f''') at x = 0 and x = h.
/// Returns the Newton-form coefficients over nodes [0,0,0,0,h,h,h,h].
pub fn hermite2_coeffs(left: [f64; 4], right: [f64; 4], h: f64) -> [f64; 8] {
    // Divided-difference table with repeated nodes; f[z_i..z_{i+j}] with all
    // nodes equal is f^(j)/j!.
    const FACT: [f64; 4] = [1.0, 1.0, 2.0, 6.0];
    let z = [0.0, 0.0, 0.0, 0.0, h, h, h, h];
    let vals = [left, right];
    let mut dd = [[0.0f64; 8]; 8];
    for i in 0..8 {
        dd[i][0] = vals[i / 4][0];
    }
    for j in 1..8 {
        for i in 0..(8 - j) {
            if z[i + j] == z[i] {
                dd[i][j] = vals[i / 4][j] / FACT[j];
            } else {
                dd[i][j] = (dd[i + 1][j - 1] - dd[i][j - 1]) / (z[i + j] - z[i]);
            }
        }
    }
    let mut coeffs = [0.0; 8];
    for (j, c) in coeffs.iter_mut().enumerate() {
        *c = dd[0][j];
    }
    coeffs
}

/// Evaluate the Newton-form Hermite polynomial and its derivatives up to
/// order 4 at local coordinate x in [0, h].
pub fn hermite2_eval(coeffs: &[f64; 8], h: f64, x: f64) -> [f64; 5] {
    let z = [0.0, 0.0, 0.0, 0.0, h, h, h, h];
    // Horner on the Newton form, propagating (p, p', p'', p''', p'''').
    let mut p = [coeffs[7], 0.0, 0.0, 0.0, 0.0];
    for i in (0..7).rev() {
        let dx = x - z[i];
        let mut q = [0.0f64; 5];
        q[0] = coeffs[i] + dx * p[0];
        for d in 1..5 {
            q[d] = d as f64 * p[d - 1] + dx * p[d];
        }
        p = q;
    }
    p
}

/// Least-squares fit y = a + b x; returns (a, b).
pub fn linfit(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let a = (sy - b * sx) / n;
    (a, b)
}

/// Bisection root-finder on a bracketing interval.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, xtol: f64) -> f64 {
    let mut fa = f(a);
    let fb = f(b);
    assert!(fa * fb <= 0.0, "bisect requires a bracket: f({a})={fa}, f({b})={fb}");
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 || (b - a).abs() < xtol {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}
