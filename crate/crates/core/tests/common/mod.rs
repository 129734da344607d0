//! Independent reference computations shared by the integration suites.
//! Nothing here calls into the solver paths it is used to check.
#![allow(dead_code)]

use num_complex::Complex64;

pub fn bump(x: f64, radius: f64) -> f64 {
    let t = x / radius;
    if t.abs() < 1.0 {
        (-1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

/// Adaptive Simpson quadrature of a complex integrand.
pub fn integrate(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, tol: f64) -> Complex64 {
    fn simpson(
        f: &dyn Fn(f64) -> Complex64,
        a: f64,
        fa: Complex64,
        b: f64,
        fb: Complex64,
    ) -> (f64, Complex64, Complex64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> Complex64,
        a: f64,
        fa: Complex64,
        b: f64,
        fb: Complex64,
        m: f64,
        fm: Complex64,
        whole: Complex64,
        tol: f64,
        depth: u32,
    ) -> Complex64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.norm() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
    }
    if b <= a {
        return Complex64::new(0.0, 0.0);
    }
    // Pre-split so the adaptive rule sees the bump's shape.
    let pieces = 64;
    let step = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let lo = a + i as f64 * step;
            let hi = lo + step;
            let (flo, fhi) = (f(lo), f(hi));
            let (m, fm, whole) = simpson(f, lo, flo, hi, fhi);
            recurse(f, lo, flo, hi, fhi, m, fm, whole, tol / pieces as f64, 40)
        })
        .sum()
}

pub fn kernel(k: f64, r: f64) -> Complex64 {
    Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, k * r.abs()) / (2.0 * k)
}

/// `int G(x - y) f(y) dy` over `[-r, r]`, split at the kink `y = x`.
pub fn free_field_oracle(k: f64, x: f64, f: &dyn Fn(f64) -> f64, r: f64, tol: f64) -> Complex64 {
    let g = |y: f64| kernel(k, x - y) * f(y);
    let split = x.clamp(-r, r);
    integrate(&g, -r, split, tol) + integrate(&g, split, r, tol)
}

/// Outgoing solution of `-psi'' + (p - E) psi = f` on `[-X, X]` with
/// `psi' + i k psi = 0` at `-X` and `psi' - i k psi = 0` at `X`, by RK4
/// shooting with `substeps` steps per grid interval. Returns values at the
/// `n` uniform nodes.
pub fn ode_oracle(
    energy: f64,
    p: &dyn Fn(f64) -> f64,
    f: &dyn Fn(f64) -> f64,
    half_width: f64,
    n: usize,
    substeps: usize,
) -> Vec<Complex64> {
    let k = energy.sqrt();
    let i = Complex64::new(0.0, 1.0);
    let h = 2.0 * half_width / (n - 1) as f64 / substeps as f64;
    // state (u, u'); u'' = (p - E) u - f * forced
    let rhs =
        |x: f64, s: [Complex64; 2], forced: f64| -> [Complex64; 2] { [s[1], (p(x) - energy) * s[0] - f(x) * forced] };
    let integrate = |init: [Complex64; 2], forced: f64| -> Vec<[Complex64; 2]> {
        let mut out = Vec::with_capacity(n);
        let mut s = init;
        out.push(s);
        let mut x = -half_width;
        for _ in 1..n {
            for _ in 0..substeps {
                let add = |a: [Complex64; 2], b: [Complex64; 2], c: f64| [a[0] + b[0] * c, a[1] + b[1] * c];
                let k1 = rhs(x, s, forced);
                let k2 = rhs(x + 0.5 * h, add(s, k1, 0.5 * h), forced);
                let k3 = rhs(x + 0.5 * h, add(s, k2, 0.5 * h), forced);
                let k4 = rhs(x + h, add(s, k3, h), forced);
                for c in 0..2 {
                    s[c] += (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]) * (h / 6.0);
                }
                x += h;
            }
            out.push(s);
        }
        out
    };
    let one = Complex64::new(1.0, 0.0);
    let homogeneous = integrate([one, -i * k], 0.0);
    let particular = integrate([Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)], 1.0);
    let (hu, hp) = (homogeneous[n - 1], particular[n - 1]);
    let alpha = -(hp[1] - i * k * hp[0]) / (hu[1] - i * k * hu[0]);
    (0..n).map(|j| particular[j][0] + alpha * homogeneous[j][0]).collect()
}

pub fn max_rel(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}
