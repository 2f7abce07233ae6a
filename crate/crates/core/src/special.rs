//! Special functions and quadrature rules shared by the estimators and the
//! validators.

use std::f64::consts::PI;

pub use statrs::function::gamma::{gamma, ln_gamma};

/// B_{2k} / (2k)! for k = 1..=10.
const BERNOULLI_OVER_FACTORIAL: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
    -3617.0 / 10_670_622_842_880_000.0,
    43_867.0 / 5_109_094_217_170_944_000.0,
    -174_611.0 / 802_857_662_698_291_200_000.0,
];

/// Hurwitz zeta function `ζ(s, q) = Σ_{n≥0} (q + n)^{-s}` for `s > 1`, `q > 0`.
///
/// Euler–Maclaurin summation: a few direct terms shift the argument to
/// `q + N ≥ 16`, after which the Bernoulli correction series converges to
/// full double precision.
pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    debug_assert!(s > 1.0 && q > 0.0);
    const SHIFT: f64 = 16.0;
    let mut head = 0.0;
    let mut x = q;
    while x < SHIFT {
        head += x.powf(-s);
        x += 1.0;
    }
    let x_pow = x.powf(-s);
    let mut tail = x * x_pow / (s - 1.0) + 0.5 * x_pow;
    // s (s+1) ... (s+2k-2) x^{-s-2k+1}
    let mut rising = s;
    let mut term_pow = x_pow / x;
    let inv_x2 = 1.0 / (x * x);
    for (k, coeff) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        let t = coeff * rising * term_pow;
        tail += t;
        if t.abs() < 1e-18 * tail.abs() {
            break;
        }
        let kk = (k + 1) as f64;
        rising *= (s + 2.0 * kk - 1.0) * (s + 2.0 * kk);
        term_pow *= inv_x2;
    }
    head + tail
}

/// Riemann zeta for `s > 1`.
pub fn zeta(s: f64) -> f64 {
    hurwitz_zeta(s, 1.0)
}

/// `ln Γ(z + a) − ln Γ(z + b)` without the cancellation that plagues the
/// naive difference at large `z`.
pub fn ln_gamma_ratio(z: f64, a: f64, b: f64) -> f64 {
    if z < 64.0 {
        return ln_gamma(z + a) - ln_gamma(z + b);
    }
    // (a-b) ln z + Σ_n (-1)^{n+1} [B_{n+1}(a) - B_{n+1}(b)] / (n (n+1) z^n)
    let bern = |n: usize, x: f64| -> f64 {
        match n {
            2 => x * x - x + 1.0 / 6.0,
            3 => x * x * x - 1.5 * x * x + 0.5 * x,
            4 => x.powi(4) - 2.0 * x.powi(3) + x * x - 1.0 / 30.0,
            5 => x.powi(5) - 2.5 * x.powi(4) + 5.0 / 3.0 * x.powi(3) - x / 6.0,
            6 => {
                x.powi(6) - 3.0 * x.powi(5) + 2.5 * x.powi(4) - 0.5 * x * x + 1.0 / 42.0
            }
            7 => {
                x.powi(7) - 3.5 * x.powi(6) + 3.5 * x.powi(5) - 7.0 / 6.0 * x.powi(3)
                    + x / 6.0
            }
            _ => unreachable!(),
        }
    };
    let mut acc = (a - b) * z.ln();
    let mut zn = z;
    for n in 1..=6 {
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        acc += sign * (bern(n + 1, a) - bern(n + 1, b)) / ((n * (n + 1)) as f64 * zn);
        zn *= z;
    }
    acc
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn step<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    // A fixed initial partition keeps the recursion from stopping early on
    // oscillatory integrands that happen to vanish at the Simpson nodes.
    const PANELS: usize = 32;
    let h = (b - a) / PANELS as f64;
    (0..PANELS)
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = lo + h;
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = h / 6.0 * (fa + 4.0 * fm + fb);
            step(f, lo, hi, fa, fm, fb, whole, tol / PANELS as f64, 40)
        })
        .sum()
}
