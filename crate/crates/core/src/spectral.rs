//! Second-order empirical statistics and pointwise spectral estimation.
//!
//! Conventions: `I_n(λ) = |Σ_k (X_k − X̄) e^{−iλk}|² / (2πn)`, so that
//! `∫_{−π}^{π} I_n(λ) e^{iλk} dλ = r̂_n(k)` and `I_n` estimates the spectral
//! density `f` with `r(k) = ∫_{−π}^{π} f(λ) e^{iλk} dλ`.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::series::TimeSeries;
use crate::special::gauss_legendre;

/// Periodogram ordinates at the Fourier frequencies `λ_j = 2πj/n`,
/// `j = 0, …, ⌊n/2⌋`.
#[derive(Debug, Clone, PartialEq)]
pub struct Periodogram {
    n: usize,
    values: Vec<f64>,
}

impl Periodogram {
    /// Wraps half-grid ordinates `j = 0..=⌊n/2⌋` computed elsewhere, for
    /// instance an expected periodogram.
    pub fn from_ordinates(n: usize, values: Vec<f64>) -> Result<Self> {
        if n < 2 || values.len() != n / 2 + 1 {
            return Err(domain(format!(
                "need {} ordinates for n = {n}, got {}",
                n / 2 + 1,
                values.len()
            )));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(domain("ordinates must be finite and nonnegative"));
        }
        Ok(Periodogram { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Half-grid ordinates `I_n(λ_j)`, `j = 0..=⌊n/2⌋`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn frequency(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n as f64
    }

    /// `I_n(λ_j)` for any `j`, extended by periodicity and symmetry.
    pub fn at(&self, j: usize) -> f64 {
        let j = j % self.n;
        self.values[j.min(self.n - j)]
    }

    /// Number of nonzero Fourier frequencies strictly inside `(0, π)`:
    /// `⌊(n − 1)/2⌋`.
    pub fn interior_len(&self) -> usize {
        (self.n - 1) / 2
    }

    /// `(λ_j, I_n(λ_j))` for `j = 1..=⌊(n − 1)/2⌋`.
    pub fn interior(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (1..=self.interior_len()).map(move |j| (self.frequency(j), self.values[j]))
    }

    /// Periodogram of `s · X` when `self` is that of `X`.
    pub fn scaled(&self, s: f64) -> Periodogram {
        Periodogram {
            n: self.n,
            values: self.values.iter().map(|v| v * s * s).collect(),
        }
    }

    /// CSV with columns `freq_index,lambda,value`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "freq_index,lambda,value")?;
        for (j, v) in self.values.iter().enumerate() {
            writeln!(out, "{j},{},{v}", self.frequency(j))?;
        }
        Ok(())
    }
}

fn centered(series: &TimeSeries) -> Vec<f64> {
    let m = series.mean();
    series.values().iter().map(|x| x - m).collect()
}

/// Mean-centered periodogram via FFT.
pub fn periodogram(series: &TimeSeries) -> Result<Periodogram> {
    let n = series.len();
    if n < 2 {
        return Err(domain("periodogram needs at least two observations"));
    }
    let mut buf: Vec<Complex64> = centered(series).into_iter().map(|x| Complex64::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let norm = 1.0 / (2.0 * PI * n as f64);
    let mut values: Vec<f64> = buf[..=n / 2].iter().map(|z| z.norm_sqr() * norm).collect();
    values[0] = 0.0;
    Ok(Periodogram { n, values })
}

/// `(r̂_n(0), …, r̂_n(kmax))` with `1/n` normalization and mean centering.
pub fn empirical_acv(series: &TimeSeries, kmax: usize) -> Result<Vec<f64>> {
    let n = series.len();
    if kmax >= n {
        return Err(domain(format!("lag {kmax} must be below the sample size {n}")));
    }
    let x = centered(series);
    if kmax < 64 {
        return Ok((0..=kmax)
            .map(|k| x.iter().zip(&x[k..]).map(|(a, b)| a * b).sum::<f64>() / n as f64)
            .collect());
    }
    // Zero-padded circular autocorrelation.
    let len = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex64> = x
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .chain(std::iter::repeat_n(Complex64::new(0.0, 0.0), len - n))
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    for z in buf.iter_mut() {
        *z = Complex64::new(z.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    let scale = 1.0 / (len as f64 * n as f64);
    Ok(buf[..=kmax].iter().map(|z| z.re * scale).collect())
}

/// CSV with columns `lag,value`.
pub fn write_acv_csv<W: Write>(acv: &[f64], mut out: W) -> std::io::Result<()> {
    writeln!(out, "lag,value")?;
    for (k, v) in acv.iter().enumerate() {
        writeln!(out, "{k},{v}")?;
    }
    Ok(())
}

/// `(1/2π) |1 − e^{−iλ}|^{−2d}`, the ARFIMA(0, d, 0) spectral density with
/// unit innovation variance.
///
/// At `λ ∈ 2πℤ` the value is `+∞` for `d > 0`, `0` for `d < 0` and `1/(2π)`
/// for `d = 0`.
pub fn fd_value(d: f64, lambda: f64) -> f64 {
    if d == 0.0 {
        return 1.0 / (2.0 * PI);
    }
    if lambda.rem_euclid(2.0 * PI) == 0.0 {
        return if d > 0.0 { f64::INFINITY } else { 0.0 };
    }
    (2.0 * (lambda / 2.0).sin().abs()).powf(-2.0 * d) / (2.0 * PI)
}

/// Even trigonometric polynomial `h(λ) = θ_0 + Σ_{k=1}^N 2 θ_k cos(kλ)`.
///
/// `θ_k` is the Fourier coefficient `(1/2π) ∫ h(λ) e^{iλk} dλ`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TrigPoly {
    coeffs: Vec<f64>,
}

impl TrigPoly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        TrigPoly { coeffs }
    }

    pub fn zero(degree: usize) -> Self {
        TrigPoly { coeffs: vec![0.0; degree + 1] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Highest harmonic; the zero polynomial `()` has degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        let mut acc = self.coeffs.first().copied().unwrap_or(0.0);
        for (k, c) in self.coeffs.iter().enumerate().skip(1) {
            acc += 2.0 * c * (k as f64 * lambda).cos();
        }
        acc
    }
}

pub fn trigpoly_eval(h: &TrigPoly, lambda: f64) -> f64 {
    h.eval(lambda)
}

/// `∫_{−π}^{π} I_n h dλ = θ_0 r̂_n(0) + Σ_{k=1}^N 2 θ_k r̂_n(k)`, exactly.
pub fn integrate_periodogram_against(series: &TimeSeries, h: &TrigPoly) -> Result<f64> {
    let n = series.len();
    if h.degree() >= n {
        return Err(domain(format!("polynomial degree {} must be below n = {n}", h.degree())));
    }
    let r = empirical_acv(series, h.degree())?;
    Ok(h.coeffs()
        .iter()
        .zip(&r)
        .enumerate()
        .map(|(k, (c, r))| if k == 0 { c * r } else { 2.0 * c * r })
        .sum())
}

/// Kernel profile `J`: even, C², supported on `[−1/2, 1/2]`, unit integral.
#[derive(Clone)]
pub struct KernelSpec {
    name: String,
    profile: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSpec").field("name", &self.name).finish()
    }
}

impl Default for KernelSpec {
    /// `J(x) = (35/16)(1 − 4x²)³` on `[−1/2, 1/2]`.
    fn default() -> Self {
        KernelSpec::new("triweight", |x: f64| {
            if x.abs() >= 0.5 {
                0.0
            } else {
                35.0 / 16.0 * (1.0 - 4.0 * x * x).powi(3)
            }
        })
    }
}

/// Gauss–Legendre nodes per panel when integrating `J(x) cos(ξx)`.
const KERNEL_NODES: usize = 64;

/// Width in `ξ` covered by one quadrature panel; keeps each panel below
/// roughly three oscillations.
const PANEL_XI: f64 = 40.0;

impl KernelSpec {
    pub fn new<F>(name: impl Into<String>, profile: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        KernelSpec {
            name: name.into(),
            profile: Arc::new(profile),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn profile(&self, x: f64) -> f64 {
        (self.profile)(x)
    }

    /// `J*(ξ) = ∫ J(x) e^{−iξx} dx`, real because `J` is even.
    pub fn fourier_transform(&self, xi: f64) -> f64 {
        let (nodes, weights) = gauss_legendre(KERNEL_NODES);
        self.fourier_transform_with(&nodes, &weights, xi)
    }

    fn fourier_transform_with(&self, nodes: &[f64], weights: &[f64], xi: f64) -> f64 {
        // Composite rule over 1 + ⌊|ξ|/40⌋ panels of [−1/2, 1/2].
        let panels = 1 + (xi.abs() / PANEL_XI) as usize;
        let width = 1.0 / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let mid = -0.5 + (p as f64 + 0.5) * width;
            let half = 0.5 * width;
            for (t, w) in nodes.iter().zip(weights) {
                let x = mid + half * t;
                acc += w * half * self.profile(x) * (xi * x).cos();
            }
        }
        acc
    }
}

/// Kernel spectral estimator with `J*(b k)` cached for one `(b, n)`.
#[derive(Debug, Clone)]
pub struct KernelEstimator {
    bandwidth: f64,
    weights: Vec<f64>,
}

impl KernelEstimator {
    pub fn new(kernel: &KernelSpec, bandwidth: f64, n: usize) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(domain(format!("bandwidth must be positive, got {bandwidth}")));
        }
        let (nodes, w) = gauss_legendre(KERNEL_NODES);
        let weights = (0..n)
            .map(|k| kernel.fourier_transform_with(&nodes, &w, bandwidth * k as f64))
            .collect();
        Ok(KernelEstimator { bandwidth, weights })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// `∫ I_n J_{b,λ0} dλ = (1/2π) Σ_{|k|<n} r̂_n(|k|) cos(λ0 k) J*(b k)`.
    pub fn estimate(&self, series: &TimeSeries, lambda0: f64) -> Result<f64> {
        let n = series.len();
        if n != self.weights.len() {
            return Err(domain(format!(
                "estimator built for n = {}, series has n = {n}",
                self.weights.len()
            )));
        }
        let r = empirical_acv(series, n - 1)?;
        let mut acc = r[0] * self.weights[0];
        for k in 1..n {
            acc += 2.0 * r[k] * (lambda0 * k as f64).cos() * self.weights[k];
        }
        Ok(acc / (2.0 * PI))
    }
}

/// Kernel estimate of `f(λ0)` with bandwidth `b`.
pub fn kernel_estimate(
    series: &TimeSeries,
    lambda0: f64,
    bandwidth: f64,
    kernel: &KernelSpec,
) -> Result<f64> {
    KernelEstimator::new(kernel, bandwidth, series.len())?.estimate(series, lambda0)
}
