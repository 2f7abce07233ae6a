//! Broadband estimation: parametric Whittle with an additive trigonometric
//! nuisance term, local Whittle, and ARFIMA reduced-contrast evaluation.
//!
//! Integrals against the normalized measure `dλ / 2π` on `[−π, π]` are
//! discretized as `(2/n) Σ_{j=1}^{⌊(n−1)/2⌋} g(λ_j)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::optim::{golden_section, NelderMead};
use crate::spectral::{fd_value, Periodogram, TrigPoly};

/// Largest memory parameter searched by [`fit_whittle`].
pub const D_MAX: f64 = 0.5 - 1e-4;

/// Spectral density `c (f_d + h)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralModel {
    pub c: f64,
    pub d: f64,
    pub h: TrigPoly,
}

impl SpectralModel {
    pub fn new(c: f64, d: f64, h: TrigPoly) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(domain(format!("scale c must be positive, got {c}")));
        }
        if !(0.0..0.5).contains(&d) {
            return Err(domain(format!("memory parameter d must lie in [0, 1/2), got {d}")));
        }
        Ok(SpectralModel { c, d, h })
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        self.c * (fd_value(self.d, lambda) + self.h.eval(lambda))
    }
}

pub fn spectral_model_eval(model: &SpectralModel, lambda: f64) -> f64 {
    model.eval(lambda)
}

fn default_d_grid() -> Vec<f64> {
    (0..10).map(|i| i as f64 * 0.05).collect()
}

/// Settings for [`fit_whittle`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WhittleConfig {
    /// Degree `N` of the trigonometric nuisance polynomial.
    pub degree: usize,
    pub d_grid: Vec<f64>,
    pub a_min: f64,
    pub penalty_weight: f64,
    pub tolerance: f64,
    /// Defaults to `400 (N + 2)` when absent.
    pub max_iter: Option<usize>,
}

impl Default for WhittleConfig {
    fn default() -> Self {
        WhittleConfig {
            degree: 2,
            d_grid: default_d_grid(),
            a_min: 1e-6,
            penalty_weight: 1e6,
            tolerance: 1e-7,
            max_iter: None,
        }
    }
}

impl WhittleConfig {
    pub fn with_degree(degree: usize) -> Self {
        WhittleConfig {
            degree,
            ..Default::default()
        }
    }

    pub fn iteration_limit(&self) -> usize {
        self.max_iter.unwrap_or(400 * (self.degree + 2))
    }

    pub fn validate(&self) -> Result<()> {
        if self.d_grid.is_empty() || self.d_grid.iter().any(|d| !(0.0..=D_MAX).contains(d)) {
            return Err(Error::Config(format!(
                "d_grid must be nonempty with entries in [0, {D_MAX}]"
            )));
        }
        if !(self.a_min > 0.0) || !(self.penalty_weight >= 0.0) || !(self.tolerance > 0.0) {
            return Err(Error::Config(
                "a_min and tolerance must be positive, penalty_weight nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// One multistart trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartReport {
    pub d_start: f64,
    pub d_end: f64,
    pub start_contrast: f64,
    pub contrast: f64,
    pub iterations: usize,
    pub converged: bool,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub d_hat: f64,
    pub alpha_hat: f64,
    pub c_hat: f64,
    #[serde(rename = "h_coeffs")]
    pub h_hat: TrigPoly,
    pub contrast: f64,
    pub converged: bool,
    pub starts: Vec<StartReport>,
}

impl FitResult {
    pub fn model(&self) -> SpectralModel {
        SpectralModel {
            c: self.c_hat,
            d: self.d_hat,
            h: self.h_hat.clone(),
        }
    }
}

/// Interior frequency grid with the tables needed to evaluate `f_d + h` fast.
struct Grid<'a> {
    n: usize,
    pgram: &'a [f64],
    /// `ln(2 sin(λ_j / 2))`
    log_base: Vec<f64>,
    /// `cos(k λ_j)` for `k = 1..=degree`, row-major by `k`.
    cosines: Vec<Vec<f64>>,
}

struct Eval {
    contrast: f64,
    first: f64,
    min_g: f64,
    shortfall: f64,
}

impl<'a> Grid<'a> {
    fn new(pgram: &'a Periodogram, degree: usize) -> Self {
        let m = pgram.interior_len();
        let lambdas: Vec<f64> = (1..=m).map(|j| pgram.frequency(j)).collect();
        Grid {
            n: pgram.n(),
            pgram: &pgram.values()[1..=m],
            log_base: lambdas.iter().map(|l| (2.0 * (l / 2.0).sin()).ln()).collect(),
            cosines: (1..=degree)
                .map(|k| lambdas.iter().map(|l| (k as f64 * l).cos()).collect())
                .collect(),
        }
    }

    fn weight(&self) -> f64 {
        2.0 / self.n as f64
    }

    /// `g_j = f_d(λ_j) + h(λ_j)`.
    fn g(&self, d: f64, theta: &[f64], j: usize) -> f64 {
        let mut h = theta.first().copied().unwrap_or(0.0);
        for (k, row) in self.cosines.iter().enumerate() {
            h += 2.0 * theta[k + 1] * row[j];
        }
        (-2.0 * d * self.log_base[j]).exp() / (2.0 * PI) + h
    }

    fn eval(&self, d: f64, theta: &[f64], a_min: f64) -> Eval {
        let (mut first, mut second) = (0.0, 0.0);
        let mut min_g = f64::INFINITY;
        let mut shortfall = 0.0;
        for (j, &ij) in self.pgram.iter().enumerate() {
            let g = self.g(d, theta, j);
            min_g = min_g.min(g);
            if g < a_min {
                shortfall += (a_min - g).powi(2);
            }
            first += ij / g;
            second += g.ln();
        }
        let w = self.weight();
        let contrast = if min_g > 0.0 {
            (w * first).ln() + w * second
        } else {
            f64::INFINITY
        };
        Eval {
            contrast,
            first: w * first,
            min_g,
            shortfall,
        }
    }
}

/// `ln ∫ I_n / (f_d + h) dμ + ∫ ln(f_d + h) dμ` on the interior grid.
pub fn whittle_contrast(pgram: &Periodogram, d: f64, h: &TrigPoly) -> Result<f64> {
    let grid = Grid::new(pgram, h.degree());
    let theta = h.coeffs();
    let theta: Vec<f64> = if theta.is_empty() { vec![0.0] } else { theta.to_vec() };
    let e = grid.eval(d, &theta, 0.0);
    if !(e.min_g > 0.0) {
        return Err(Error::Constraint(format!(
            "f_d + h reaches {} on the frequency grid",
            e.min_g
        )));
    }
    Ok(e.contrast)
}

/// Scale making the interior periodogram average `1/(2π)`.
fn normalizer(pgram: &Periodogram) -> f64 {
    let m = pgram.interior_len();
    let mean = pgram.values()[1..=m].iter().sum::<f64>() / m as f64;
    2.0 * PI * mean
}

/// Near-minimizer of the Whittle contrast over `d ∈ [0, 1/2 − 10⁻⁴]` and
/// `h` of degree `N`, by Nelder–Mead from each point of `d_grid` with `h = 0`.
pub fn fit_whittle(pgram: &Periodogram, config: &WhittleConfig) -> Result<FitResult> {
    config.validate()?;
    let n = pgram.n();
    let degree = config.degree;
    if n < 4 * (degree + 2) {
        return Err(domain(format!(
            "n = {n} is too short for degree {degree}; need n ≥ {}",
            4 * (degree + 2)
        )));
    }
    let kappa = normalizer(pgram);
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::Degenerate("periodogram vanishes on the frequency grid".into()));
    }
    let normalized = pgram.scaled(1.0 / kappa.sqrt());
    let grid = Grid::new(&normalized, degree);
    let dim = degree + 2;

    let objective = |x: &[f64]| {
        let e = grid.eval(x[0], &x[1..], config.a_min);
        e.contrast + config.penalty_weight * e.shortfall
    };

    let mut nm = NelderMead::unbounded(
        std::iter::once(0.05).chain(std::iter::repeat(0.1 / (2.0 * PI)).take(degree + 1)).collect(),
        config.tolerance,
        config.iteration_limit(),
    );
    nm.lower[0] = 0.0;
    nm.upper[0] = D_MAX;

    let runs: Vec<_> = config
        .d_grid
        .par_iter()
        .map(|&d0| {
            let mut x0 = vec![0.0; dim];
            x0[0] = d0;
            let start_value = objective(&x0);
            let m = nm.minimize(objective, &x0);
            (d0, start_value, m)
        })
        .collect();

    let ln_kappa = kappa.ln();
    let mut best: Option<usize> = None;
    let mut starts = Vec::with_capacity(runs.len());
    for (i, (d0, start_value, m)) in runs.iter().enumerate() {
        let e = grid.eval(m.x[0], &m.x[1..], config.a_min);
        let feasible = e.min_g > 0.0;
        starts.push(StartReport {
            d_start: *d0,
            d_end: m.x[0],
            start_contrast: start_value + ln_kappa,
            contrast: e.contrast + ln_kappa,
            iterations: m.iterations,
            converged: m.converged,
            feasible,
        });
        if feasible && best.is_none_or(|b| m.value < runs[b].2.value) {
            best = Some(i);
        }
    }
    let Some(b) = best else {
        return Err(Error::FitFailure(format!(
            "no multistart run ended inside the positivity region: {}",
            serde_json::to_string(&starts).unwrap_or_default()
        )));
    };
    let m = &runs[b].2;
    let e = grid.eval(m.x[0], &m.x[1..], config.a_min);
    let d_hat = m.x[0];
    Ok(FitResult {
        d_hat,
        alpha_hat: 2.0 * (1.0 - d_hat),
        c_hat: e.first * kappa,
        h_hat: TrigPoly::new(m.x[1..].to_vec()),
        contrast: e.contrast + ln_kappa,
        converged: m.converged,
        starts,
    })
}

/// Local Whittle estimate of the tail exponent from the first `m` Fourier
/// frequencies, `argmin_{α ∈ [1, 2]} ln Ĝ(α) + ((α − 2)/m) Σ ln λ_j` with
/// `Ĝ(α) = (1/m) Σ λ_j^{2−α} I_n(λ_j)`.
pub fn local_whittle(pgram: &Periodogram, m: usize) -> Result<f64> {
    let n = pgram.n();
    if m < 1 || m > n / 2 {
        return Err(domain(format!("bandwidth m = {m} must lie in [1, {}]", n / 2)));
    }
    let ords = &pgram.values()[1..=m];
    let mean = ords.iter().sum::<f64>() / m as f64;
    if !(mean > 0.0) {
        return Err(Error::Degenerate(
            "periodogram vanishes on the first m Fourier frequencies".into(),
        ));
    }
    let logs: Vec<f64> = (1..=m).map(|j| pgram.frequency(j).ln()).collect();
    let scaled: Vec<f64> = ords.iter().map(|v| v / mean).collect();
    let mean_log = logs.iter().sum::<f64>() / m as f64;
    let objective = |alpha: f64| {
        let g: f64 = scaled
            .iter()
            .zip(&logs)
            .map(|(i, l)| ((2.0 - alpha) * l).exp() * i)
            .sum::<f64>()
            / m as f64;
        g.ln() + (alpha - 2.0) * mean_log
    };
    Ok(golden_section(objective, 1.0, 2.0, 1e-6))
}

fn poly_at(coeffs: &[f64], sign: f64, z: Complex64) -> Complex64 {
    // 1 + sign Σ c_k z^k
    let mut acc = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        acc = (acc + sign * c) * z;
    }
    acc + 1.0
}

/// ARFIMA(p, d, q) reduced contrast
/// `ln ∫ I_n |Φ(e^{−iλ})|² / (f_d |Θ(e^{−iλ})|²) dμ` and `σ̂² = exp(contrast)`.
pub fn arfima_reduced_contrast(
    pgram: &Periodogram,
    d: f64,
    phi: &[f64],
    theta: &[f64],
) -> Result<(f64, f64)> {
    if !is_canonical(phi, theta) {
        return Err(domain("(φ, θ) is outside the canonical region"));
    }
    let n = pgram.n();
    let mut acc = 0.0;
    for (lambda, ij) in pgram.interior() {
        let z = Complex64::from_polar(1.0, -lambda);
        let ratio = poly_at(phi, -1.0, z).norm_sqr() / poly_at(theta, 1.0, z).norm_sqr();
        acc += ij * ratio / fd_value(d, lambda);
    }
    let contrast = (2.0 / n as f64 * acc).ln();
    Ok((contrast, contrast.exp()))
}

const ROOT_TOL: f64 = 1e-9;

/// Roots of `1 + Σ c_k z^k`.
fn poly_roots(coeffs: &[f64]) -> Vec<nalgebra::Complex<f64>> {
    let p = coeffs.iter().rposition(|c| *c != 0.0).map_or(0, |i| i + 1);
    if p == 0 {
        return Vec::new();
    }
    let lead = coeffs[p - 1];
    let mut comp = DMatrix::<f64>::zeros(p, p);
    for k in 0..p {
        // monic coefficient of z^{p−1−k}
        let c = if k + 1 == p { 1.0 } else { coeffs[p - 2 - k] };
        comp[(0, k)] = -c / lead;
    }
    for i in 1..p {
        comp[(i, i - 1)] = 1.0;
    }
    comp.complex_eigenvalues().iter().copied().collect()
}

/// Whether `Φ(z) = 1 − Σ φ_k z^k` and `Θ(z) = 1 + Σ θ_k z^k` have all roots
/// outside the closed unit disk and no root in common.
pub fn is_canonical(phi: &[f64], theta: &[f64]) -> bool {
    if phi.iter().chain(theta).any(|c| !c.is_finite()) {
        return false;
    }
    let neg: Vec<f64> = phi.iter().map(|c| -c).collect();
    let ar = poly_roots(&neg);
    let ma = poly_roots(theta);
    let outside = |r: &nalgebra::Complex<f64>| r.norm() > 1.0 + ROOT_TOL;
    if !ar.iter().all(outside) || !ma.iter().all(outside) {
        return false;
    }
    !ar.iter().any(|a| ma.iter().any(|b| (a - b).norm() <= ROOT_TOL))
}
