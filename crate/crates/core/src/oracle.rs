//! Brute-force validators: empirical joint cumulants, Monte Carlo decay
//! scans for the empirical covariance, and quadrature cross-checks.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::seeds::{seed_cumulant, SeedSpec};
use crate::special::adaptive_simpson;
use crate::spectral::empirical_acv;
use crate::stats;
use crate::trawl::{arfima_acv, theoretical_acv, theoretical_mean, SimulationConfig, Simulator, TrawlModel};

/// Below this many samples the plug-in cumulant carries a precision warning.
pub const CUM4_MIN_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cum4Estimate {
    pub value: f64,
    pub samples: usize,
    pub low_precision: bool,
}

/// Plug-in joint fourth cumulant of `(A, B, C, D)` after centering each
/// column by its sample mean.
pub fn empirical_cum4(samples: &[[f64; 4]]) -> Result<Cum4Estimate> {
    let n = samples.len();
    if n == 0 {
        return Err(domain("no samples"));
    }
    let nf = n as f64;
    let mut means = [0.0; 4];
    for s in samples {
        for i in 0..4 {
            means[i] += s[i];
        }
    }
    for m in means.iter_mut() {
        *m /= nf;
    }
    let mut pair = [[0.0; 4]; 4];
    let mut quad = 0.0;
    for s in samples {
        let c = [s[0] - means[0], s[1] - means[1], s[2] - means[2], s[3] - means[3]];
        quad += c[0] * c[1] * c[2] * c[3];
        for i in 0..4 {
            for j in i..4 {
                pair[i][j] += c[i] * c[j];
            }
        }
    }
    let e = |i: usize, j: usize| pair[i][j] / nf;
    let value = quad / nf - e(0, 1) * e(2, 3) - e(0, 2) * e(1, 3) - e(0, 3) * e(1, 2);
    Ok(Cum4Estimate {
        value,
        samples: n,
        low_precision: n < CUM4_MIN_SAMPLES,
    })
}

/// `cum(X_{t1}, X_{t2}, X_{t3}, X_{t4}) = κ4 Σ_{k ≥ t4 − t1} a_k` for
/// Lévy seeds.
pub fn levy_cum4(model: &TrawlModel, lags: [u64; 4]) -> Result<f64> {
    if !matches!(model.seed, SeedSpec::Poisson) {
        return Err(Error::Unsupported(
            "the fourth-cumulant identity needs a Lévy seed".into(),
        ));
    }
    if lags.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Contract("lags must be sorted".into()));
    }
    if !model.sequence.is_nonincreasing() {
        return Err(domain("the height sequence must be nonincreasing"));
    }
    let kappa4 = seed_cumulant(&model.seed, 4, 1.0)?;
    Ok(kappa4 * model.sequence.tail_sum(lags[3] - lags[0]))
}

/// Monte Carlo statistic tracked across sample sizes with its log-log slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayScanReport {
    pub statistic: String,
    pub n_grid: Vec<usize>,
    pub values: Vec<f64>,
    pub stderrs: Vec<f64>,
    /// Least-squares slope of `ln |value|` on `ln n`.
    pub slope: f64,
    /// Monte Carlo standard error of the slope, propagated from `stderrs`.
    pub slope_stderr: f64,
    pub reps: usize,
}

impl DecayScanReport {
    fn from_points(statistic: String, n_grid: Vec<usize>, values: Vec<f64>, stderrs: Vec<f64>, reps: usize) -> Self {
        let xs: Vec<f64> = n_grid.iter().map(|n| (*n as f64).ln()).collect();
        let ys: Vec<f64> = values.iter().map(|v| v.abs().ln()).collect();
        let slope = stats::ols_slope(&xs, &ys);
        let mx = stats::mean(&xs);
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let slope_stderr = xs
            .iter()
            .zip(values.iter().zip(&stderrs))
            .map(|(x, (v, s))| ((x - mx) / sxx * s / v.abs()).powi(2))
            .sum::<f64>()
            .sqrt();
        DecayScanReport {
            statistic,
            n_grid,
            values,
            stderrs,
            slope,
            slope_stderr,
            reps,
        }
    }

    /// CSV with columns `n,statistic,stderr`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "n,statistic,stderr")?;
        for ((n, v), s) in self.n_grid.iter().zip(&self.values).zip(&self.stderrs) {
            writeln!(out, "{n},{v},{s}")?;
        }
        Ok(())
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "statistic": self.statistic,
            "n_grid": self.n_grid,
            "slope": self.slope,
            "slope_stderr": self.slope_stderr,
            "reps": self.reps,
        })
    }
}

const MIN_REPS: usize = 50;
const BATCHES: usize = 10;

fn check_scan(n_grid: &[usize], reps: usize) -> Result<()> {
    if reps < MIN_REPS {
        return Err(domain(format!("need at least {MIN_REPS} replications, got {reps}")));
    }
    if n_grid.len() < 2 || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(domain("n_grid needs at least two strictly increasing sizes"));
    }
    Ok(())
}

/// Per-replication paths of length `n`, each from its own substream.
fn replicate<T, F>(model: &TrawlModel, n: usize, reps: usize, seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&[f64]) -> T + Sync,
{
    let sim = Simulator::new(model, &SimulationConfig::new(n, seed))?;
    Ok((0..reps as u64)
        .into_par_iter()
        .map(|i| f(sim.sample_stream(i).values()))
        .collect())
}

/// Sample covariance and its batch-means standard error.
fn cov_with_batches(a: &[f64], b: &[f64]) -> (f64, f64) {
    let cov = |a: &[f64], b: &[f64]| {
        let (ma, mb) = (stats::mean(a), stats::mean(b));
        a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (a.len() as f64 - 1.0)
    };
    let size = a.len() / BATCHES;
    let batches: Vec<f64> = (0..BATCHES)
        .map(|i| cov(&a[i * size..(i + 1) * size], &b[i * size..(i + 1) * size]))
        .collect();
    (cov(a, b), stats::std_error(&batches))
}

/// Monte Carlo `cov(r̃_n(k), r̃_n(ℓ))` over `n_grid`, with the uncentered
/// estimator `r̃_n(k) = (1/n) Σ_{j ≤ n−k} Y_j Y_{j+k}`, `Y = X − E X`.
pub fn empcov_fluctuation_scan(
    model: &TrawlModel,
    k: usize,
    l: usize,
    n_grid: &[usize],
    reps: usize,
    seed: u64,
) -> Result<DecayScanReport> {
    check_scan(n_grid, reps)?;
    if n_grid[0] <= k.max(l) {
        return Err(domain("every sample size must exceed the lags"));
    }
    let mu = theoretical_mean(model);
    let mut values = Vec::new();
    let mut stderrs = Vec::new();
    for (g, &n) in n_grid.iter().enumerate() {
        let pairs = replicate(model, n, reps, seed.wrapping_add(g as u64), |x| {
            let r = |lag: usize| {
                x.iter().zip(&x[lag..]).map(|(a, b)| (a - mu) * (b - mu)).sum::<f64>() / n as f64
            };
            (r(k), r(l))
        })?;
        let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let (c, se) = cov_with_batches(&a, &b);
        values.push(c);
        stderrs.push(se);
    }
    Ok(DecayScanReport::from_points(
        format!("cov(r~({k}), r~({l}))"),
        n_grid.to_vec(),
        values,
        stderrs,
        reps,
    ))
}

/// Monte Carlo `max_{k ≤ kmax} E |r̂_n(k) − r(k)|` over `n_grid`.
pub fn acv_error_rate_scan(
    model: &TrawlModel,
    kmax: usize,
    n_grid: &[usize],
    reps: usize,
    seed: u64,
) -> Result<DecayScanReport> {
    check_scan(n_grid, reps)?;
    if n_grid[0] <= kmax {
        return Err(domain("every sample size must exceed kmax"));
    }
    let truth = theoretical_acv(model, kmax);
    let mut values = Vec::new();
    let mut stderrs = Vec::new();
    for (g, &n) in n_grid.iter().enumerate() {
        let errors = replicate(model, n, reps, seed.wrapping_add(g as u64), |x| {
            let ts = crate::series::TimeSeries::new_unchecked(x.to_vec());
            let r = empirical_acv(&ts, kmax).expect("kmax below n");
            r.iter().zip(&truth).map(|(a, b)| (a - b).abs()).collect::<Vec<f64>>()
        })?;
        let (mut best, mut best_se) = (f64::NEG_INFINITY, 0.0);
        for lag in 0..=kmax {
            let col: Vec<f64> = errors.iter().map(|e| e[lag]).collect();
            let m = stats::mean(&col);
            if m > best {
                best = m;
                best_se = stats::std_error(&col);
            }
        }
        values.push(best);
        stderrs.push(best_se);
    }
    Ok(DecayScanReport::from_points(
        format!("max_k<={kmax} E|r^(k) - r(k)|"),
        n_grid.to_vec(),
        values,
        stderrs,
        reps,
    ))
}

/// `max_{k ≤ kmax} |r_d(k) − ∫_{−π}^{π} f_d(λ) e^{ikλ} dλ|`, the ARFIMA
/// recursion against adaptive quadrature.
pub fn arfima_quadrature_check(d: f64, kmax: usize) -> Result<f64> {
    if !(d.abs() <= 0.45) {
        return Err(domain(format!("|d| must be at most 0.45, got {d}")));
    }
    let exact = arfima_acv(d, kmax)?;
    let mut worst = 0.0f64;
    for (k, r) in exact.iter().enumerate() {
        let k = k as f64;
        // r(k) = (1/π) ∫_0^π (2 sin(λ/2))^{−2d} cos(kλ) dλ
        let q = if d > 0.0 {
            // λ = u^p with p = 1/(1 − 2d) cancels the λ^{−2d} singularity
            let p = 1.0 / (1.0 - 2.0 * d);
            let f = |u: f64| {
                let lam = u.powf(p);
                let ratio = if lam == 0.0 { 1.0 } else { lam / (2.0 * (lam / 2.0).sin()) };
                p * ratio.powf(2.0 * d) * (k * lam).cos()
            };
            adaptive_simpson(&f, 0.0, PI.powf(1.0 / p), 1e-12)
        } else {
            let f = |lam: f64| (2.0 * (lam / 2.0).sin()).powf(-2.0 * d) * (k * lam).cos();
            adaptive_simpson(&f, 0.0, PI, 1e-12)
        };
        worst = worst.max((r - q / PI).abs());
    }
    Ok(worst)
}
