//! Monte Carlo study of the tail-exponent estimators on power-law trawls.
//!
//! Each `(family, α)` pair yields `replications` independent paths; every
//! estimator configuration is applied to the same paths. Replication `r` of
//! pair `(f, a)` uses substream `(f << 48) | (a << 32) | r` of the base seed,
//! so results do not depend on scheduling.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::seeds::SeedSpec;
use crate::spectral::periodogram;
use crate::trawl::{SimulationConfig, Simulator, TrawlModel, TrawlSequence};
use crate::whittle::{fit_whittle, local_whittle, WhittleConfig};

/// Seed family with heights `a_k = scale (k + 1)^{−α}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Family {
    pub name: String,
    #[serde(flatten)]
    pub seed: SeedSpec,
    pub scale: f64,
}

impl Family {
    pub fn model(&self, alpha: f64) -> Result<TrawlModel> {
        TrawlModel::new(self.seed, TrawlSequence::power(self.scale, alpha)?)
    }
}

fn default_families() -> Vec<Family> {
    vec![
        Family {
            name: "poisson".into(),
            seed: SeedSpec::Poisson,
            scale: 10.0,
        },
        Family {
            name: "binomial".into(),
            seed: SeedSpec::Binomial { trials: 10 },
            scale: 1.0,
        },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub alpha_grid: Vec<f64>,
    pub families: Vec<Family>,
    pub n: usize,
    pub replications: usize,
    /// Local Whittle bandwidths.
    pub m_grid: Vec<usize>,
    /// Degrees of the parametric Whittle nuisance polynomial.
    pub degree_grid: Vec<usize>,
    pub rng_seed: u64,
    pub truncation_tol: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            alpha_grid: vec![1.1, 1.3, 1.5, 1.7, 1.9],
            families: default_families(),
            n: 5000,
            replications: 100,
            m_grid: vec![20, 50, 100, 200],
            degree_grid: (2..=9).collect(),
            rng_seed: 20240601,
            truncation_tol: 1e-3,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.alpha_grid.is_empty() || self.families.is_empty() {
            return bad("alpha_grid and families must be nonempty");
        }
        if self.m_grid.is_empty() && self.degree_grid.is_empty() {
            return bad("at least one of m_grid and degree_grid must be nonempty");
        }
        if self.replications < 2 {
            return bad("replications must be at least 2");
        }
        if self.alpha_grid.iter().any(|a| !(*a > 1.0 && *a < 2.0)) {
            return bad("every alpha must lie in (1, 2)");
        }
        if self.m_grid.iter().any(|m| *m < 1 || *m > self.n / 2) {
            return bad("every m must lie in [1, n/2]");
        }
        if self.degree_grid.iter().any(|d| self.n < 4 * (d + 2)) {
            return bad("n is too short for the largest degree");
        }
        if self.families.len() >= 1 << 16 || self.alpha_grid.len() >= 1 << 16 || self.replications >= 1 << 32 {
            return bad("grid too large for the substream layout");
        }
        for f in &self.families {
            f.seed.validate()?;
            if !(f.scale > 0.0) {
                return bad("family scale must be positive");
            }
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "estimator", rename_all = "snake_case")]
pub enum Estimator {
    LocalWhittle { m: usize },
    Whittle { degree: usize },
}

impl Estimator {
    pub fn label(&self) -> &'static str {
        match self {
            Estimator::LocalWhittle { .. } => "local_whittle",
            Estimator::Whittle { .. } => "whittle",
        }
    }

    pub fn tuning(&self) -> usize {
        match *self {
            Estimator::LocalWhittle { m } => m,
            Estimator::Whittle { degree } => degree,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub family: String,
    pub alpha: f64,
    #[serde(flatten)]
    pub estimator: Estimator,
    pub reps: usize,
    pub failures: usize,
    pub bias: f64,
    pub sd: f64,
    pub mse: f64,
    /// Smallest MSE among tunings of the same estimator for this `(family, α)`.
    pub best: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub config_hash: String,
    pub rng_seed: u64,
    pub tool_version: String,
    /// Wall-clock stamp; the only field allowed to differ between reruns.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub metadata: Metadata,
    pub config: ExperimentConfig,
    pub cells: Vec<Cell>,
}

impl ExperimentReport {
    pub fn cell(&self, family: &str, alpha: f64, estimator: Estimator) -> Option<&Cell> {
        self.cells
            .iter()
            .find(|c| c.family == family && c.alpha == alpha && c.estimator == estimator)
    }

    pub fn empty_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.reps == 0).count()
    }

    /// CSV, six significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "family,alpha,estimator,tuning,reps,failures,bias,sd,mse,best")?;
        for c in &self.cells {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                c.family,
                sig6(c.alpha),
                c.estimator.label(),
                c.estimator.tuning(),
                c.reps,
                c.failures,
                sig6(c.bias),
                sig6(c.sd),
                sig6(c.mse),
                c.best
            )?;
        }
        Ok(())
    }
}

/// `%.6g`-style formatting.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    let s = if (-4..6).contains(&exp) {
        format!("{:.*}", (5 - exp) as usize, x)
    } else {
        format!("{x:.5e}")
    };
    trim_zeros(&s)
}

fn trim_zeros(s: &str) -> String {
    let (mant, exp) = match s.find('e') {
        Some(i) => (&s[..i], &s[i..]),
        None => (s, ""),
    };
    let mant = if mant.contains('.') {
        mant.trim_end_matches('0').trim_end_matches('.')
    } else {
        mant
    };
    format!("{mant}{exp}")
}

fn estimators(config: &ExperimentConfig) -> Vec<Estimator> {
    config
        .m_grid
        .iter()
        .map(|&m| Estimator::LocalWhittle { m })
        .chain(config.degree_grid.iter().map(|&degree| Estimator::Whittle { degree }))
        .collect()
}

fn replicate_estimates(
    sim: &Simulator,
    est: &[Estimator],
    stream: u64,
) -> Vec<std::result::Result<f64, Error>> {
    let path = sim.sample_stream(stream);
    let pgram = match periodogram(&path) {
        Ok(p) => p,
        Err(e) => return vec![Err(e); est.len()],
    };
    est.iter()
        .map(|e| match *e {
            Estimator::LocalWhittle { m } => local_whittle(&pgram, m),
            Estimator::Whittle { degree } => {
                fit_whittle(&pgram, &WhittleConfig::with_degree(degree)).map(|f| f.alpha_hat)
            }
        })
        .collect()
}

/// Runs every cell; `parallel` only changes scheduling, never the output.
pub fn run_experiment_with(config: &ExperimentConfig, parallel: bool) -> Result<ExperimentReport> {
    config.validate()?;
    let est = estimators(config);
    let mut cells = Vec::new();
    for (fi, family) in config.families.iter().enumerate() {
        for (ai, &alpha) in config.alpha_grid.iter().enumerate() {
            let model = family.model(alpha)?;
            let sim = Simulator::new(
                &model,
                &SimulationConfig::new(config.n, config.rng_seed).with_tol(config.truncation_tol),
            )?;
            let base = ((fi as u64) << 48) | ((ai as u64) << 32);
            let one = |r: usize| replicate_estimates(&sim, &est, base | r as u64);
            let results: Vec<_> = if parallel {
                (0..config.replications).into_par_iter().map(one).collect()
            } else {
                (0..config.replications).map(one).collect()
            };
            let mut group: Vec<Cell> = est
                .iter()
                .enumerate()
                .map(|(ei, e)| {
                    let mut values = Vec::new();
                    let mut first_error = None;
                    for r in &results {
                        match &r[ei] {
                            Ok(v) => values.push(*v),
                            Err(err) => {
                                first_error.get_or_insert_with(|| err.to_string());
                            }
                        }
                    }
                    summarize(family, alpha, *e, &values, config.replications, first_error)
                })
                .collect();
            mark_best(&mut group);
            cells.extend(group);
        }
    }
    Ok(ExperimentReport {
        metadata: Metadata {
            config_hash: config.hash(),
            rng_seed: config.rng_seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            generated_at: None,
        },
        config: config.clone(),
        cells,
    })
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment_with(config, true)
}

fn summarize(
    family: &Family,
    alpha: f64,
    estimator: Estimator,
    values: &[f64],
    attempted: usize,
    first_error: Option<String>,
) -> Cell {
    let reps = values.len();
    let (bias, sd) = match reps {
        0 => (f64::NAN, f64::NAN),
        1 => (values[0] - alpha, 0.0),
        _ => (
            crate::stats::mean(values) - alpha,
            crate::stats::std_dev(values),
        ),
    };
    Cell {
        family: family.name.clone(),
        alpha,
        estimator,
        reps,
        failures: attempted - reps,
        bias,
        sd,
        mse: bias * bias + sd * sd,
        best: false,
        first_error,
    }
}

fn mark_best(group: &mut [Cell]) {
    for label in ["local_whittle", "whittle"] {
        let best = group
            .iter()
            .enumerate()
            .filter(|(_, c)| c.estimator.label() == label && c.mse.is_finite())
            .min_by(|a, b| a.1.mse.total_cmp(&b.1.mse))
            .map(|(i, _)| i);
        if let Some(i) = best {
            group[i].best = true;
        }
    }
}
