//! Seed-process families and their exact low-order moments.
//!
//! A seed `γ` is a continuous-time process on `[0, ∞)`. The trawl sum
//! evaluates one copy of `γ` at every trawl height, so sampling is always
//! joint over a set of levels.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Seed-process family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "seed", rename_all = "snake_case", try_from = "RawSeed")]
pub enum SeedSpec {
    /// `γ(t) = t ε` with `ε ~ N(0, innovation_variance)`.
    RandomLine {
        #[serde(rename = "variance")]
        innovation_variance: f64,
    },
    /// Homogeneous Poisson counting process with unit intensity.
    Poisson,
    /// `γ(t) = N(ζ t)` with `ζ ~ Gamma(shape, rate)` independent of `N`.
    MixedPoisson {
        #[serde(rename = "shape")]
        zeta_shape: f64,
        #[serde(rename = "rate")]
        zeta_rate: f64,
    },
    /// `γ(t) = #{i ≤ trials : U_i ≤ t}` with `U_i` i.i.d. uniform on `[0, 1]`.
    Binomial { trials: u32 },
}

#[derive(Deserialize)]
#[serde(tag = "seed", rename_all = "snake_case")]
enum RawSeed {
    RandomLine { variance: f64 },
    Poisson,
    MixedPoisson { shape: f64, rate: f64 },
    Binomial { trials: u32 },
}

impl TryFrom<RawSeed> for SeedSpec {
    type Error = Error;

    fn try_from(raw: RawSeed) -> Result<Self> {
        let spec = match raw {
            RawSeed::RandomLine { variance } => SeedSpec::RandomLine {
                innovation_variance: variance,
            },
            RawSeed::Poisson => SeedSpec::Poisson,
            RawSeed::MixedPoisson { shape, rate } => SeedSpec::MixedPoisson {
                zeta_shape: shape,
                zeta_rate: rate,
            },
            RawSeed::Binomial { trials } => SeedSpec::Binomial { trials },
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// One realization of a seed copy at a finite set of levels.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedDraw {
    pub levels: Vec<f64>,
    pub values: Vec<f64>,
}

impl SeedSpec {
    pub fn random_line(innovation_variance: f64) -> Result<Self> {
        let s = SeedSpec::RandomLine { innovation_variance };
        s.validate().map(|_| s)
    }

    pub fn mixed_poisson(zeta_shape: f64, zeta_rate: f64) -> Result<Self> {
        let s = SeedSpec::MixedPoisson { zeta_shape, zeta_rate };
        s.validate().map(|_| s)
    }

    pub fn binomial(trials: u32) -> Result<Self> {
        let s = SeedSpec::Binomial { trials };
        s.validate().map(|_| s)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            SeedSpec::RandomLine { innovation_variance } => {
                innovation_variance.is_finite() && innovation_variance > 0.0
            }
            SeedSpec::Poisson => true,
            SeedSpec::MixedPoisson { zeta_shape, zeta_rate } => {
                zeta_shape.is_finite() && zeta_shape > 0.0 && zeta_rate.is_finite() && zeta_rate > 0.0
            }
            SeedSpec::Binomial { trials } => trials >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid seed parameters: {self:?}")))
        }
    }

    /// Counting seeds have nondecreasing integer paths starting at 0.
    pub fn is_counting(&self) -> bool {
        !matches!(self, SeedSpec::RandomLine { .. })
    }

    /// `(E ζ, Var ζ)` of the mixing variable; `(1, 0)` for the plain Poisson seed.
    pub(crate) fn mixing_moments(&self) -> (f64, f64) {
        match *self {
            SeedSpec::MixedPoisson { zeta_shape, zeta_rate } => {
                (zeta_shape / zeta_rate, zeta_shape / (zeta_rate * zeta_rate))
            }
            _ => (1.0, 0.0),
        }
    }

    /// Rate at which events of a counting seed accumulate per unit level,
    /// averaged over the seed law (`E γ(u) = rate · u` near 0).
    pub(crate) fn event_rate(&self) -> f64 {
        match *self {
            SeedSpec::Poisson => 1.0,
            SeedSpec::MixedPoisson { .. } => self.mixing_moments().0,
            SeedSpec::Binomial { trials } => trials as f64,
            SeedSpec::RandomLine { .. } => 0.0,
        }
    }
}

fn check_level(u: f64) -> Result<()> {
    if u >= 0.0 && u.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("seed level must be finite and >= 0, got {u}")))
    }
}

/// Exact `E γ(u)`.
pub fn seed_mean(spec: &SeedSpec, u: f64) -> Result<f64> {
    check_level(u)?;
    Ok(match *spec {
        SeedSpec::RandomLine { .. } => 0.0,
        SeedSpec::Poisson => u,
        SeedSpec::MixedPoisson { .. } => u * spec.mixing_moments().0,
        SeedSpec::Binomial { trials } => trials as f64 * u.min(1.0),
    })
}

/// Exact `cov(γ(u), γ(v))`.
pub fn seed_cov(spec: &SeedSpec, u: f64, v: f64) -> Result<f64> {
    check_level(u)?;
    check_level(v)?;
    Ok(match *spec {
        SeedSpec::RandomLine { innovation_variance } => u * v * innovation_variance,
        SeedSpec::Poisson => u.min(v),
        SeedSpec::MixedPoisson { .. } => {
            let (m, var) = spec.mixing_moments();
            u.min(v) * m + u * v * var
        }
        SeedSpec::Binomial { trials } => {
            let (u, v) = (u.min(1.0), v.min(1.0));
            trials as f64 * (u.min(v) - u * v)
        }
    })
}

/// `Var γ(u)`; infallible for the nonnegative levels used internally.
pub(crate) fn seed_var(spec: &SeedSpec, u: f64) -> f64 {
    seed_cov(spec, u, u).unwrap_or(f64::NAN)
}

/// Cumulant of order `q` of `γ(u)` for Lévy seeds.
///
/// Only the Poisson seed is a Lévy process here; every cumulant of a
/// Poisson variable equals its mean.
pub fn seed_cumulant(spec: &SeedSpec, order: u32, u: f64) -> Result<f64> {
    check_level(u)?;
    if !(1..=4).contains(&order) {
        return Err(domain(format!("cumulant order must be in 1..=4, got {order}")));
    }
    match spec {
        SeedSpec::Poisson => Ok(u),
        other => Err(Error::Unsupported(format!(
            "closed-form cumulants are only available for the Poisson seed, not {other:?}"
        ))),
    }
}

pub(crate) fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let d = Poisson::new(mean).expect("finite positive Poisson mean");
    d.sample(rng) as u64
}

pub(crate) fn sample_zeta<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    Gamma::new(shape, 1.0 / rate)
        .expect("validated gamma parameters")
        .sample(rng)
}

/// One joint draw of `(γ(levels[0]), …, γ(levels[J-1]))` from a single copy.
pub fn sample_seed_at<R: Rng + ?Sized>(
    spec: &SeedSpec,
    levels: &[f64],
    rng: &mut R,
) -> Result<SeedDraw> {
    for w in levels.windows(2) {
        if w[1] > w[0] {
            return Err(Error::Contract(format!(
                "levels must be nonincreasing, found {} followed by {}",
                w[0], w[1]
            )));
        }
    }
    if let Some(&last) = levels.last() {
        check_level(last)?;
    }
    let values = match *spec {
        SeedSpec::RandomLine { innovation_variance } => {
            let eps = Normal::new(0.0, innovation_variance.sqrt())
                .expect("validated variance")
                .sample(rng);
            levels.iter().map(|&u| u * eps).collect()
        }
        SeedSpec::Poisson => poisson_path(levels, 1.0, rng),
        SeedSpec::MixedPoisson { zeta_shape, zeta_rate } => {
            if levels.is_empty() {
                Vec::new()
            } else {
                let zeta = sample_zeta(zeta_shape, zeta_rate, rng);
                poisson_path(levels, zeta, rng)
            }
        }
        SeedSpec::Binomial { trials } => {
            if levels.is_empty() {
                Vec::new()
            } else {
                let mut u: Vec<f64> = (0..trials).map(|_| rng.random::<f64>()).collect();
                u.sort_by(f64::total_cmp);
                levels
                    .iter()
                    .map(|&l| u.partition_point(|&x| x <= l) as f64)
                    .collect()
            }
        }
    };
    Ok(SeedDraw {
        levels: levels.to_vec(),
        values,
    })
}

/// Poisson counts at nonincreasing `levels` for a process of rate `rate`,
/// built from independent increments in ascending order.
fn poisson_path<R: Rng + ?Sized>(levels: &[f64], rate: f64, rng: &mut R) -> Vec<f64> {
    let mut values = vec![0.0; levels.len()];
    let mut prev = 0.0;
    let mut count = 0u64;
    for (value, &level) in values.iter_mut().zip(levels).rev() {
        count += poisson_count(rate * (level - prev), rng);
        prev = level;
        *value = count as f64;
    }
    values
}
