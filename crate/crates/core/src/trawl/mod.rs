//! Discrete-time trawl processes `X_k = Σ_{j≥0} γ_{k−j}(a_j)` and their exact
//! second-order structure.

mod sequence;
mod simulate;

pub use sequence::{arfima_acv, sequence_tail_sum, sequence_value, TrawlSequence};
pub use simulate::{simulate, SimulationConfig, SimulationPlan, Simulator, DEFAULT_WORK_BUDGET};


use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::seeds::SeedSpec;

/// Largest index the tail searches consider.
const INDEX_LIMIT: u64 = 1 << 62;

/// A seed family paired with a height sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrawlModel {
    pub seed: SeedSpec,
    pub sequence: TrawlSequence,
}

impl TrawlModel {
    pub fn new(seed: SeedSpec, sequence: TrawlSequence) -> Result<Self> {
        let model = TrawlModel { seed, sequence };
        model.validate()?;
        Ok(model)
    }

    /// Checks parameters and the summability condition
    /// `Σ_j (|E γ(a_j)| + Var γ(a_j)) < ∞`.
    pub fn validate(&self) -> Result<()> {
        self.seed.validate()?;
        self.sequence.validate()?;
        let total = theoretical_mean(self).abs() + self.tail_variance(0);
        if !total.is_finite() {
            return Err(Error::Config(format!(
                "trawl sum does not converge in L2 for {self:?}"
            )));
        }
        Ok(())
    }

    /// Index of the first height below 1 (Binomial levels ≥ 1 are deterministic).
    pub(crate) fn first_sub_unit_index(&self) -> u64 {
        self.sequence.first_below(1.0, INDEX_LIMIT).unwrap_or(INDEX_LIMIT)
    }

    /// `Σ_{j≥k} Var γ(a_j)`.
    pub fn tail_variance(&self, k: u64) -> f64 {
        let seq = &self.sequence;
        if !seq.is_nonincreasing() {
            return explicit_sum(seq, k, |a| crate::seeds::seed_var(&self.seed, a));
        }
        match self.seed {
            SeedSpec::Poisson => seq.power_tail(1, k),
            SeedSpec::RandomLine { innovation_variance } => innovation_variance * seq.power_tail(2, k),
            SeedSpec::MixedPoisson { .. } => {
                let (m, v) = self.seed.mixing_moments();
                m * seq.power_tail(1, k) + v * seq.power_tail(2, k)
            }
            SeedSpec::Binomial { trials } => {
                let from = k.max(self.first_sub_unit_index());
                if from >= INDEX_LIMIT {
                    return 0.0;
                }
                trials as f64 * (seq.power_tail(1, from) - seq.power_tail(2, from))
            }
        }
    }
}

fn explicit_sum(seq: &TrawlSequence, k: u64, f: impl Fn(f64) -> f64) -> f64 {
    match seq {
        TrawlSequence::Explicit { values } => values
            .iter()
            .skip(usize::try_from(k).unwrap_or(usize::MAX))
            .map(|&a| f(a))
            .sum(),
        _ => unreachable!("only explicit sequences can be non-monotone"),
    }
}

/// Smallest `J ≥ from` with `tail(J) ≤ target`, for a nonincreasing `tail`.
pub(crate) fn smallest_index_below(
    from: u64,
    target: f64,
    tail: impl Fn(u64) -> f64,
) -> Result<u64> {
    if tail(from) <= target {
        return Ok(from);
    }
    let (mut lo, mut hi) = (from, from.max(1));
    loop {
        if tail(hi) <= target {
            break;
        }
        lo = hi;
        if hi >= INDEX_LIMIT {
            return Err(Error::Resource(format!(
                "tail never drops below {target:e} within 2^62 terms; raise the truncation tolerance"
            )));
        }
        hi = hi.saturating_mul(2).min(INDEX_LIMIT);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if tail(mid) <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Smallest `J` with `Σ_{j≥J} Var γ(a_j) ≤ tol · Σ_{j≥0} Var γ(a_j)`.
pub fn truncation_index(model: &TrawlModel, tol: f64) -> Result<u64> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(domain(format!("truncation tolerance must lie in (0, 1), got {tol}")));
    }
    let total = model.tail_variance(0);
    if total == 0.0 {
        return Ok(0);
    }
    smallest_index_below(0, tol * total, |j| model.tail_variance(j))
}

/// `Σ_j E γ(a_j)`.
pub fn theoretical_mean(model: &TrawlModel) -> f64 {
    let seq = &model.sequence;
    if !seq.is_nonincreasing() {
        return explicit_sum(seq, 0, |a| {
            crate::seeds::seed_mean(&model.seed, a).unwrap_or(f64::NAN)
        });
    }
    match model.seed {
        SeedSpec::RandomLine { .. } => 0.0,
        SeedSpec::Poisson => seq.tail_sum(0),
        SeedSpec::MixedPoisson { .. } => model.seed.mixing_moments().0 * seq.tail_sum(0),
        SeedSpec::Binomial { trials } => {
            let k1 = model.first_sub_unit_index();
            if k1 >= INDEX_LIMIT {
                return f64::INFINITY;
            }
            trials as f64 * (k1 as f64 + seq.tail_sum(k1))
        }
    }
}

/// `(r(0), …, r(kmax))` with `r(k) = Σ_j cov(γ(a_j), γ(a_{j+k}))`.
pub fn theoretical_acv(model: &TrawlModel, kmax: usize) -> Vec<f64> {
    let seq = &model.sequence;
    let lags = 0..=kmax as u64;
    if !seq.is_nonincreasing() {
        return lags.map(|k| theoretical_acv_at(model, k)).collect();
    }
    match model.seed {
        SeedSpec::Poisson => lags.map(|k| seq.tail_sum(k)).collect(),
        SeedSpec::RandomLine { innovation_variance } => seq
            .lagged_product_sums(0, kmax as u64)
            .into_iter()
            .map(|p| innovation_variance * p)
            .collect(),
        SeedSpec::MixedPoisson { .. } => {
            let (m, v) = model.seed.mixing_moments();
            let products = seq.lagged_product_sums(0, kmax as u64);
            lags.zip(products).map(|(k, p)| m * seq.tail_sum(k) + v * p).collect()
        }
        SeedSpec::Binomial { trials } => {
            let k1 = model.first_sub_unit_index();
            if k1 >= INDEX_LIMIT {
                return vec![0.0; kmax + 1];
            }
            let products = seq.lagged_product_sums(k1, kmax as u64);
            lags.zip(products)
                .map(|(k, p)| trials as f64 * (seq.tail_sum(k1 + k) - p))
                .collect()
        }
    }
}

pub(crate) fn theoretical_acv_at(model: &TrawlModel, k: u64) -> f64 {
    let seq = &model.sequence;
    if !seq.is_nonincreasing() {
        let values = match seq {
            TrawlSequence::Explicit { values } => values,
            _ => unreachable!(),
        };
        let k = usize::try_from(k).unwrap_or(usize::MAX);
        return values
            .iter()
            .zip(values.iter().skip(k))
            .map(|(&u, &v)| crate::seeds::seed_cov(&model.seed, u, v).unwrap_or(f64::NAN))
            .sum();
    }
    match model.seed {
        SeedSpec::Poisson => seq.tail_sum(k),
        SeedSpec::RandomLine { innovation_variance } => {
            innovation_variance * seq.lagged_product_sum(0, k)
        }
        SeedSpec::MixedPoisson { .. } => {
            let (m, v) = model.seed.mixing_moments();
            m * seq.tail_sum(k) + v * seq.lagged_product_sum(0, k)
        }
        SeedSpec::Binomial { trials } => {
            let k1 = model.first_sub_unit_index();
            if k1 >= INDEX_LIMIT {
                return 0.0;
            }
            trials as f64 * (seq.tail_sum(k1 + k) - seq.lagged_product_sum(k1, k))
        }
    }
}

/// Trawl exponent `α*` and long-memory parameter `d* = 1 − α*/2`.
pub fn spectral_params(model: &TrawlModel) -> Result<(f64, f64)> {
    match model.sequence {
        TrawlSequence::Power { alpha, .. } if alpha < 2.0 => Ok((alpha, 1.0 - alpha / 2.0)),
        TrawlSequence::ArfimaMatched { d, .. } => Ok((2.0 * (1.0 - d), d)),
        _ => Err(Error::NoLongMemory),
    }
}
