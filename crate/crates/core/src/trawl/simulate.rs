//! Sample paths of trawl processes.
//!
//! Counting seeds with nonincreasing heights use an event representation:
//! an event of copy `γ_i` at level `t` adds one to every `X_k` with
//! `a_{k−i} ≥ t`, which is the contiguous run `k ∈ [i, i + L(t)]` where
//! `L(t) = max{ℓ : a_ℓ ≥ t}`. Each run becomes two writes into a difference
//! array, so a path costs `O(n + J + events)`.
//!
//! Copies far in the past only matter through events that still reach
//! `X_1`. Beyond the explicit copies `j < J`, those events form (exactly for
//! the Poisson seed) a Poisson process whose run lengths `e` satisfy
//! `P(e ≥ k) = S(J + k − 1) / S(J)` with `S(m) = Σ_{j≥m} a_j`. For the
//! mixed-Poisson and Binomial seeds this Poissonized tail changes the
//! autocovariance by at most `Var ζ · Σ_{j≥J} a_j²` (resp.
//! `trials · Σ_{j≥J} a_j²`), and `J` is chosen so that this is below
//! `truncation_tol · r(0)`.
//!
//! All other models use the truncated sum `Σ_{j<J} γ_{k−j}(a_j)` with `J`
//! from [`truncation_index`](super::truncation_index).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::{smallest_index_below, theoretical_acv_at, truncation_index, TrawlModel};
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::seeds::{poisson_count, sample_seed_at, sample_zeta, SeedSpec};
use crate::series::TimeSeries;

/// Default cap on copies × levels evaluated by one path.
pub const DEFAULT_WORK_BUDGET: u64 = 400_000_000;

fn default_tol() -> f64 {
    1e-3
}

fn default_budget() -> u64 {
    DEFAULT_WORK_BUDGET
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub n: usize,
    #[serde(default = "default_tol")]
    pub truncation_tol: f64,
    pub rng_seed: u64,
    #[serde(default = "default_budget", skip_serializing_if = "is_default_budget")]
    pub work_budget: u64,
}

fn is_default_budget(b: &u64) -> bool {
    *b == DEFAULT_WORK_BUDGET
}

impl SimulationConfig {
    pub fn new(n: usize, rng_seed: u64) -> Self {
        SimulationConfig {
            n,
            truncation_tol: default_tol(),
            rng_seed,
            work_budget: DEFAULT_WORK_BUDGET,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.truncation_tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("series length must be >= 2, got {}", self.n)));
        }
        if !(self.truncation_tol > 0.0 && self.truncation_tol < 1.0) {
            return Err(Error::Config(format!(
                "truncation_tol must lie in (0, 1), got {}",
                self.truncation_tol
            )));
        }
        Ok(())
    }
}

/// How a model is simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum SimulationPlan {
    /// Event runs with `explicit_copies − 1` explicit past copies and a
    /// Poissonized remainder.
    Events { explicit_copies: u64 },
    /// Truncated sum over `terms` heights.
    Truncated { terms: u64 },
}

/// Precomputed sampler for one model and configuration.
#[derive(Debug, Clone)]
pub struct Simulator {
    model: TrawlModel,
    config: SimulationConfig,
    plan: SimulationPlan,
    heights: Vec<f64>,
    /// `S(J + i)` for `i = 0..n`; empty for the truncated path.
    deep_tail: Vec<f64>,
    /// Sorted levels and their lags for the truncated path.
    levels: Vec<f64>,
    lags: Vec<usize>,
}

impl Simulator {
    pub fn new(model: &TrawlModel, config: &SimulationConfig) -> Result<Self> {
        config.validate()?;
        model.validate()?;
        let n = config.n;
        let plan = plan_for(model, config)?;
        let mut sim = Simulator {
            model: model.clone(),
            config: config.clone(),
            plan,
            heights: Vec::new(),
            deep_tail: Vec::new(),
            levels: Vec::new(),
            lags: Vec::new(),
        };
        match plan {
            SimulationPlan::Events { explicit_copies } => {
                let j = explicit_copies;
                sim.heights = model.sequence.values(0, j as usize + n + 1);
                let mut tail = vec![0.0; n];
                tail[n - 1] = model.sequence.tail_sum(j + n as u64 - 1);
                for i in (0..n - 1).rev() {
                    tail[i] = tail[i + 1] + sim.heights[j as usize + i];
                }
                sim.deep_tail = tail;
            }
            SimulationPlan::Truncated { terms } => {
                let heights = model.sequence.values(0, terms as usize);
                let mut order: Vec<usize> = (0..heights.len()).collect();
                order.sort_by(|&a, &b| heights[b].total_cmp(&heights[a]));
                sim.levels = order.iter().map(|&i| heights[i]).collect();
                sim.lags = order;
                sim.heights = heights;
            }
        }
        Ok(sim)
    }

    pub fn plan(&self) -> SimulationPlan {
        self.plan
    }

    /// Path driven by the `stream`-th substream of `config.rng_seed`.
    pub fn sample_stream(&self, stream: u64) -> TimeSeries {
        self.sample(&mut stream_rng(self.config.rng_seed, stream))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> TimeSeries {
        let values = match self.plan {
            SimulationPlan::Events { explicit_copies } => self.sample_events(explicit_copies, rng),
            SimulationPlan::Truncated { .. } => self.sample_truncated(rng),
        };
        TimeSeries::new_unchecked(values)
    }

    /// `L(t) = max{ℓ : a_ℓ ≥ t}`, saturating at the precomputed horizon.
    fn reach(&self, t: f64) -> usize {
        self.heights.partition_point(|&a| a >= t).saturating_sub(1)
    }

    fn sample_events<R: Rng + ?Sized>(&self, explicit: u64, rng: &mut R) -> Vec<f64> {
        let n = self.config.n;
        let mut diff = vec![0i64; n + 1];
        // Run over X indices [start, i + L(t)] for a copy at (possibly negative) index i.
        let cover = |i: i64, t: f64, diff: &mut [i64]| {
            let end = (i + self.reach(t) as i64).min(n as i64 - 1);
            let start = i.max(0);
            if end >= start {
                diff[start as usize] += 1;
                diff[end as usize + 1] -= 1;
            }
        };
        let seed = self.model.seed;
        // Copies i = -(J-1), ..., n-1; copy i needs events up to level a_{max(0, -i)}.
        for i in -(explicit as i64 - 1)..n as i64 {
            let level = self.heights[(-i).max(0) as usize];
            match seed {
                SeedSpec::Poisson => {
                    for _ in 0..poisson_count(level, rng) {
                        cover(i, level * (1.0 - rng.random::<f64>()), &mut diff);
                    }
                }
                SeedSpec::MixedPoisson { zeta_shape, zeta_rate } => {
                    let zeta = sample_zeta(zeta_shape, zeta_rate, rng);
                    for _ in 0..poisson_count(zeta * level, rng) {
                        cover(i, level * (1.0 - rng.random::<f64>()), &mut diff);
                    }
                }
                SeedSpec::Binomial { trials } => {
                    let p = level.min(1.0);
                    let count = if p >= 1.0 {
                        trials as u64
                    } else {
                        Binomial::new(trials as u64, p).expect("probability in [0, 1]").sample(rng)
                    };
                    for _ in 0..count {
                        cover(i, p * (1.0 - rng.random::<f64>()), &mut diff);
                    }
                }
                SeedSpec::RandomLine { .. } => unreachable!("random-line seeds use the truncated path"),
            }
        }
        // Poissonized remainder: copies at distance j >= J from X_1.
        let top = self.deep_tail[0];
        for _ in 0..poisson_count(seed.event_rate() * top, rng) {
            let target = top * (1.0 - rng.random::<f64>());
            let e = self.deep_tail.partition_point(|&s| s >= target).max(1);
            diff[0] += 1;
            diff[e] -= 1;
        }
        let mut level = 0i64;
        diff[..n]
            .iter()
            .map(|d| {
                level += d;
                level as f64
            })
            .collect()
    }

    fn sample_truncated<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.config.n as i64;
        let terms = self.levels.len() as i64;
        let mut x = vec![0.0; n as usize];
        for copy in -(terms - 1)..n {
            let draw = sample_seed_at(&self.model.seed, &self.levels, rng)
                .expect("levels sorted at construction");
            for (&lag, &value) in self.lags.iter().zip(&draw.values) {
                let k = copy + lag as i64;
                if (0..n).contains(&k) {
                    x[k as usize] += value;
                }
            }
        }
        x
    }
}

fn plan_for(model: &TrawlModel, config: &SimulationConfig) -> Result<SimulationPlan> {
    let n = config.n as u64;
    let tol = config.truncation_tol;
    let over_budget = |what: &str, work: u64| {
        Error::Resource(format!(
            "{what} needs {work} seed evaluations, above the budget of {}; raise truncation_tol",
            config.work_budget
        ))
    };
    if model.seed.is_counting() && model.sequence.is_nonincreasing() {
        let r0 = theoretical_acv_at(model, 0);
        let j = match model.seed {
            SeedSpec::Poisson => 1,
            SeedSpec::MixedPoisson { .. } => {
                let var = model.seed.mixing_moments().1;
                smallest_index_below(1, tol * r0, |j| var * model.sequence.power_tail(2, j))?
            }
            SeedSpec::Binomial { trials } => {
                let from = model.first_sub_unit_index().max(1);
                smallest_index_below(from, tol * r0, |j| {
                    trials as f64 * model.sequence.power_tail(2, j)
                })?
            }
            SeedSpec::RandomLine { .. } => unreachable!(),
        };
        if j.saturating_add(n) > config.work_budget {
            return Err(over_budget("simulation", j.saturating_add(n)));
        }
        return Ok(SimulationPlan::Events { explicit_copies: j });
    }
    let terms = truncation_index(model, tol)?.max(1);
    let work = terms.saturating_mul(n.saturating_add(terms));
    if work > config.work_budget {
        return Err(over_budget("truncated simulation", work));
    }
    Ok(SimulationPlan::Truncated { terms })
}

/// `(X_1, …, X_n)` for `model`, deterministic in `config.rng_seed`.
pub fn simulate(model: &TrawlModel, config: &SimulationConfig) -> Result<TimeSeries> {
    let sim = Simulator::new(model, config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    Ok(sim.sample(&mut rng))
}
