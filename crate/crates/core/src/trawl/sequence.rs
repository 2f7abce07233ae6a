//! Trawl height sequences `(a_j)` and their tail sums.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::special::{gamma, hurwitz_zeta, ln_gamma_ratio};

/// Height sequence of a trawl process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrawlSequence {
    /// `a_j = c (j + 1)^{-α}`.
    Power { c: f64, alpha: f64 },
    /// `a_j = c ρ^j`.
    Geometric { c: f64, rho: f64 },
    /// `a_j = c (r_d(j) − r_d(j + 1))` with `r_d` the ARFIMA(0, d, 0)
    /// autocovariance, so that the Poisson-seed trawl shares its spectrum.
    ArfimaMatched { c: f64, d: f64 },
    /// Finite list; zero beyond its end.
    Explicit { values: Vec<f64> },
}

/// Lags up to which the ARFIMA autocovariance is built by the ratio
/// recursion before switching to the asymptotic gamma-ratio expansion.
const ARFIMA_RECURSION_LIMIT: u64 = 1000;

/// Terms summed directly before an asymptotic remainder is added.
const DIRECT_TERMS: u64 = 20_000;

fn arfima_r0(d: f64) -> f64 {
    if d == 0.0 {
        return 1.0;
    }
    gamma(1.0 - 2.0 * d) / gamma(1.0 - d).powi(2)
}

/// `(r_d(0), …, r_d(kmax))`, the autocovariance of ARFIMA(0, d, 0) with unit
/// innovation variance.
pub fn arfima_acv(d: f64, kmax: usize) -> Result<Vec<f64>> {
    if !(d.abs() < 0.5) {
        return Err(domain(format!("ARFIMA memory parameter must satisfy |d| < 1/2, got {d}")));
    }
    let mut out = Vec::with_capacity(kmax + 1);
    let mut r = arfima_r0(d);
    out.push(r);
    for k in 0..kmax {
        let kf = k as f64;
        r *= (kf + d) / (kf + 1.0 - d);
        out.push(r);
    }
    Ok(out)
}

/// Single ARFIMA autocovariance value, usable at very large lags.
pub(crate) fn arfima_acv_at(d: f64, k: u64) -> f64 {
    let limit = k.min(ARFIMA_RECURSION_LIMIT);
    let mut r = arfima_r0(d);
    for j in 0..limit {
        let jf = j as f64;
        r *= (jf + d) / (jf + 1.0 - d);
    }
    if k <= ARFIMA_RECURSION_LIMIT || r == 0.0 {
        return r;
    }
    let z0 = ARFIMA_RECURSION_LIMIT as f64;
    r * (ln_gamma_ratio(k as f64, d, 1.0 - d) - ln_gamma_ratio(z0, d, 1.0 - d)).exp()
}

/// `Σ_{m≥0} binom(-α, m) k^m ζ(2α + m, q)`, i.e. `Σ_{x ≥ q} x^{-α} (x + k)^{-α}`
/// over `x = q, q + 1, …`, valid for `k < q`.
fn shifted_product_zeta(alpha: f64, k: f64, q: f64) -> f64 {
    let mut acc = 0.0;
    let mut coeff = 1.0;
    let ratio = k / q;
    for m in 0..60 {
        let mf = m as f64;
        let term = coeff * k.powi(m) * hurwitz_zeta(2.0 * alpha + mf, q);
        acc += term;
        if term.abs() <= 1e-17 * acc.abs() || ratio == 0.0 {
            break;
        }
        coeff *= -(alpha + mf) / (mf + 1.0);
    }
    acc
}

impl TrawlSequence {
    pub fn power(c: f64, alpha: f64) -> Result<Self> {
        let s = TrawlSequence::Power { c, alpha };
        s.validate().map(|_| s)
    }

    pub fn geometric(c: f64, rho: f64) -> Result<Self> {
        let s = TrawlSequence::Geometric { c, rho };
        s.validate().map(|_| s)
    }

    pub fn arfima_matched(c: f64, d: f64) -> Result<Self> {
        let s = TrawlSequence::ArfimaMatched { c, d };
        s.validate().map(|_| s)
    }

    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        let s = TrawlSequence::Explicit { values };
        s.validate().map(|_| s)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            TrawlSequence::Power { c, alpha } => *c > 0.0 && c.is_finite() && *alpha > 1.0 && alpha.is_finite(),
            TrawlSequence::Geometric { c, rho } => *c > 0.0 && c.is_finite() && *rho > 0.0 && *rho < 1.0,
            TrawlSequence::ArfimaMatched { c, d } => *c > 0.0 && c.is_finite() && *d > 0.0 && *d < 0.5,
            TrawlSequence::Explicit { values } => values.iter().all(|v| v.is_finite() && *v >= 0.0),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid trawl sequence: {self:?}")))
        }
    }

    /// True when `a_j ≥ a_{j+1}` for all `j`.
    pub fn is_nonincreasing(&self) -> bool {
        match self {
            TrawlSequence::Explicit { values } => {
                values.windows(2).all(|w| w[0] >= w[1])
            }
            _ => true,
        }
    }

    /// `a_j`.
    pub fn value(&self, j: u64) -> f64 {
        match self {
            TrawlSequence::Power { c, alpha } => c * ((j + 1) as f64).powf(-alpha),
            TrawlSequence::Geometric { c, rho } => c * rho.powf(j as f64),
            TrawlSequence::ArfimaMatched { c, d } => {
                // r(j) − r(j+1) = r(j) (1 − 2d) / (j + 1 − d)
                c * arfima_acv_at(*d, j) * (1.0 - 2.0 * d) / (j as f64 + 1.0 - d)
            }
            TrawlSequence::Explicit { values } => {
                usize::try_from(j).ok().and_then(|j| values.get(j)).copied().unwrap_or(0.0)
            }
        }
    }

    /// `(a_start, …, a_{start+count-1})` in one pass.
    pub fn values(&self, start: u64, count: usize) -> Vec<f64> {
        match self {
            TrawlSequence::ArfimaMatched { c, d } => {
                let mut r = arfima_acv_at(*d, start);
                let mut out = Vec::with_capacity(count);
                for j in start..start + count as u64 {
                    let jf = j as f64;
                    out.push(c * r * (1.0 - 2.0 * d) / (jf + 1.0 - d));
                    r *= (jf + d) / (jf + 1.0 - d);
                }
                out
            }
            _ => (start..start + count as u64).map(|j| self.value(j)).collect(),
        }
    }

    /// `Σ_{j ≥ k} a_j`.
    pub fn tail_sum(&self, k: u64) -> f64 {
        self.power_tail(1, k)
    }

    /// `Σ_{j ≥ k} a_j^p` for `p ∈ {1, 2}`.
    pub(crate) fn power_tail(&self, p: i32, k: u64) -> f64 {
        debug_assert!(p == 1 || p == 2);
        match self {
            TrawlSequence::Power { c, alpha } => {
                c.powi(p) * hurwitz_zeta(p as f64 * alpha, (k + 1) as f64)
            }
            TrawlSequence::Geometric { c, rho } => {
                let rp = rho.powi(p);
                c.powi(p) * rp.powf(k as f64) / (1.0 - rp)
            }
            TrawlSequence::ArfimaMatched { c, d } => {
                if p == 1 {
                    c * arfima_acv_at(*d, k)
                } else {
                    let direct = self.values(k, DIRECT_TERMS as usize);
                    let head: f64 = direct.iter().map(|a| a * a).sum();
                    head + self.asymptotic_product_tail(k + DIRECT_TERMS, 0)
                }
            }
            TrawlSequence::Explicit { values } => values
                .iter()
                .skip(usize::try_from(k).unwrap_or(usize::MAX))
                .map(|v| v.powi(p))
                .sum(),
        }
    }

    /// `Σ_{j ≥ start} a_j a_{j+k}`.
    pub(crate) fn lagged_product_sum(&self, start: u64, k: u64) -> f64 {
        match self {
            TrawlSequence::Geometric { c, rho } => {
                c * c * rho.powf((2 * start + k) as f64) / (1.0 - rho * rho)
            }
            TrawlSequence::Explicit { values } => {
                let n = values.len() as u64;
                (start..n.saturating_sub(k))
                    .map(|j| values[j as usize] * values[(j + k) as usize])
                    .sum()
            }
            TrawlSequence::Power { .. } | TrawlSequence::ArfimaMatched { .. } => {
                let split = start + (20 * k).max(2_000);
                let a = self.values(start, (split - start + k) as usize);
                let head: f64 = (0..(split - start) as usize).map(|i| a[i] * a[i + k as usize]).sum();
                head + self.asymptotic_product_tail(split, k)
            }
        }
    }

    /// `lagged_product_sum(start, k)` for every `k ≤ kmax`, sharing one
    /// evaluation of the heights.
    pub(crate) fn lagged_product_sums(&self, start: u64, kmax: u64) -> Vec<f64> {
        match self {
            TrawlSequence::Power { .. } | TrawlSequence::ArfimaMatched { .. } => {
                let head_len = |k: u64| (20 * k).max(2_000);
                let a = self.values(start, (head_len(kmax) + kmax) as usize);
                (0..=kmax)
                    .map(|k| {
                        let len = head_len(k) as usize;
                        let head: f64 = (0..len).map(|i| a[i] * a[i + k as usize]).sum();
                        head + self.asymptotic_product_tail(start + len as u64, k)
                    })
                    .collect()
            }
            _ => (0..=kmax).map(|k| self.lagged_product_sum(start, k)).collect(),
        }
    }

    /// `Σ_{j ≥ from} a_j a_{j+k}` for power-law sequences, `from ≥ 20 k`.
    fn asymptotic_product_tail(&self, from: u64, k: u64) -> f64 {
        match self {
            TrawlSequence::Power { c, alpha } => {
                c * c * shifted_product_zeta(*alpha, k as f64, (from + 1) as f64)
            }
            TrawlSequence::ArfimaMatched { d, .. } => {
                // a_j = C (j + 1)^{-(2 - 2d)} (1 + O(1/j)); C matched at `from`.
                let alpha = 2.0 - 2.0 * d;
                let q = (from + 1) as f64;
                let scale = self.value(from) * q.powf(alpha);
                scale * scale * shifted_product_zeta(alpha, k as f64, q)
            }
            _ => unreachable!("only power-law sequences use the asymptotic remainder"),
        }
    }

    /// Index of the first height strictly below `level`, searched up to `limit`.
    pub(crate) fn first_below(&self, level: f64, limit: u64) -> Option<u64> {
        if !self.is_nonincreasing() {
            return (0..=limit).find(|&j| self.value(j) < level);
        }
        if self.value(0) < level {
            return Some(0);
        }
        let (mut lo, mut hi) = (0u64, 1u64);
        while self.value(hi) >= level {
            lo = hi;
            if hi >= limit {
                return None;
            }
            hi = (hi * 2).min(limit);
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.value(mid) >= level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(hi)
    }
}

/// `a_j`.
pub fn sequence_value(seq: &TrawlSequence, j: u64) -> f64 {
    seq.value(j)
}

/// `Σ_{j ≥ k} a_j`.
pub fn sequence_tail_sum(seq: &TrawlSequence, k: u64) -> f64 {
    seq.tail_sum(k)
}
