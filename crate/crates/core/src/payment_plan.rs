//! Partial payments: how many, how large (as shares of the claim), and when.
//!
//! Claims with four or more payments carry a settlement payment and a final
//! payment, simulated first; the remaining mass is spread over the earlier
//! "minor" payments. Claims with two or three payments only have minor
//! payments. Inter-payment delays are drawn unnormalized and rescaled to sum
//! to the settlement delay.

use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::samplers::{BetaDist, Categorical, GeometricMin, RngStream, Weibull};
use crate::time_model::TimeUnit;

pub trait PaymentCountModel: Send + Sync + Debug {
    fn sample(&self, size: f64, rng: &mut RngStream) -> Result<u32>;
}

/// Count distribution chosen by claim-size band (sizes in reference multiples).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SizeBandedCount {
    /// Upper bound (inclusive) of the small band.
    pub small_max: f64,
    pub small_counts: Vec<u32>,
    pub small_probabilities: Vec<f64>,
    /// Upper bound (inclusive) of the medium band.
    pub medium_max: f64,
    pub medium_counts: Vec<u32>,
    pub medium_probabilities: Vec<f64>,
    /// Large claims: geometric with this minimum and mean
    /// `min(mean_cap, minimum + ln(s / medium_max))`.
    pub large_minimum: u32,
    pub large_mean_cap: f64,
}

impl Default for SizeBandedCount {
    fn default() -> Self {
        Self {
            small_max: 7_500.0 / 200_000.0,
            small_counts: vec![1, 2],
            small_probabilities: vec![0.5, 0.5],
            medium_max: 15_000.0 / 200_000.0,
            medium_counts: vec![2, 3],
            medium_probabilities: vec![1.0 / 3.0, 2.0 / 3.0],
            large_minimum: 4,
            large_mean_cap: 8.0,
        }
    }
}

impl SizeBandedCount {
    pub fn validate(&self) -> Result<()> {
        self.categorical(&self.small_counts, &self.small_probabilities)
            .map_err(|e| prefix(e, "small_probabilities"))?;
        self.categorical(&self.medium_counts, &self.medium_probabilities)
            .map_err(|e| prefix(e, "medium_probabilities"))?;
        if self.small_counts.contains(&0) || self.medium_counts.contains(&0) || self.large_minimum == 0 {
            return Err(Error::config("counts", "payment counts must be at least 1"));
        }
        if !(self.small_max > 0.0 && self.small_max <= self.medium_max) {
            return Err(Error::config("small_max", "need 0 < small_max <= medium_max"));
        }
        if !(self.large_mean_cap > f64::from(self.large_minimum)) {
            return Err(Error::config("large_mean_cap", "must exceed large_minimum"));
        }
        Ok(())
    }

    fn categorical(&self, counts: &[u32], probs: &[f64]) -> Result<Categorical> {
        Categorical::new(counts.iter().map(|&c| f64::from(c)).collect(), probs)
    }

    /// Mean of the geometric used for large claims.
    pub fn large_mean(&self, size: f64) -> f64 {
        (f64::from(self.large_minimum) + (size / self.medium_max).ln()).min(self.large_mean_cap)
    }
}

fn prefix(e: Error, path: &str) -> Error {
    Error::Config(e.into_issues(path))
}

impl PaymentCountModel for SizeBandedCount {
    fn sample(&self, size: f64, rng: &mut RngStream) -> Result<u32> {
        if size <= self.small_max {
            return Ok(self.categorical(&self.small_counts, &self.small_probabilities)?.sample(rng) as u32);
        }
        if size <= self.medium_max {
            return Ok(self.categorical(&self.medium_counts, &self.medium_probabilities)?.sample(rng) as u32);
        }
        let mean = self.large_mean(size);
        if mean <= f64::from(self.large_minimum) {
            // only reachable through rounding just above medium_max
            rng.uniform();
            return Ok(self.large_minimum);
        }
        Ok(GeometricMin::new(self.large_minimum, mean)?.sample(rng))
    }
}

pub fn simulate_payment_count(size: f64, rng: &mut RngStream) -> Result<u32> {
    SizeBandedCount::default().sample(size, rng)
}

/// Shares of the claim paid by each partial payment; must sum to one.
pub trait PaymentSizeModel: Send + Sync + Debug {
    fn proportions(&self, size: f64, count: u32, rng: &mut RngStream) -> Result<Vec<f64>>;
}

/// Settlement-dominated payment structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SettlementDominatedSizes {
    /// Share of the last two payments: `min(last_two_cap, last_two_intercept
    /// + last_two_slope * ln(s / last_two_pivot))`; its complement is Beta.
    pub last_two_cap: f64,
    pub last_two_intercept: f64,
    pub last_two_slope: f64,
    pub last_two_pivot: f64,
    pub last_two_cv: f64,
    /// Settlement payment's share of the last two.
    pub settlement_share_mean: f64,
    pub settlement_share_cv: f64,
    pub minor_cv: f64,
}

impl Default for SettlementDominatedSizes {
    fn default() -> Self {
        Self {
            last_two_cap: 0.95,
            last_two_intercept: 0.75,
            last_two_slope: 0.04,
            last_two_pivot: 20_000.0 / 200_000.0,
            last_two_cv: 0.2,
            settlement_share_mean: 0.9,
            settlement_share_cv: 0.03,
            minor_cv: 0.1,
        }
    }
}

/// Beta mean used for a minor payment when `mean = remaining / count` would leave (0, 1).
const MINOR_MEAN_CLAMP: f64 = 0.999;

impl SettlementDominatedSizes {
    pub fn validate(&self) -> Result<()> {
        BetaDist::from_mean_cv(self.settlement_share_mean, self.settlement_share_cv)
            .map_err(|e| prefix(e, "settlement_share_cv"))?;
        // complement mean is smallest at the cap
        BetaDist::from_mean_cv(1.0 - self.last_two_cap, self.last_two_cv)
            .map_err(|e| prefix(e, "last_two_cv"))?;
        if !(self.minor_cv > 0.0) {
            return Err(Error::config("minor_cv", "must be positive"));
        }
        if !(self.last_two_pivot > 0.0) {
            return Err(Error::config("last_two_pivot", "must be positive"));
        }
        Ok(())
    }

    /// Mean of `1 - (p[m-1] + p[m])`.
    pub fn complement_mean(&self, size: f64) -> f64 {
        1.0 - (self.last_two_intercept + self.last_two_slope * (size / self.last_two_pivot).ln())
            .min(self.last_two_cap)
    }

    /// Settlement and final payment shares, for claims with at least four payments.
    pub fn last_two(&self, size: f64, rng: &mut RngStream) -> Result<(f64, f64)> {
        let complement = BetaDist::from_mean_cv(self.complement_mean(size), self.last_two_cv)?.sample(rng);
        let total = 1.0 - complement;
        let q = BetaDist::from_mean_cv(self.settlement_share_mean, self.settlement_share_cv)?.sample(rng);
        Ok(split_last_two(total, q))
    }

    /// `count` positive shares summing to `remaining`.
    pub fn minor(&self, remaining: f64, count: u32, rng: &mut RngStream) -> Result<Vec<f64>> {
        if count == 0 {
            return Ok(Vec::new());
        }
        if remaining == 0.0 {
            return Ok(vec![0.0; count as usize]);
        }
        if count == 1 {
            return Ok(vec![remaining]);
        }
        let mut mean = remaining / f64::from(count);
        if mean >= 1.0 {
            mean = MINOR_MEAN_CLAMP;
        }
        let beta = BetaDist::from_mean_cv(mean, self.minor_cv)?;
        let raw: Vec<f64> = (0..count).map(|_| beta.sample(rng)).collect();
        Ok(normalize(&raw, remaining))
    }
}

/// `(q * total, (1 - q) * total)`.
pub fn split_last_two(total: f64, settlement_share: f64) -> (f64, f64) {
    (settlement_share * total, (1.0 - settlement_share) * total)
}

/// Rescale `raw` so it sums to `target`.
pub fn normalize(raw: &[f64], target: f64) -> Vec<f64> {
    let sum: f64 = raw.iter().sum();
    raw.iter().map(|x| target * x / sum).collect()
}

impl PaymentSizeModel for SettlementDominatedSizes {
    fn proportions(&self, size: f64, count: u32, rng: &mut RngStream) -> Result<Vec<f64>> {
        match count {
            0 => Err(Error::Argument("payment count must be at least 1".into())),
            1 => Ok(vec![1.0]),
            2 | 3 => self.minor(1.0, count, rng),
            _ => {
                let (settlement, last) = self.last_two(size, rng)?;
                let mut shares = self.minor(1.0 - settlement - last, count - 2, rng)?;
                shares.push(settlement);
                shares.push(last);
                Ok(shares)
            }
        }
    }
}

pub fn simulate_last_two_payments(size: f64, count: u32, rng: &mut RngStream) -> Result<(f64, f64)> {
    if count < 4 {
        return Err(Error::Argument(format!(
            "settlement and final payments need at least 4 payments, got {count}"
        )));
    }
    SettlementDominatedSizes::default().last_two(size, rng)
}

pub fn simulate_minor_payments(remaining: f64, count: u32, rng: &mut RngStream) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&remaining) {
        return Err(Error::Argument(format!("remaining share {remaining} outside [0, 1]")));
    }
    SettlementDominatedSizes::default().minor(remaining, count, rng)
}

/// Inter-partial delays; must be positive and sum to the settlement delay.
pub trait PaymentTimingModel: Send + Sync + Debug {
    fn delays(
        &self,
        size: f64,
        count: u32,
        settlement_delay: f64,
        unit: TimeUnit,
        rng: &mut RngStream,
    ) -> Result<Vec<f64>>;
}

/// Weibull delays normalized to the claim's realized settlement delay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizedWeibullTiming {
    /// Mean of the last delay (settlement to final payment), in years,
    /// for claims with at least `final_from_count` payments.
    pub final_mean_years: f64,
    pub final_cv: f64,
    pub final_from_count: u32,
    pub other_cv: f64,
}

impl Default for NormalizedWeibullTiming {
    fn default() -> Self {
        Self {
            final_mean_years: 0.25,
            final_cv: 0.2,
            final_from_count: 4,
            other_cv: 0.35,
        }
    }
}

impl NormalizedWeibullTiming {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("final_mean_years", self.final_mean_years),
            ("final_cv", self.final_cv),
            ("other_cv", self.other_cv),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

impl PaymentTimingModel for NormalizedWeibullTiming {
    fn delays(
        &self,
        _size: f64,
        count: u32,
        settlement_delay: f64,
        unit: TimeUnit,
        rng: &mut RngStream,
    ) -> Result<Vec<f64>> {
        if count == 0 {
            return Err(Error::Argument("payment count must be at least 1".into()));
        }
        if count == 1 {
            return Ok(vec![settlement_delay]);
        }
        let other = Weibull::from_mean_cv(settlement_delay / f64::from(count), self.other_cv)?;
        let last = if count >= self.final_from_count {
            Weibull::from_mean_cv(unit.from_years(self.final_mean_years), self.final_cv)?
        } else {
            other
        };
        let raw: Vec<f64> = (1..=count)
            .map(|m| if m == count { last.sample(rng) } else { other.sample(rng) })
            .collect();
        Ok(normalize(&raw, settlement_delay))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PaymentPlan {
    pub proportions: Vec<f64>,
    /// Inter-partial delays in time units; the first is measured from notification.
    pub delays: Vec<f64>,
    /// Constant-dollar amounts in reference multiples.
    pub amounts: Vec<f64>,
}

impl PaymentPlan {
    pub fn count(&self) -> usize {
        self.proportions.len()
    }
}

pub struct PlanModels<'a> {
    pub sizes: &'a dyn PaymentSizeModel,
    pub timing: &'a dyn PaymentTimingModel,
}

/// Shares from the size model, delays from the timing model, each on its own stream.
pub fn build_payment_plan(
    models: &PlanModels<'_>,
    size: f64,
    count: u32,
    settlement_delay: f64,
    unit: TimeUnit,
    size_rng: &mut RngStream,
    timing_rng: &mut RngStream,
) -> Result<PaymentPlan> {
    let proportions = models.sizes.proportions(size, count, size_rng)?;
    let delays = models
        .timing
        .delays(size, count, settlement_delay, unit, timing_rng)?;
    if proportions.len() != count as usize || delays.len() != count as usize {
        return Err(Error::Inconsistent(format!(
            "plan for {count} payments has {} shares and {} delays",
            proportions.len(),
            delays.len()
        )));
    }
    if let Some(d) = delays.iter().find(|d| !(**d > 0.0)) {
        return Err(Error::Numeric(format!("non-positive inter-partial delay {d}")));
    }
    let amounts = proportions.iter().map(|p| p * size).collect();
    Ok(PaymentPlan {
        proportions,
        delays,
        amounts,
    })
}

/// Payment epochs `u + v + d1 + ... + dm`.
pub fn payment_epochs(occurrence: f64, notification_delay: f64, delays: &[f64]) -> Vec<f64> {
    let mut t = occurrence + notification_delay;
    delays
        .iter()
        .map(|d| {
            t += d;
            t
        })
        .collect()
}
