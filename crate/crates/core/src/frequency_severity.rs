//! Claim counts, occurrence times and constant-dollar claim sizes.

use std::fmt::Debug;

use rand_distr::{Distribution as _, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{ConfigIssue, Error, Result};
use crate::samplers::{
    DistributionSpec, ModuleId, PowerNormal, RngStream, SampleContext, Sampler, SamplerHook,
    StreamKey,
};
use crate::time_model::TimeUnit;

/// Annual exposure and per-exposure claim frequency for each occurrence period.
#[derive(Debug, Clone, PartialEq)]
pub struct ExposureSchedule {
    exposure: Vec<f64>,
    frequency: Vec<f64>,
}

impl ExposureSchedule {
    pub fn new(exposure: Vec<f64>, frequency: Vec<f64>) -> Result<Self> {
        let mut issues = Vec::new();
        if exposure.is_empty() {
            issues.push(ConfigIssue::new("exposure", "need at least one occurrence period"));
        }
        if exposure.len() != frequency.len() {
            issues.push(ConfigIssue::new(
                "frequency",
                format!(
                    "length {} does not match exposure length {}",
                    frequency.len(),
                    exposure.len()
                ),
            ));
        }
        for (name, values) in [("exposure", &exposure), ("frequency", &frequency)] {
            if let Some(k) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
                issues.push(ConfigIssue::new(
                    format!("{name}[{k}]"),
                    format!("must be non-negative, got {}", values[k]),
                ));
            }
        }
        if !issues.is_empty() {
            return Err(Error::Config(issues));
        }
        Ok(Self {
            exposure,
            frequency,
        })
    }

    pub fn constant(periods: u32, exposure: f64, frequency: f64) -> Result<Self> {
        let n = periods as usize;
        Self::new(vec![exposure; n], vec![frequency; n])
    }

    pub fn periods(&self) -> u32 {
        self.exposure.len() as u32
    }

    /// Expected claim count for a 1-based period.
    pub fn expected_count(&self, period: u32, unit: TimeUnit) -> f64 {
        let k = period as usize - 1;
        self.exposure[k] * self.frequency[k] * unit.years_per_unit()
    }
}

/// Number of claims occurring in one period.
pub trait FrequencyModel: Send + Sync + Debug {
    fn periods(&self) -> u32;
    fn claim_count(&self, period: u32, unit: TimeUnit, rng: &mut RngStream) -> Result<u32>;
}

/// `N_i ~ Poisson(E_i * lambda_i * years_per_unit)`.
#[derive(Debug, Clone)]
pub struct PoissonFrequency {
    pub schedule: ExposureSchedule,
}

impl FrequencyModel for PoissonFrequency {
    fn periods(&self) -> u32 {
        self.schedule.periods()
    }

    fn claim_count(&self, period: u32, unit: TimeUnit, rng: &mut RngStream) -> Result<u32> {
        let mean = self.schedule.expected_count(period, unit);
        if mean == 0.0 {
            return Ok(0);
        }
        let poisson = Poisson::new(mean)
            .map_err(|e| Error::Numeric(format!("Poisson({mean}) for period {period}: {e}")))?;
        Ok(poisson.sample(rng) as u32)
    }
}

/// One count per occurrence period, each drawn from its own period stream.
pub fn simulate_claim_counts(
    model: &dyn FrequencyModel,
    unit: TimeUnit,
    master_seed: u64,
) -> Result<Vec<u32>> {
    (1..=model.periods())
        .map(|i| {
            let mut rng = RngStream::new(master_seed, StreamKey::period(i, ModuleId::ClaimCount));
            model.claim_count(i, unit, &mut rng)
        })
        .collect()
}

/// `count` uniform occurrence times on `(i-1, i]`, sorted ascending so that
/// claim indices run in chronological order.
pub fn simulate_occurrence_times(period: u32, count: u32, rng: &mut RngStream) -> Vec<f64> {
    let start = f64::from(period) - 1.0;
    let mut times: Vec<f64> = (0..count).map(|_| start + rng.uniform()).collect();
    times.sort_by(f64::total_cmp);
    times
}

/// Constant-dollar claim size, returned in reference-claim-size multiples.
pub trait SeverityModel: Send + Sync + Debug {
    fn claim_size(&self, ctx: &SampleContext, rng: &mut RngStream) -> Result<f64>;
}

/// Severity from a distribution family parameterized in currency units.
#[derive(Debug, Clone)]
pub struct DistributionSeverity {
    sampler: Sampler,
    reference_claim_size: f64,
}

impl DistributionSeverity {
    pub fn new(spec: &DistributionSpec, reference_claim_size: f64) -> Result<Self> {
        Ok(Self {
            sampler: spec.build()?,
            reference_claim_size,
        })
    }

    /// `S^0.2 ~ N(9.5, 3)` with a 200,000 reference size.
    pub fn default_power_normal() -> Self {
        Self {
            sampler: Sampler::PowerNormal(PowerNormal::new(9.5, 3.0, 0.2).expect("valid")),
            reference_claim_size: 200_000.0,
        }
    }
}

impl SeverityModel for DistributionSeverity {
    fn claim_size(&self, ctx: &SampleContext, rng: &mut RngStream) -> Result<f64> {
        let s = self.sampler.sample(ctx, rng) / self.reference_claim_size;
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Numeric(format!("non-positive claim size {s}")));
        }
        Ok(s)
    }
}

/// User hook returning sizes directly in reference multiples.
#[derive(Debug, Clone)]
pub struct HookSeverity(pub SamplerHook);

impl SeverityModel for HookSeverity {
    fn claim_size(&self, ctx: &SampleContext, rng: &mut RngStream) -> Result<f64> {
        let s = self.0.call(ctx, rng);
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Numeric(format!("custom severity returned {s}")));
        }
        Ok(s)
    }
}

pub fn simulate_claim_size(
    model: &dyn SeverityModel,
    ctx: &SampleContext,
    rng: &mut RngStream,
) -> Result<f64> {
    model.claim_size(ctx, rng)
}

/// Parameters of the Poisson frequency model as written in scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerPeriod {
    Scalar(f64),
    List(Vec<f64>),
}

impl PerPeriod {
    pub fn expand(&self, periods: u32) -> Vec<f64> {
        match self {
            PerPeriod::Scalar(v) => vec![*v; periods as usize],
            PerPeriod::List(v) => v.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use statrs::distribution::{ContinuousCDF, Normal};

    fn rng(i: u32, r: u32, m: ModuleId) -> RngStream {
        RngStream::new(11, StreamKey::claim(i, r, m))
    }

    #[test]
    fn default_expected_count_is_ninety() {
        let s = ExposureSchedule::constant(40, 12_000.0, 0.03).unwrap();
        assert_relative_eq!(s.expected_count(1, TimeUnit::QUARTER), 90.0, max_relative = 1e-12);
    }

    #[test]
    fn zero_exposure_gives_no_claims() {
        let model = PoissonFrequency {
            schedule: ExposureSchedule::constant(5, 0.0, 0.03).unwrap(),
        };
        assert_eq!(simulate_claim_counts(&model, TimeUnit::QUARTER, 3).unwrap(), vec![0; 5]);
    }

    #[test]
    fn poisson_count_mean() {
        // 1e4 periods at mean 90: sample mean within 90 +/- 3 sqrt(90)/100
        let model = PoissonFrequency {
            schedule: ExposureSchedule::constant(10_000, 12_000.0, 0.03).unwrap(),
        };
        let counts = simulate_claim_counts(&model, TimeUnit::QUARTER, 2024).unwrap();
        let mean = counts.iter().map(|&c| f64::from(c)).sum::<f64>() / counts.len() as f64;
        assert!((mean - 90.0).abs() < 0.3, "mean {mean}");
    }

    #[test]
    fn schedule_validation() {
        assert!(ExposureSchedule::new(vec![1.0, 2.0], vec![0.1]).is_err());
        assert!(ExposureSchedule::new(vec![-1.0], vec![0.1]).is_err());
        assert!(ExposureSchedule::new(vec![], vec![]).is_err());
    }

    #[test]
    fn occurrence_times_support_and_order() {
        let mut r = rng(7, 0, ModuleId::OccurrenceTime);
        assert!(simulate_occurrence_times(7, 0, &mut r).is_empty());
        let t = simulate_occurrence_times(7, 500, &mut r);
        assert!(t.iter().all(|&u| u > 6.0 && u <= 7.0));
        assert!(t.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn occurrence_time_mean() {
        let mut r = rng(1, 0, ModuleId::OccurrenceTime);
        let t = simulate_occurrence_times(1, 1_000_000, &mut r);
        let mean = t.iter().sum::<f64>() / t.len() as f64;
        assert!((mean - 0.5).abs() < 0.001, "mean {mean}");
    }

    #[test]
    fn median_claim_size_in_multiples() {
        let pn = PowerNormal::new(9.5, 3.0, 0.2).unwrap();
        let median = pn.try_quantile(0.5).unwrap();
        assert_relative_eq!(median / 200_000.0, 0.386_890_468_75, max_relative = 1e-12);
    }

    #[test]
    fn hook_severity_passes_through() {
        let model = HookSeverity(SamplerHook::new(|_, _| 1.0));
        let s = simulate_claim_size(&model, &SampleContext::default(), &mut rng(1, 1, ModuleId::ClaimSize));
        assert_eq!(s.unwrap(), 1.0);
    }

    #[test]
    fn large_claim_frequency_matches_normal_tail() {
        let model = DistributionSeverity::default_power_normal();
        let mut r = rng(1, 1, ModuleId::ClaimSize);
        let n = 1_000_000;
        let ctx = SampleContext::default();
        let over = (0..n)
            .filter(|_| model.claim_size(&ctx, &mut r).unwrap() > 1.0)
            .count() as f64
            / n as f64;
        let normal = Normal::new(9.5, 3.0).unwrap();
        let threshold = 200_000f64.powf(0.2);
        let expected = (1.0 - normal.cdf(threshold)) / (1.0 - normal.cdf(0.0));
        let sd = (expected * (1.0 - expected) / n as f64).sqrt();
        assert!((over - expected).abs() < 4.0 * sd, "{over} vs {expected}");
    }
}
