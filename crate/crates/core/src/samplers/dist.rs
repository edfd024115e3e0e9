//! Distribution families used by the lifecycle models.
//!
//! Continuous families draw through their quantile function where it has a
//! closed form (Weibull, power-normal). Beta draws use the gamma-ratio
//! sampler from `rand_distr`; its quantile is available separately for
//! inverse-transform use.

use std::fmt;
use std::sync::Arc;

use rand_distr::Distribution as _;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::beta::beta_reg;

use super::fit::{beta_from_mean_cv, weibull_from_mean_cv, BetaParams, WeibullParams};
use super::rng::RngStream;
use crate::error::{Error, Result};

/// A monotone map from `(0, 1]` to realizations.
pub trait Quantile {
    fn quantile(&self, z: f64) -> f64;
}

impl<F: Fn(f64) -> f64> Quantile for F {
    fn quantile(&self, z: f64) -> f64 {
        self(z)
    }
}

/// Draw by applying a quantile function to the stream's next `(0, 1]` uniform.
pub fn inverse_transform<Q: Quantile + ?Sized>(q: &Q, rng: &mut RngStream) -> f64 {
    q.quantile(rng.uniform())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weibull(pub WeibullParams);

impl Weibull {
    pub fn from_mean_cv(mean: f64, cv: f64) -> Result<Self> {
        weibull_from_mean_cv(mean, cv).map(Weibull)
    }

    /// Strictly positive draw; uses an open uniform so the quantile stays finite.
    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        self.quantile(rng.open_uniform())
    }
}

impl Quantile for Weibull {
    fn quantile(&self, z: f64) -> f64 {
        self.0.scale * (-(-z).ln_1p()).powf(1.0 / self.0.shape)
    }
}

#[derive(Debug, Clone)]
pub struct BetaDist {
    params: BetaParams,
    sampler: rand_distr::Beta<f64>,
}

impl BetaDist {
    pub fn new(params: BetaParams) -> Result<Self> {
        let sampler = rand_distr::Beta::new(params.alpha, params.beta)
            .map_err(|e| Error::Numeric(format!("Beta({}, {}): {e}", params.alpha, params.beta)))?;
        Ok(Self { params, sampler })
    }

    pub fn from_mean_cv(mean: f64, cv: f64) -> Result<Self> {
        Self::new(beta_from_mean_cv(mean, cv)?)
    }

    pub fn params(&self) -> BetaParams {
        self.params
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        self.sampler.sample(rng)
    }
}

impl Quantile for BetaDist {
    /// Bisection on the regularized incomplete beta function.
    fn quantile(&self, z: f64) -> f64 {
        let BetaParams { alpha, beta } = self.params;
        if z >= 1.0 {
            return 1.0;
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if beta_reg(alpha, beta, mid) < z {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// `minimum + G` with `G` geometric on `{0, 1, ...}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricMin {
    pub minimum: u32,
    /// Success probability of `G`.
    pub p: f64,
}

impl GeometricMin {
    /// Moment-matched so that the mean of `minimum + G` equals `mean`.
    pub fn new(minimum: u32, mean: f64) -> Result<Self> {
        if !(mean > f64::from(minimum)) || !mean.is_finite() {
            return Err(Error::config(
                "mean",
                format!("geometric mean {mean} must exceed the minimum {minimum}"),
            ));
        }
        Ok(Self {
            minimum,
            p: 1.0 / (mean - f64::from(minimum) + 1.0),
        })
    }

    pub fn mean(&self) -> f64 {
        f64::from(self.minimum) + (1.0 - self.p) / self.p
    }

    pub fn quantile_count(&self, z: f64) -> u32 {
        if self.p >= 1.0 {
            return self.minimum;
        }
        // P(G >= k) = (1-p)^k, inverted on (0, 1]
        let g = (z.ln() / (-self.p).ln_1p()).floor();
        self.minimum.saturating_add(g.min(f64::from(u32::MAX)) as u32)
    }

    pub fn sample(&self, rng: &mut RngStream) -> u32 {
        self.quantile_count(rng.uniform())
    }
}

/// `X^(1/power)` with `X ~ Normal(mu, sigma)` conditioned on `X > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerNormal {
    pub mu: f64,
    pub sigma: f64,
    pub power: f64,
    normal: Normal,
}

impl PowerNormal {
    pub fn new(mu: f64, sigma: f64, power: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::config("sigma", format!("must be positive, got {sigma}")));
        }
        if !(power > 0.0 && power.is_finite()) {
            return Err(Error::config("power", format!("must be positive, got {power}")));
        }
        let normal = Normal::new(mu, sigma).map_err(|e| Error::config("mu", e.to_string()))?;
        Ok(Self {
            mu,
            sigma,
            power,
            normal,
        })
    }

    pub fn transform(&self, x: f64) -> f64 {
        x.powf(1.0 / self.power)
    }

    /// Maps a uniform to the untruncated normal and back through the power;
    /// returns `None` when the normal value is not positive.
    pub fn try_quantile(&self, z: f64) -> Option<f64> {
        let x = self.normal.inverse_cdf(z.min(1.0 - f64::EPSILON));
        (x > 0.0).then(|| self.transform(x))
    }

    /// Rejection: redraw the uniform until the normal value is positive.
    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        loop {
            if let Some(v) = self.try_quantile(rng.open_uniform()) {
                return v;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Categorical {
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Categorical {
    pub fn new(values: Vec<f64>, probabilities: &[f64]) -> Result<Self> {
        if values.is_empty() || values.len() != probabilities.len() {
            return Err(Error::config(
                "probabilities",
                "need one probability per value and at least one value",
            ));
        }
        if probabilities.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::config("probabilities", "probabilities must be non-negative"));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::config(
                "probabilities",
                format!("probabilities must sum to 1, got {total}"),
            ));
        }
        let mut acc = 0.0;
        let cumulative = probabilities
            .iter()
            .map(|p| {
                acc += p / total;
                acc
            })
            .collect();
        Ok(Self { values, cumulative })
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        self.quantile(rng.uniform())
    }
}

impl Quantile for Categorical {
    fn quantile(&self, z: f64) -> f64 {
        let idx = self
            .cumulative
            .iter()
            .position(|&c| z <= c)
            .unwrap_or(self.values.len() - 1);
        self.values[idx]
    }
}

/// Where in the lifecycle a draw is being made.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SampleContext {
    pub occurrence_period: u32,
    /// Constant-dollar claim size in reference multiples, once known.
    pub claim_size: Option<f64>,
}

type HookFn = dyn Fn(&SampleContext, &mut RngStream) -> f64 + Send + Sync;

/// User-supplied replacement sampler.
#[derive(Clone)]
pub struct SamplerHook(Arc<HookFn>);

impl SamplerHook {
    pub fn new(f: impl Fn(&SampleContext, &mut RngStream) -> f64 + Send + Sync + 'static) -> Self {
        Self(Arc::new(f))
    }

    pub fn call(&self, ctx: &SampleContext, rng: &mut RngStream) -> f64 {
        (self.0)(ctx, rng)
    }
}

impl fmt::Debug for SamplerHook {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SamplerHook(..)")
    }
}

/// Declarative description of a distribution, as it appears in scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    Weibull { mean: f64, cv: f64 },
    Beta { mean: f64, cv: f64 },
    GeometricMin { minimum: u32, mean: f64 },
    PowerNormal { mu: f64, sigma: f64, power: f64 },
    Categorical { values: Vec<f64>, probabilities: Vec<f64> },
    Constant { value: f64 },
}

impl DistributionSpec {
    pub fn build(&self) -> Result<Sampler> {
        Ok(match self {
            DistributionSpec::Weibull { mean, cv } => Sampler::Weibull(Weibull::from_mean_cv(*mean, *cv)?),
            DistributionSpec::Beta { mean, cv } => Sampler::Beta(BetaDist::from_mean_cv(*mean, *cv)?),
            DistributionSpec::GeometricMin { minimum, mean } => {
                Sampler::GeometricMin(GeometricMin::new(*minimum, *mean)?)
            }
            DistributionSpec::PowerNormal { mu, sigma, power } => {
                Sampler::PowerNormal(PowerNormal::new(*mu, *sigma, *power)?)
            }
            DistributionSpec::Categorical {
                values,
                probabilities,
            } => Sampler::Categorical(Categorical::new(values.clone(), probabilities)?),
            DistributionSpec::Constant { value } => Sampler::Constant(*value),
        })
    }
}

/// A ready-to-draw distribution, built-in or custom.
#[derive(Debug, Clone)]
pub enum Sampler {
    Weibull(Weibull),
    Beta(BetaDist),
    GeometricMin(GeometricMin),
    PowerNormal(PowerNormal),
    Categorical(Categorical),
    Constant(f64),
    Custom(SamplerHook),
}

impl Sampler {
    pub fn sample(&self, ctx: &SampleContext, rng: &mut RngStream) -> f64 {
        match self {
            Sampler::Weibull(d) => d.sample(rng),
            Sampler::Beta(d) => d.sample(rng),
            Sampler::GeometricMin(d) => f64::from(d.sample(rng)),
            Sampler::PowerNormal(d) => d.sample(rng),
            Sampler::Categorical(d) => d.sample(rng),
            Sampler::Constant(v) => *v,
            Sampler::Custom(h) => h.call(ctx, rng),
        }
    }
}
