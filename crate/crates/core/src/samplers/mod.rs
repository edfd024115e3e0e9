//! Random streams and the distribution machinery shared by all lifecycle models.

pub mod dist;
pub mod fit;
pub mod rng;

pub use dist::{
    inverse_transform, BetaDist, Categorical, DistributionSpec, GeometricMin, PowerNormal,
    Quantile, SampleContext, Sampler, SamplerHook, Weibull,
};
pub use fit::{beta_from_mean_cv, weibull_from_mean_cv, BetaParams, WeibullParams};
pub use rng::{ModuleId, RngStream, StreamKey};
