//! Name-to-factory tables for every pluggable lifecycle slot.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Deserialize;

use crate::error::{ConfigIssue, Error, Result};
use crate::event_times::{DelayModel, WeibullDelay};
use crate::frequency_severity::{
    DistributionSeverity, ExposureSchedule, FrequencyModel, PerPeriod, PoissonFrequency, SeverityModel,
};
use crate::inflation::{
    InflationModel, LegislativeReduction, NoInflation, OccurrenceInflation, PaymentInflation, SizeScaledRate,
};
use crate::payment_plan::{
    NormalizedWeibullTiming, PaymentCountModel, PaymentSizeModel, PaymentTimingModel, SettlementDominatedSizes,
    SizeBandedCount,
};
use crate::samplers::DistributionSpec;
use crate::time_model::TimeUnit;

use super::config::{ModuleSpec, ScenarioConfig};
use super::simulate::Scenario;

/// Global settings a factory may need.
#[derive(Debug, Clone, Copy)]
pub struct BuildContext {
    pub unit: TimeUnit,
    pub reference_claim_size: f64,
    pub periods: u32,
}

pub type Factory<T> = Arc<dyn Fn(&ModuleSpec, &BuildContext) -> Result<Arc<T>> + Send + Sync>;

pub struct Slot<T: ?Sized> {
    factories: BTreeMap<String, Factory<T>>,
}

impl<T: ?Sized> Slot<T> {
    fn new() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    /// Add or replace the factory registered under `name`.
    pub fn register(
        &mut self,
        name: impl Into<String>,
        factory: impl Fn(&ModuleSpec, &BuildContext) -> Result<Arc<T>> + Send + Sync + 'static,
    ) -> &mut Self {
        self.factories.insert(name.into(), Arc::new(factory));
        self
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }

    pub fn build(&self, spec: &ModuleSpec, ctx: &BuildContext, path: &str) -> Result<Arc<T>, Vec<ConfigIssue>> {
        let factory = self.factories.get(&spec.model).ok_or_else(|| {
            vec![ConfigIssue::new(
                format!("{path}.model"),
                format!("unknown model '{}'; known: {}", spec.model, self.names().join(", ")),
            )]
        })?;
        factory(spec, ctx).map_err(|e| e.into_issues(path))
    }
}

pub struct ModelRegistry {
    pub occurrence: Slot<dyn FrequencyModel>,
    pub severity: Slot<dyn SeverityModel>,
    pub notification: Slot<dyn DelayModel>,
    pub closure: Slot<dyn DelayModel>,
    pub payment_count: Slot<dyn PaymentCountModel>,
    pub payment_size: Slot<dyn PaymentSizeModel>,
    pub payment_timing: Slot<dyn PaymentTimingModel>,
    pub occurrence_inflation: Slot<dyn OccurrenceInflation>,
    pub payment_inflation: Slot<dyn PaymentInflation>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PoissonParams {
    exposure: PerPeriod,
    /// Annual claim frequency per unit of exposure.
    frequency: PerPeriod,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SizeScaledParams {
    annual_rate: f64,
    /// Reference multiples.
    size_threshold: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantRateParams {
    annual_rate: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

fn per_period(value: &PerPeriod, periods: u32, key: &str) -> Result<Vec<f64>> {
    let v = value.expand(periods);
    if v.len() != periods as usize {
        return Err(Error::config(key, format!("has {} entries, expected I = {periods}", v.len())));
    }
    Ok(v)
}

fn delay(spec: &ModuleSpec, _: &BuildContext) -> Result<Arc<dyn DelayModel>> {
    let d: WeibullDelay = spec.params_as("")?;
    d.validate()?;
    Ok(Arc::new(d))
}

fn take<T>(issues: &mut Vec<ConfigIssue>, r: Result<T, Vec<ConfigIssue>>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            issues.extend(e);
            None
        }
    }
}

const SEVERITY_FAMILIES: [&str; 6] = ["weibull", "beta", "geometric_min", "power_normal", "categorical", "constant"];

impl ModelRegistry {
    /// Registry holding every built-in model.
    pub fn builtin() -> Self {
        let mut r = Self {
            occurrence: Slot::new(),
            severity: Slot::new(),
            notification: Slot::new(),
            closure: Slot::new(),
            payment_count: Slot::new(),
            payment_size: Slot::new(),
            payment_timing: Slot::new(),
            occurrence_inflation: Slot::new(),
            payment_inflation: Slot::new(),
        };
        r.occurrence.register("poisson", |spec, ctx| {
            let p: PoissonParams = spec.params_as("")?;
            let exposure = per_period(&p.exposure, ctx.periods, "exposure");
            let frequency = per_period(&p.frequency, ctx.periods, "frequency");
            let (exposure, frequency) = match (exposure, frequency) {
                (Ok(e), Ok(f)) => (e, f),
                (e, f) => {
                    let issues = [e.err(), f.err()].into_iter().flatten().flat_map(|e| e.into_issues("")).collect();
                    return Err(Error::Config(issues));
                }
            };
            Ok(Arc::new(PoissonFrequency {
                schedule: ExposureSchedule::new(exposure, frequency)?,
            }))
        });
        for family in SEVERITY_FAMILIES {
            r.severity.register(family, move |spec, ctx| {
                let mut table = spec.params.clone();
                table.insert("family".into(), toml::Value::String(family.into()));
                let dist: DistributionSpec = table
                    .try_into()
                    .map_err(|e: toml::de::Error| Error::config("", e.message().to_string()))?;
                Ok(Arc::new(DistributionSeverity::new(&dist, ctx.reference_claim_size)?))
            });
        }
        r.notification.register("weibull", delay);
        r.closure.register("weibull", delay);
        r.payment_count.register("size_banded", |spec, _| {
            let m: SizeBandedCount = spec.params_as("")?;
            m.validate()?;
            Ok(Arc::new(m))
        });
        r.payment_size.register("settlement_dominated", |spec, _| {
            let m: SettlementDominatedSizes = spec.params_as("")?;
            m.validate()?;
            Ok(Arc::new(m))
        });
        r.payment_timing.register("normalized_weibull", |spec, _| {
            let m: NormalizedWeibullTiming = spec.params_as("")?;
            m.validate()?;
            Ok(Arc::new(m))
        });
        r.occurrence_inflation.register("legislative_reduction", |spec, _| {
            let m: LegislativeReduction = spec.params_as("")?;
            m.validate()?;
            Ok(Arc::new(m))
        });
        r.occurrence_inflation.register("none", |spec, _| {
            let _: NoParams = spec.params_as("")?;
            Ok(Arc::new(NoInflation))
        });
        r.payment_inflation.register("size_scaled", |spec, ctx| {
            let p: SizeScaledParams = spec.params_as("")?;
            if !(p.size_threshold > 0.0) {
                return Err(Error::config("size_threshold", "must be positive"));
            }
            Ok(Arc::new(SizeScaledRate::from_annual(p.annual_rate, p.size_threshold, ctx.unit)))
        });
        r.payment_inflation.register("constant_rate", |spec, ctx| {
            let p: ConstantRateParams = spec.params_as("")?;
            Ok(Arc::new(SizeScaledRate::from_annual(p.annual_rate, f64::INFINITY, ctx.unit)))
        });
        r.payment_inflation.register("none", |spec, _| {
            let _: NoParams = spec.params_as("")?;
            Ok(Arc::new(NoInflation))
        });
        r
    }

    /// Build the runtime scenario, reporting every configuration issue at once.
    pub fn build(&self, config: &ScenarioConfig) -> Result<Scenario> {
        let mut issues = Vec::new();
        let g = &config.global;
        if g.periods == 0 {
            issues.push(ConfigIssue::new("global.I", "must be at least 1"));
        }
        if !(g.reference_claim_size > 0.0 && g.reference_claim_size.is_finite()) {
            issues.push(ConfigIssue::new("global.reference_claim_size", "must be positive"));
        }
        if let Err(e) = TimeUnit::new(g.time_unit.years_per_unit()) {
            issues.extend(e.into_issues("global"));
        }
        let factor = config.output.aggregation_factor;
        if factor == 0 || !g.periods.is_multiple_of(factor.max(1)) {
            issues.push(ConfigIssue::new(
                "output.aggregation_factor",
                format!("{factor} does not divide I = {}", g.periods),
            ));
        }
        if !issues.is_empty() {
            return Err(Error::Config(issues));
        }
        let ctx = BuildContext {
            unit: g.time_unit,
            reference_claim_size: g.reference_claim_size,
            periods: g.periods,
        };

        let frequency = take(&mut issues, self.occurrence.build(&config.occurrence, &ctx, "occurrence"));
        let severity = take(&mut issues, self.severity.build(&config.severity, &ctx, "severity"));
        let notification = take(&mut issues, self.notification.build(&config.notification, &ctx, "notification"));
        let closure = take(&mut issues, self.closure.build(&config.closure, &ctx, "closure"));
        let payment_count = take(&mut issues, self.payment_count.build(&config.payment_count, &ctx, "payment_count"));
        let payment_size = take(&mut issues, self.payment_size.build(&config.payment_size, &ctx, "payment_size"));
        let payment_timing = take(&mut issues, self.payment_timing.build(&config.payment_timing, &ctx, "payment_timing"));
        let inf = &config.inflation;
        let occurrence = take(&mut issues, self.occurrence_inflation.build(&inf.occurrence.module(), &ctx, "inflation.occurrence"));
        let payment = take(&mut issues, self.payment_inflation.build(&inf.payment.module(), &ctx, "inflation.payment"));
        let base = take(&mut issues, inf.base_curve(g.periods, g.time_unit).map_err(|e| e.into_issues("inflation")));

        match (
            frequency,
            severity,
            notification,
            closure,
            payment_count,
            payment_size,
            payment_timing,
            occurrence,
            payment,
            base,
        ) {
            (
                Some(frequency),
                Some(severity),
                Some(notification),
                Some(closure),
                Some(payment_count),
                Some(payment_size),
                Some(payment_timing),
                Some(occurrence),
                Some(payment),
                Some(base),
            ) => Ok(Scenario {
                periods: g.periods,
                unit: g.time_unit,
                reference_claim_size: g.reference_claim_size,
                master_seed: g.master_seed,
                frequency,
                severity,
                notification,
                closure,
                payment_count,
                payment_size,
                payment_timing,
                inflation: InflationModel {
                    base,
                    occurrence,
                    payment,
                    occurrence_enabled: inf.occurrence.enabled,
                    payment_enabled: inf.payment.enabled,
                    unit: g.time_unit,
                },
                output: config.output.clone(),
            }),
            _ => Err(Error::Config(issues)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::presets::preset;

    #[test]
    fn unknown_model_lists_alternatives() {
        let mut c = preset("default").unwrap();
        c.closure.model = "lognormal".into();
        let err = ModelRegistry::builtin().build(&c).err().unwrap().to_string();
        assert!(err.contains("closure.model"), "{err}");
        assert!(err.contains("known: weibull"), "{err}");
    }

    #[test]
    fn issues_from_several_modules_are_collected() {
        let mut c = preset("default").unwrap();
        c.occurrence.params.insert("exposure".into(), toml::Value::Array(vec![1.0.into(); 3]));
        c.notification.params.insert("cv".into(), (-1.0).into());
        c.payment_size.params.insert("last_two_cv".into(), 5.0.into());
        let Err(Error::Config(issues)) = ModelRegistry::builtin().build(&c) else { panic!() };
        let paths: Vec<&str> = issues.iter().map(|i| i.path.as_str()).collect();
        assert!(paths.contains(&"occurrence.exposure"), "{paths:?}");
        assert!(paths.contains(&"notification.cv"), "{paths:?}");
        assert!(paths.iter().any(|p| p.starts_with("payment_size")), "{paths:?}");
    }

    #[test]
    fn beta_cv_too_large_is_rejected_with_pair() {
        let mut c = preset("default").unwrap();
        c.severity = ModuleSpec::new(
            "beta",
            toml::toml! { mean = 0.5
            cv = 3.0 },
        );
        let err = ModelRegistry::builtin().build(&c).err().unwrap().to_string();
        assert!(err.contains("severity") && err.contains("cv=3"), "{err}");
    }

    #[test]
    fn custom_factory_can_be_registered() {
        let mut reg = ModelRegistry::builtin();
        reg.notification.register("instant", |_, _| {
            #[derive(Debug)]
            struct Instant;
            impl DelayModel for Instant {
                fn sample(&self, _: u32, _: f64, _: &mut crate::samplers::RngStream) -> Result<f64> {
                    Ok(1e-6)
                }
                fn mean(&self, _: u32, _: f64) -> Option<f64> {
                    Some(1e-6)
                }
            }
            Ok(Arc::new(Instant))
        });
        let mut c = preset("default").unwrap();
        c.notification = ModuleSpec::new("instant", toml::Table::new());
        let s = reg.build(&c).unwrap();
        assert_eq!(s.notification.mean(1, 1.0), Some(1e-6));
        assert!(c.validate().is_err());
    }
}
