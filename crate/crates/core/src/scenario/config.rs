//! Declarative scenario files (TOML).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::aggregation::OutOfBoundsMode;
use crate::error::{ConfigIssue, Error, Result};
use crate::inflation::BaseInflationCurve;
use crate::time_model::TimeUnit;

use super::registry::ModelRegistry;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalConfig {
    /// Years per period.
    pub time_unit: TimeUnit,
    pub reference_claim_size: f64,
    /// Number of occurrence periods.
    #[serde(rename = "I")]
    pub periods: u32,
    pub master_seed: u64,
}

/// A module selected by registry name plus its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleSpec {
    pub model: String,
    #[serde(flatten)]
    pub params: toml::Table,
}

impl ModuleSpec {
    pub fn new(model: impl Into<String>, params: toml::Table) -> Self {
        Self {
            model: model.into(),
            params,
        }
    }

    /// Serialize a parameter struct into the flattened table.
    pub fn from_params<T: Serialize>(model: impl Into<String>, params: &T) -> Self {
        let params = toml::Table::try_from(params).expect("parameter structs serialize to tables");
        Self::new(model, params)
    }

    /// Deserialize the parameters into `T`, reporting failures at `path`.
    pub fn params_as<T: for<'de> Deserialize<'de>>(&self, path: &str) -> Result<T> {
        self.params
            .clone()
            .try_into()
            .map_err(|e: toml::de::Error| Error::config(path, e.message().to_string()))
    }
}

/// A superimposed-inflation component that can be switched off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToggleSpec {
    pub enabled: bool,
    pub model: String,
    #[serde(flatten)]
    pub params: toml::Table,
}

impl ToggleSpec {
    pub fn module(&self) -> ModuleSpec {
        ModuleSpec::new(self.model.clone(), self.params.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InflationConfig {
    /// Constant annual base rate, converted to quarterly rates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annual_rate: Option<f64>,
    /// Explicit quarterly base rates; the first applies to quarter 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quarterly_rates: Option<Vec<f64>>,
    pub occurrence: ToggleSpec,
    pub payment: ToggleSpec,
}

impl InflationConfig {
    pub fn base_curve(&self, periods: u32, unit: TimeUnit) -> Result<BaseInflationCurve> {
        let need = BaseInflationCurve::required_quarters(periods, unit);
        match (&self.annual_rate, &self.quarterly_rates) {
            (Some(r), None) => BaseInflationCurve::from_annual(*r, need),
            (None, Some(q)) if q.len() < need => Err(Error::config(
                "quarterly_rates",
                format!("{} rates given but {need} quarters are required to cover 2I-1 periods", q.len()),
            )),
            (None, Some(q)) => BaseInflationCurve::from_quarterly(q.clone()),
            _ => Err(Error::config("", "exactly one of annual_rate and quarterly_rates is required")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MonetaryUnit {
    #[default]
    Currency,
    ReferenceMultiples,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub out_of_bounds: OutOfBoundsMode,
    #[serde(default = "one")]
    pub aggregation_factor: u32,
    #[serde(default)]
    pub monetary_unit: MonetaryUnit,
}

fn one() -> u32 {
    1
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            out_of_bounds: OutOfBoundsMode::Cap,
            aggregation_factor: 1,
            monetary_unit: MonetaryUnit::Currency,
        }
    }
}

/// One complete simulation world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub global: GlobalConfig,
    pub occurrence: ModuleSpec,
    pub severity: ModuleSpec,
    pub notification: ModuleSpec,
    pub closure: ModuleSpec,
    pub payment_count: ModuleSpec,
    pub payment_size: ModuleSpec,
    pub payment_timing: ModuleSpec,
    pub inflation: InflationConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

const REQUIRED: &[&str] = &[
    "global.time_unit",
    "global.reference_claim_size",
    "global.I",
    "global.master_seed",
    "occurrence.model",
    "severity.model",
    "notification.model",
    "closure.model",
    "payment_count.model",
    "payment_size.model",
    "payment_timing.model",
    "inflation.occurrence.enabled",
    "inflation.occurrence.model",
    "inflation.payment.enabled",
    "inflation.payment.model",
];

fn missing_keys(doc: &toml::Table) -> Vec<ConfigIssue> {
    REQUIRED
        .iter()
        .filter(|path| {
            let mut node = Some(doc);
            let parts: Vec<&str> = path.split('.').collect();
            for (k, part) in parts.iter().enumerate() {
                let Some(table) = node else { return true };
                match table.get(*part) {
                    None => return true,
                    Some(toml::Value::Table(t)) => node = Some(t),
                    Some(_) if k + 1 == parts.len() => return false,
                    Some(_) => node = None,
                }
            }
            false
        })
        .map(|path| ConfigIssue::new(*path, "missing required key"))
        .collect()
}

impl ScenarioConfig {
    /// Parse without semantic validation.
    pub fn parse(text: &str) -> Result<Self> {
        let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        let missing = missing_keys(&doc);
        if !missing.is_empty() {
            return Err(Error::Config(missing));
        }
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario configs serialize")
    }

    /// Check every module against the built-in registry, collecting all issues.
    pub fn validate(&self) -> Result<()> {
        self.validate_with(&ModelRegistry::builtin())
    }

    pub fn validate_with(&self, registry: &ModelRegistry) -> Result<()> {
        registry.build(self).map(|_| ())
    }

    /// True when no component depends on the occurrence period and all
    /// inflation is a constant, size-free rate.
    pub fn is_occurrence_invariant(&self) -> bool {
        let closure_free = !self.closure.params.contains_key("speedup");
        let occurrence_free = !self.inflation.occurrence.enabled || self.inflation.occurrence.model == "none";
        let payment = &self.inflation.payment;
        let payment_free = !payment.enabled
            || matches!(payment.model.as_str(), "none" | "constant_rate")
            || payment.params.get("size_threshold").and_then(toml::Value::as_float) == Some(f64::INFINITY);
        let base_flat = match &self.inflation.quarterly_rates {
            Some(q) => q.windows(2).all(|w| w[0] == w[1]),
            None => true,
        };
        let exposure_flat = ["exposure", "frequency"].iter().all(|k| match self.occurrence.params.get(*k) {
            Some(toml::Value::Array(a)) => a.windows(2).all(|w| w[0] == w[1]),
            _ => true,
        });
        closure_free && occurrence_free && payment_free && base_flat && exposure_flat
    }
}

/// Read, parse and validate a scenario file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)?;
    let config = ScenarioConfig::parse(&text)?;
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::presets::preset;

    #[test]
    fn round_trip_is_lossless() {
        for name in ["default", "simple"] {
            let c = preset(name).unwrap();
            let back = ScenarioConfig::parse(&c.to_toml()).unwrap();
            assert_eq!(back, c, "{name}");
        }
    }

    #[test]
    fn missing_keys_are_all_reported() {
        let mut doc: toml::Table = preset("default").unwrap().to_toml().parse().unwrap();
        doc["global"].as_table_mut().unwrap().remove("I");
        doc["closure"].as_table_mut().unwrap().remove("model");
        let err = ScenarioConfig::parse(&toml::to_string(&doc).unwrap()).unwrap_err();
        let Error::Config(issues) = err else { panic!("{err}") };
        let paths: Vec<&str> = issues.iter().map(|i| i.path.as_str()).collect();
        assert_eq!(paths, vec!["global.I", "closure.model"]);
    }

    #[test]
    fn short_rate_vector_names_required_length() {
        let mut c = preset("default").unwrap();
        c.inflation.annual_rate = None;
        c.inflation.quarterly_rates = Some(vec![0.005; 10]);
        let err = c.validate().unwrap_err().to_string();
        assert!(err.contains("79 quarters"), "{err}");
        assert!(err.contains("inflation.quarterly_rates"), "{err}");
    }

    #[test]
    fn invariance_check() {
        assert!(preset("simple").unwrap().is_occurrence_invariant());
        assert!(!preset("default").unwrap().is_occurrence_invariant());
    }

    #[test]
    fn unknown_field_is_a_parse_error() {
        let text = preset("default").unwrap().to_toml().replace("[output]", "[output]\nbogus = 1");
        assert!(matches!(ScenarioConfig::parse(&text), Err(Error::Parse(_))));
    }
}
