//! Built-in scenarios.

use crate::aggregation::OutOfBoundsMode;
use crate::error::{Error, Result};
use crate::event_times::WeibullDelay;
use crate::inflation::LegislativeReduction;
use crate::payment_plan::{NormalizedWeibullTiming, SettlementDominatedSizes, SizeBandedCount};
use crate::time_model::TimeUnit;

use super::config::{
    GlobalConfig, InflationConfig, ModuleSpec, MonetaryUnit, OutputConfig, ScenarioConfig, ToggleSpec,
};

pub const PRESET_NAMES: [&str; 2] = ["default", "simple"];

pub fn preset(name: &str) -> Result<ScenarioConfig> {
    match name {
        "default" => Ok(default_scenario()),
        "simple" => Ok(simple_scenario()),
        other => Err(Error::Argument(format!(
            "unknown preset '{other}'; known: {}",
            PRESET_NAMES.join(", ")
        ))),
    }
}

/// 40 quarters of a 12,000-vehicle portfolio with settlement speed-up, a
/// legislative change at quarter 21 and size-dependent superimposed inflation.
pub fn default_scenario() -> ScenarioConfig {
    ScenarioConfig {
        global: GlobalConfig {
            time_unit: TimeUnit::QUARTER,
            reference_claim_size: 200_000.0,
            periods: 40,
            master_seed: 20_200_101,
        },
        occurrence: ModuleSpec::new(
            "poisson",
            toml::toml! {
                exposure = 12000.0
                frequency = 0.03
            },
        ),
        severity: ModuleSpec::new(
            "power_normal",
            toml::toml! {
                mu = 9.5
                sigma = 3.0
                power = 0.2
            },
        ),
        notification: ModuleSpec::from_params("weibull", &WeibullDelay::default_notification()),
        closure: ModuleSpec::from_params("weibull", &WeibullDelay::default_settlement()),
        payment_count: ModuleSpec::from_params("size_banded", &SizeBandedCount::default()),
        payment_size: ModuleSpec::from_params("settlement_dominated", &SettlementDominatedSizes::default()),
        payment_timing: ModuleSpec::from_params("normalized_weibull", &NormalizedWeibullTiming::default()),
        inflation: InflationConfig {
            annual_rate: Some(0.02),
            quarterly_rates: None,
            occurrence: ToggleSpec {
                enabled: true,
                model: "legislative_reduction".into(),
                params: toml::Table::try_from(LegislativeReduction::default()).expect("serializes"),
            },
            payment: ToggleSpec {
                enabled: true,
                model: "size_scaled".into(),
                params: toml::toml! {
                    annual_rate = 0.3
                    size_threshold = 1.0
                },
            },
        },
        output: OutputConfig {
            out_of_bounds: OutOfBoundsMode::Cap,
            aggregation_factor: 1,
            monetary_unit: MonetaryUnit::Currency,
        },
    }
}

/// The default world with every occurrence-period effect removed: no
/// settlement speed-up, no legislative change, no superimposed inflation.
pub fn simple_scenario() -> ScenarioConfig {
    let mut c = default_scenario();
    c.closure = ModuleSpec::from_params(
        "weibull",
        &WeibullDelay {
            speedup: None,
            ..WeibullDelay::default_settlement()
        },
    );
    c.inflation.occurrence = ToggleSpec {
        enabled: false,
        model: "none".into(),
        params: toml::Table::new(),
    };
    c.inflation.payment = ToggleSpec {
        enabled: false,
        model: "none".into(),
        params: toml::Table::new(),
    };
    c
}
