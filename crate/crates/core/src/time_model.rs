//! Continuous calendar time and the period indices derived from it.
//!
//! Calendar time starts at 0 and is measured in a user-chosen unit. Periods
//! are the half-open intervals `(k-1, k]`, so an integer time belongs to the
//! earlier period. Time 0 is assigned to period 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Length of one time unit, in years.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TimeUnit {
    years_per_unit: f64,
}

impl TimeUnit {
    pub const QUARTER: TimeUnit = TimeUnit {
        years_per_unit: 0.25,
    };
    pub const YEAR: TimeUnit = TimeUnit {
        years_per_unit: 1.0,
    };

    pub fn new(years_per_unit: f64) -> Result<Self> {
        if !(years_per_unit.is_finite() && years_per_unit > 0.0) {
            return Err(Error::config(
                "time_unit",
                format!("years per unit must be positive, got {years_per_unit}"),
            ));
        }
        Ok(Self { years_per_unit })
    }

    pub fn years_per_unit(&self) -> f64 {
        self.years_per_unit
    }

    pub fn quarters_per_unit(&self) -> f64 {
        self.years_per_unit * 4.0
    }

    /// Per-unit effective rate equivalent to an annual effective rate.
    pub fn rate_from_annual(&self, annual: f64) -> f64 {
        (1.0 + annual).powf(self.years_per_unit) - 1.0
    }

    /// A duration in years expressed in this unit.
    pub fn from_years(&self, years: f64) -> f64 {
        years / self.years_per_unit
    }
}

/// Payment period containing calendar time `t_bar`: `ceil(t_bar)`, with 0 mapped to 1.
pub fn payment_period_of(t_bar: f64) -> Result<u32> {
    if t_bar.is_nan() || t_bar < 0.0 {
        return Err(Error::Domain(format!(
            "calendar time must be non-negative, got {t_bar}"
        )));
    }
    Ok((t_bar.ceil() as u32).max(1))
}

/// Development period (1-based) of time `t_bar` for a claim occurring in period `occurrence`.
pub fn development_period_of(t_bar: f64, occurrence: u32) -> Result<u32> {
    if occurrence == 0 {
        return Err(Error::Domain("occurrence periods start at 1".into()));
    }
    if !(t_bar > f64::from(occurrence) - 1.0) {
        return Err(Error::Inconsistent(format!(
            "time {t_bar} precedes the start of occurrence period {occurrence}"
        )));
    }
    Ok(payment_period_of(t_bar)? - occurrence + 1)
}

pub fn units_to_quarters(duration: f64, unit: TimeUnit) -> f64 {
    duration * unit.quarters_per_unit()
}
