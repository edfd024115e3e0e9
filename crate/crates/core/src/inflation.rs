//! Base and superimposed inflation.
//!
//! The base index compounds quarterly effective rates at quarter ends and
//! interpolates exponentially within a quarter. Superimposed inflation has an
//! occurrence-period component `g_O(i | s)` and a payment-time component
//! `g_C(t | s)`; each is normalized by its value at argument 1 when a
//! constant-dollar payment is converted to a paid amount.

use std::fmt::Debug;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time_model::{units_to_quarters, TimeUnit};

#[derive(Debug, Clone, PartialEq)]
pub struct BaseInflationCurve {
    quarterly_rates: Vec<f64>,
    /// `log_index[k]` is the log of the index at the end of quarter `k`.
    log_index: Vec<f64>,
}

impl BaseInflationCurve {
    pub fn from_quarterly(quarterly_rates: Vec<f64>) -> Result<Self> {
        if let Some(k) = quarterly_rates.iter().position(|r| !(*r > -1.0 && r.is_finite())) {
            return Err(Error::config(
                format!("quarterly_rates[{k}]"),
                format!("rate must exceed -1, got {}", quarterly_rates[k]),
            ));
        }
        let mut log_index = Vec::with_capacity(quarterly_rates.len() + 1);
        log_index.push(0.0);
        let mut acc = 0.0;
        for r in &quarterly_rates {
            acc += r.ln_1p();
            log_index.push(acc);
        }
        Ok(Self {
            quarterly_rates,
            log_index,
        })
    }

    /// Constant annual effective rate as `quarters` equal quarterly rates.
    pub fn from_annual(annual_rate: f64, quarters: usize) -> Result<Self> {
        Self::from_quarterly(vec![(1.0 + annual_rate).powf(0.25) - 1.0; quarters])
    }

    /// Quarters needed to cover payment periods `1..=2I-1`.
    pub fn required_quarters(periods: u32, unit: TimeUnit) -> usize {
        let horizon = units_to_quarters(f64::from(2 * periods - 1), unit);
        (horizon - 1e-9).ceil().max(0.0) as usize
    }

    pub fn quarters(&self) -> usize {
        self.quarterly_rates.len()
    }

    pub fn quarterly_rates(&self) -> &[f64] {
        &self.quarterly_rates
    }

    pub fn index(&self, t_bar: f64, unit: TimeUnit) -> Result<f64> {
        self.index_at_quarter(units_to_quarters(t_bar, unit))
    }

    pub fn index_at_quarter(&self, q: f64) -> Result<f64> {
        let horizon = self.quarters() as f64;
        if !(q >= 0.0) || q > horizon + 1e-9 {
            return Err(Error::Domain(format!(
                "inflation index requested at quarter {q}, curve covers 0..={horizon}"
            )));
        }
        let whole = (q.floor() as usize).min(self.quarters());
        let frac = q - whole as f64;
        let mut log_f = self.log_index[whole];
        if frac > 0.0 {
            log_f += frac * self.quarterly_rates[whole].ln_1p();
        }
        Ok(log_f.exp())
    }
}

/// Occurrence-period superimposed inflation `g_O(i | s)`.
pub trait OccurrenceInflation: Send + Sync + Debug {
    fn index(&self, period: u32, size: f64) -> f64;
}

/// Payment-time superimposed inflation `g_C(t | s)`.
pub trait PaymentInflation: Send + Sync + Debug {
    fn index(&self, t_bar: f64, size: f64) -> f64;
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NoInflation;

impl OccurrenceInflation for NoInflation {
    fn index(&self, _period: u32, _size: f64) -> f64 {
        1.0
    }
}

impl PaymentInflation for NoInflation {
    fn index(&self, _t_bar: f64, _size: f64) -> f64 {
        1.0
    }
}

/// After `after_period`, sizes drop by `max_reduction * max(0, 1 - s / size_threshold)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegislativeReduction {
    pub after_period: u32,
    pub max_reduction: f64,
    /// Reference multiples.
    pub size_threshold: f64,
}

impl Default for LegislativeReduction {
    fn default() -> Self {
        Self {
            after_period: 20,
            max_reduction: 0.4,
            size_threshold: 50_000.0 / 200_000.0,
        }
    }
}

impl LegislativeReduction {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.max_reduction) {
            return Err(Error::config("max_reduction", "must lie in [0, 1)"));
        }
        if !(self.size_threshold > 0.0) {
            return Err(Error::config("size_threshold", "must be positive"));
        }
        Ok(())
    }
}

impl OccurrenceInflation for LegislativeReduction {
    fn index(&self, period: u32, size: f64) -> f64 {
        if period <= self.after_period {
            1.0
        } else {
            1.0 - self.max_reduction * (1.0 - size / self.size_threshold).max(0.0)
        }
    }
}

/// `(1 + gamma * max(0, 1 - s / size_threshold))^t`, `gamma` the per-unit
/// equivalent of an annual rate. An infinite threshold gives a size-free rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeScaledRate {
    pub per_unit_rate: f64,
    pub size_threshold: f64,
}

impl SizeScaledRate {
    pub fn from_annual(annual_rate: f64, size_threshold: f64, unit: TimeUnit) -> Self {
        Self {
            per_unit_rate: unit.rate_from_annual(annual_rate),
            size_threshold,
        }
    }

    pub fn rate_for(&self, size: f64) -> f64 {
        if self.size_threshold.is_infinite() {
            return self.per_unit_rate;
        }
        self.per_unit_rate * (1.0 - size / self.size_threshold).max(0.0)
    }
}

impl PaymentInflation for SizeScaledRate {
    fn index(&self, t_bar: f64, size: f64) -> f64 {
        (1.0 + self.rate_for(size)).powf(t_bar)
    }
}

/// Default `g_O`: 1 up to period 20, then the 40% size-tapered reduction.
pub fn default_g_o(period: u32, size: f64) -> f64 {
    LegislativeReduction::default().index(period, size)
}

/// Default `g_C`: 30% p.a. for the smallest claims, tapering to zero at the
/// reference size.
pub fn default_g_c(t_bar: f64, size: f64, unit: TimeUnit) -> f64 {
    SizeScaledRate::from_annual(0.3, 1.0, unit).index(t_bar, size)
}

/// Everything needed to turn a constant-dollar payment into a paid amount.
#[derive(Debug, Clone)]
pub struct InflationModel {
    pub base: BaseInflationCurve,
    pub occurrence: Arc<dyn OccurrenceInflation>,
    pub payment: Arc<dyn PaymentInflation>,
    pub occurrence_enabled: bool,
    pub payment_enabled: bool,
    pub unit: TimeUnit,
}

impl InflationModel {
    pub fn base_only(base: BaseInflationCurve, unit: TimeUnit) -> Self {
        Self {
            base,
            occurrence: Arc::new(NoInflation),
            payment: Arc::new(NoInflation),
            occurrence_enabled: false,
            payment_enabled: false,
            unit,
        }
    }

    /// `s * f(t)/f(1) * g_O(i|s)/g_O(1|s) * g_C(t|s)/g_C(1|s)` with `t` the
    /// (capped) payment epoch and `size` the claim's constant-dollar size.
    pub fn inflate_payment(&self, amount: f64, epoch: f64, period: u32, size: f64) -> Result<f64> {
        let base = self.base.index(epoch, self.unit)? / self.base.index(1.0, self.unit)?;
        let occurrence = if self.occurrence_enabled {
            self.occurrence.index(period, size) / self.occurrence.index(1, size)
        } else {
            1.0
        };
        let payment = if self.payment_enabled {
            self.payment.index(epoch, size) / self.payment.index(1.0, size)
        } else {
            1.0
        };
        Ok(amount * base * occurrence * payment)
    }
}
