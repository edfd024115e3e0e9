//! Notification and settlement delays.
//!
//! Both delays are Weibull by default, with a mean that depends on claim size
//! through a clamped log-linear form and, for settlement, on occurrence period
//! through a speed-up factor that can be overridden after a legislative change.

use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::samplers::{RngStream, Weibull};

/// `min(cap, max(floor, intercept + slope * ln(s / pivot)))`, with `s` and
/// `pivot` in reference multiples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClampedLogLinear {
    pub floor: f64,
    pub cap: f64,
    pub intercept: f64,
    pub slope: f64,
    pub pivot: f64,
}

impl ClampedLogLinear {
    pub fn eval(&self, size: f64) -> f64 {
        (self.intercept + self.slope * (size / self.pivot).ln())
            .max(self.floor)
            .min(self.cap)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pivot > 0.0) {
            return Err(Error::config("pivot", "must be positive"));
        }
        if !(self.floor > 0.0 && self.floor <= self.cap) {
            return Err(Error::config(
                "floor",
                format!("need 0 < floor <= cap, got floor={} cap={}", self.floor, self.cap),
            ));
        }
        Ok(())
    }
}

/// Settlement-delay multiplier by occurrence period: `max(floor, 1 - slope * i)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodSpeedup {
    pub floor: f64,
    pub slope: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub legislative_change: Option<LegislativeOverride>,
}

/// Replaces the speed-up factor for small claims in later periods with
/// `min(cap, start + step * (i - from_period))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegislativeOverride {
    pub from_period: u32,
    /// Applies to claims strictly below this size (reference multiples).
    pub size_below: f64,
    pub start: f64,
    pub step: f64,
    pub cap: f64,
}

impl PeriodSpeedup {
    pub fn factor(&self, period: u32, size: f64) -> f64 {
        let i = f64::from(period);
        match self.legislative_change {
            Some(l) if size < l.size_below && period >= l.from_period => {
                (l.start + l.step * (i - f64::from(l.from_period))).min(l.cap)
            }
            _ => (1.0 - self.slope * i).max(self.floor),
        }
    }
}

/// Delay until notification or, from notification, until settlement.
pub trait DelayModel: Send + Sync + Debug {
    fn sample(&self, period: u32, size: f64, rng: &mut RngStream) -> Result<f64>;

    /// Distributional mean for `(period, size)`, where the model has one.
    fn mean(&self, period: u32, size: f64) -> Option<f64>;
}

/// Weibull delay fitted per claim to `(mean(i, s), cv)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeibullDelay {
    pub mean: ClampedLogLinear,
    pub cv: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speedup: Option<PeriodSpeedup>,
}

impl WeibullDelay {
    /// Notification: mean `min(3, max(1, 2 - ln(s/100000)/3))`, CV 70%.
    pub fn default_notification() -> Self {
        Self {
            mean: ClampedLogLinear {
                floor: 1.0,
                cap: 3.0,
                intercept: 2.0,
                slope: -1.0 / 3.0,
                pivot: 0.5,
            },
            cv: 0.7,
            speedup: None,
        }
    }

    /// Settlement: mean `a(i) min(25, max(1, 6 + 4 ln(s/20000)))`, CV 60%.
    pub fn default_settlement() -> Self {
        Self {
            mean: ClampedLogLinear {
                floor: 1.0,
                cap: 25.0,
                intercept: 6.0,
                slope: 4.0,
                pivot: 0.1,
            },
            cv: 0.6,
            speedup: Some(PeriodSpeedup {
                floor: 0.85,
                slope: 0.0075,
                legislative_change: Some(LegislativeOverride {
                    from_period: 21,
                    size_below: 0.1,
                    start: 0.65,
                    step: 0.02,
                    cap: 0.85,
                }),
            }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.mean.validate()?;
        if !(self.cv > 0.0 && self.cv.is_finite()) {
            return Err(Error::config("cv", format!("must be positive, got {}", self.cv)));
        }
        Ok(())
    }

    pub fn mean_at(&self, period: u32, size: f64) -> f64 {
        let a = self.speedup.map_or(1.0, |sp| sp.factor(period, size));
        a * self.mean.eval(size)
    }
}

impl DelayModel for WeibullDelay {
    fn sample(&self, period: u32, size: f64, rng: &mut RngStream) -> Result<f64> {
        simulate_delay(self.mean_at(period, size), self.cv, rng)
    }

    fn mean(&self, period: u32, size: f64) -> Option<f64> {
        Some(self.mean_at(period, size))
    }
}

/// Default notification mean, in time units; `size` in reference multiples.
pub fn notification_mean(period: u32, size: f64) -> f64 {
    WeibullDelay::default_notification().mean_at(period, size)
}

/// Default settlement mean (from notification), in time units.
pub fn settlement_mean(period: u32, size: f64) -> f64 {
    WeibullDelay::default_settlement().mean_at(period, size)
}

/// One strictly positive draw from the Weibull with the given mean and CV.
pub fn simulate_delay(mean: f64, cv: f64, rng: &mut RngStream) -> Result<f64> {
    Ok(Weibull::from_mean_cv(mean, cv)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::{ModuleId, StreamKey, WeibullParams};
    use approx::assert_relative_eq;

    const REF: f64 = 200_000.0;

    fn m(currency: f64) -> f64 {
        currency / REF
    }

    #[test]
    fn notification_mean_examples() {
        assert_relative_eq!(notification_mean(1, m(100_000.0)), 2.0, max_relative = 1e-14);
        assert_eq!(notification_mean(1, 1e12), 1.0);
        assert_relative_eq!(
            notification_mean(1, m(100_000.0 * (-3.0f64).exp())),
            3.0,
            max_relative = 1e-12
        );
        assert_eq!(notification_mean(1, 1e-9), 3.0);
    }

    #[test]
    fn settlement_mean_examples() {
        assert_relative_eq!(settlement_mean(20, m(20_000.0)), 5.1, max_relative = 1e-14);
        let inner = 6.0 + 4.0 * 0.5f64.ln();
        assert_relative_eq!(inner, 3.227_411_277_760_219, max_relative = 1e-14);
        assert_relative_eq!(settlement_mean(21, m(10_000.0)), 0.65 * inner, max_relative = 1e-14);
        assert_relative_eq!(settlement_mean(10, m(20_000.0)), 0.925 * 6.0, max_relative = 1e-14);
    }

    #[test]
    fn settlement_factor_table() {
        let sp = WeibullDelay::default_settlement().speedup.unwrap();
        let small = m(10_000.0);
        let large = m(50_000.0);
        let expect_large = |i: u32| (1.0 - 0.0075 * f64::from(i)).max(0.85);
        for i in 1..=40 {
            assert_relative_eq!(sp.factor(i, large), expect_large(i), max_relative = 1e-14);
            let expect_small = if i >= 21 {
                (0.65 + 0.02 * f64::from(i - 21)).min(0.85)
            } else {
                expect_large(i)
            };
            assert_relative_eq!(sp.factor(i, small), expect_small, max_relative = 1e-14);
        }
        // boundary: 20,000 exactly is not "below"
        assert_relative_eq!(sp.factor(21, m(20_000.0)), 0.85, max_relative = 1e-14);
        assert_relative_eq!(sp.factor(30, small), 0.83, max_relative = 1e-12);
        assert_relative_eq!(sp.factor(31, small), 0.85, max_relative = 1e-12);
    }

    #[test]
    fn settlement_mean_increasing_in_size() {
        let lo = 0.1 * (-1.25f64).exp();
        let hi = 0.1 * 4.75f64.exp();
        let sizes: Vec<f64> = (1..200).map(|k| lo + (hi - lo) * f64::from(k) / 200.0).collect();
        for i in [1, 15, 25, 40] {
            for w in sizes.windows(2) {
                if w[0] < 0.1 && w[1] >= 0.1 && i >= 21 {
                    continue; // a(i) jumps at the legislative threshold
                }
                assert!(settlement_mean(i, w[1]) > settlement_mean(i, w[0]));
            }
        }
    }

    #[test]
    fn exponential_quantile_exact() {
        use crate::samplers::Quantile;
        let w = Weibull(WeibullParams { shape: 1.0, scale: 2.0 });
        assert_relative_eq!(w.quantile(1.0 - (-1.0f64).exp()), 2.0, max_relative = 1e-14);
    }

    fn sample_stats(mean: f64, cv: f64, n: usize) -> (f64, f64) {
        let mut rng = RngStream::new(5, StreamKey::claim(1, 1, ModuleId::Settlement));
        let xs: Vec<f64> = (0..n).map(|_| simulate_delay(mean, cv, &mut rng).unwrap()).collect();
        assert!(xs.iter().all(|&x| x > 0.0));
        let m = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        (m, var.sqrt() / m)
    }

    #[test]
    fn small_cv_concentrates() {
        let (m, cv) = sample_stats(2.0, 0.01, 100_000);
        assert!((m - 2.0).abs() < 0.01);
        assert!(cv < 0.02, "cv {cv}");
    }

    #[test]
    fn delay_sample_mean_within_one_percent() {
        let (m, cv) = sample_stats(5.55, 0.6, 1_000_000);
        assert!((m / 5.55 - 1.0).abs() < 0.01, "mean {m}");
        assert!((cv / 0.6 - 1.0).abs() < 0.01, "cv {cv}");
    }

    #[test]
    fn invalid_model_rejected() {
        let mut d = WeibullDelay::default_notification();
        d.cv = 0.0;
        assert!(d.validate().is_err());
        d.cv = 0.7;
        d.mean.pivot = 0.0;
        assert!(d.validate().is_err());
    }
}
