//! Recover distribution parameters from a target mean and coefficient of variation.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

const SHAPE_TOLERANCE: f64 = 1e-10;
const MAX_ITERATIONS: usize = 200;
const SHAPE_BRACKET: (f64, f64) = (1e-2, 1e6);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeibullParams {
    pub shape: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
}

/// Squared coefficient of variation of a Weibull with the given shape.
pub(crate) fn weibull_cv_squared(shape: f64) -> f64 {
    (ln_gamma(1.0 + 2.0 / shape) - 2.0 * ln_gamma(1.0 + 1.0 / shape)).exp_m1()
}

/// Shape and scale of the Weibull with the requested mean and CV.
///
/// The squared CV is strictly decreasing in the shape, so the shape is found
/// by bisection on `ln(shape)`; the scale then follows from the mean.
pub fn weibull_from_mean_cv(mean: f64, cv: f64) -> Result<WeibullParams> {
    if !(mean.is_finite() && mean > 0.0) {
        return Err(Error::config("mean", format!("Weibull mean must be positive, got {mean}")));
    }
    if !(cv.is_finite() && cv > 0.0) {
        return Err(Error::config("cv", format!("Weibull CV must be positive, got {cv}")));
    }
    let target = cv * cv;
    let (mut lo, mut hi) = (SHAPE_BRACKET.0.ln(), SHAPE_BRACKET.1.ln());
    if !(weibull_cv_squared(lo.exp()) >= target && weibull_cv_squared(hi.exp()) <= target) {
        return Err(Error::Numeric(format!(
            "Weibull CV {cv} outside the supported shape range {SHAPE_BRACKET:?}"
        )));
    }
    let mut converged = false;
    for _ in 0..MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if weibull_cv_squared(mid.exp()) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo).exp_m1() < SHAPE_TOLERANCE {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numeric(format!(
            "Weibull shape did not converge for mean={mean}, cv={cv}"
        )));
    }
    let shape = (0.5 * (lo + hi)).exp();
    let scale = mean / ln_gamma(1.0 + 1.0 / shape).exp();
    Ok(WeibullParams { shape, scale })
}

/// Method-of-moments Beta parameters. Requires `0 < mean < 1` and
/// `cv^2 < (1 - mean) / mean`.
pub fn beta_from_mean_cv(mean: f64, cv: f64) -> Result<BetaParams> {
    if !(mean > 0.0 && mean < 1.0) || !(cv.is_finite() && cv > 0.0) {
        return Err(Error::config(
            "",
            format!("Beta needs 0 < mean < 1 and cv > 0, got mean={mean}, cv={cv}"),
        ));
    }
    let variance = (mean * cv).powi(2);
    let k = mean * (1.0 - mean) / variance - 1.0;
    if k <= 0.0 {
        return Err(Error::config(
            "",
            format!(
                "Beta with mean={mean}, cv={cv} is infeasible: cv^2 must be below (1-mean)/mean = {}",
                (1.0 - mean) / mean
            ),
        ));
    }
    Ok(BetaParams {
        alpha: mean * k,
        beta: (1.0 - mean) * k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use statrs::distribution::{Beta, Weibull};
    use statrs::statistics::Distribution;

    #[test]
    fn exponential_is_cv_one() {
        let p = weibull_from_mean_cv(1.0, 1.0).unwrap();
        assert_relative_eq!(p.shape, 1.0, max_relative = 1e-9);
        assert_relative_eq!(p.scale, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn weibull_rejects_bad_inputs() {
        assert!(matches!(weibull_from_mean_cv(1.0, -1.0), Err(Error::Config(_))));
        assert!(matches!(weibull_from_mean_cv(0.0, 1.0), Err(Error::Config(_))));
    }

    #[test]
    fn weibull_moments_match_targets() {
        for &(mean, cv) in &[(2.0, 0.6), (5.55, 0.6), (1.0, 0.2), (3.0, 0.35), (1.0, 0.01), (1.0, 10.0)] {
            let p = weibull_from_mean_cv(mean, cv).unwrap();
            let w = Weibull::new(p.shape, p.scale).unwrap();
            let m = w.mean().unwrap();
            assert_relative_eq!(m, mean, max_relative = 1e-8);
            assert_relative_eq!(w.std_dev().unwrap() / m, cv, max_relative = 1e-8);
        }
    }

    #[test]
    fn uniform_is_beta_one_one() {
        let p = beta_from_mean_cv(0.5, 1.0 / 3f64.sqrt()).unwrap();
        assert_relative_eq!(p.alpha, 1.0, max_relative = 1e-12);
        assert_relative_eq!(p.beta, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn beta_plug_through() {
        let p = beta_from_mean_cv(0.9, 0.03).unwrap();
        assert_relative_eq!(p.alpha / (p.alpha + p.beta), 0.9, max_relative = 1e-12);
        let b = Beta::new(p.alpha, p.beta).unwrap();
        assert_relative_eq!(b.std_dev().unwrap() / b.mean().unwrap(), 0.03, max_relative = 1e-10);
    }

    #[test]
    fn beta_infeasible_names_pair() {
        let err = beta_from_mean_cv(0.5, 2.0).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("mean=0.5") && msg.contains("cv=2"), "{msg}");
        assert!(beta_from_mean_cv(1.0, 0.1).is_err());
        assert!(beta_from_mean_cv(0.0, 0.1).is_err());
    }
}
