//! Float transcendentals that work with or without `std`, plus a
//! numerically careful weighted power sum.

#[cfg(feature = "std")]
mod imp {
    #[inline]
    pub fn powf(x: f64, y: f64) -> f64 {
        x.powf(y)
    }
    #[inline]
    pub fn ln(x: f64) -> f64 {
        x.ln()
    }
    #[inline]
    pub fn exp(x: f64) -> f64 {
        x.exp()
    }
    #[inline]
    pub fn sqrt(x: f64) -> f64 {
        x.sqrt()
    }
    #[inline]
    pub fn abs(x: f64) -> f64 {
        x.abs()
    }
    #[inline]
    pub fn floor(x: f64) -> f64 {
        x.floor()
    }
    #[inline]
    pub fn ceil(x: f64) -> f64 {
        x.ceil()
    }
}

#[cfg(not(feature = "std"))]
mod imp {
    #[inline]
    pub fn powf(x: f64, y: f64) -> f64 {
        libm::pow(x, y)
    }
    #[inline]
    pub fn ln(x: f64) -> f64 {
        libm::log(x)
    }
    #[inline]
    pub fn exp(x: f64) -> f64 {
        libm::exp(x)
    }
    #[inline]
    pub fn sqrt(x: f64) -> f64 {
        libm::sqrt(x)
    }
    #[inline]
    pub fn abs(x: f64) -> f64 {
        libm::fabs(x)
    }
    #[inline]
    pub fn floor(x: f64) -> f64 {
        libm::floor(x)
    }
    #[inline]
    pub fn ceil(x: f64) -> f64 {
        libm::ceil(x)
    }
}

pub(crate) use imp::{abs, ceil, exp, floor, ln, powf, sqrt};

use alloc::vec::Vec;

/// Exponent magnitude `alpha * |ln value|` beyond which weighted power sums
/// switch to log-space accumulation.
const LOG_SPACE_TRIGGER: f64 = 1e2;

/// `sum_k w_k * b_k^alpha` over pairs `(w_k, b_k)` of nonnegative weights
/// and bases, with the convention `0^alpha = 0`.
///
/// Terms whose exponentiated magnitude leaves the comfortably representable
/// range are accumulated in log space (log-sum-exp), so a huge `b^alpha`
/// paired with a tiny weight still contributes its finite product instead
/// of overflowing the intermediate.
pub(crate) fn weighted_power_sum(terms: &[(f64, f64)], alpha: f64) -> f64 {
    let extreme = terms
        .iter()
        .any(|&(w, b)| w > 0.0 && b > 0.0 && abs(alpha * ln(b)) > LOG_SPACE_TRIGGER);
    if !extreme {
        return terms
            .iter()
            .map(|&(w, b)| if w > 0.0 && b > 0.0 { w * powf(b, alpha) } else { 0.0 })
            .sum();
    }

    let logs: Vec<f64> = terms
        .iter()
        .filter(|&&(w, b)| w > 0.0 && b > 0.0)
        .map(|&(w, b)| ln(w) + alpha * ln(b))
        .collect();
    if logs.is_empty() {
        return 0.0;
    }
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scaled: f64 = logs.iter().map(|&t| exp(t - peak)).sum();
    exp(peak + ln(scaled))
}
