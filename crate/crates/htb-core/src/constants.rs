//! Tail risk constants and their asymptotic risk-measure levels.
//!
//! With `P(V_j > t) ~ K_j t^(-alpha)` and `F = A V`, each agent loss and
//! the market aggregate satisfy `P(. > t) ~ C t^(-alpha)`; this module
//! computes `C` for the two extremal dependence structures and for an
//! arbitrary canonical spectral measure:
//!
//! * independent factors — `C_i = sum_j K_j E[A_ij^alpha]`,
//!   `C_market = sum_j K_j E ||A e_j||^alpha`;
//! * comonotone factors — `C_i = E[(A K^(1/alpha) 1)_i^alpha]`,
//!   `C_market = E ||A K^(1/alpha) 1||^alpha`;
//! * spectral measure `rho` (canonical) — the power functional of
//!   [`crate::measure::DiscreteSpectralMeasure`] applied to the
//!   column-scaled allocation `A diag(K^(1/alpha))`, in expectation over
//!   the sharing model.
//!
//! A constant converts to risk-measure levels via
//! `VaR_(1-gamma) ~ (C / gamma)^(1/alpha)` and, for `alpha > 1`,
//! `CoTE = alpha/(alpha - 1) * VaR`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fmath::{self, weighted_power_sum};
use crate::measure::DiscreteSpectralMeasure;
use crate::norm::RNorm;
use crate::sharing::{EvalMethod, ExpectationEstimate, SharingModel};
use crate::tail::TailModel;

/// Which extremal (or custom) dependence structure a constant set
/// describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DependenceLabel {
    /// Asymptotically independent loss factors.
    Independent,
    /// Comonotone loss factors (a single driving shock).
    Dependent,
    /// An arbitrary canonical spectral measure.
    Custom,
}

impl DependenceLabel {
    /// Stable lowercase name for reports.
    pub fn label(&self) -> &'static str {
        match self {
            DependenceLabel::Independent => "independent",
            DependenceLabel::Dependent => "dependent",
            DependenceLabel::Custom => "custom",
        }
    }
}

/// Per-agent and market tail constants for one dependence structure.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskConstants {
    /// Dependence structure the constants belong to.
    pub dependence: DependenceLabel,
    /// Common tail index.
    pub alpha: f64,
    /// Aggregation norm exponent.
    pub r: f64,
    /// Constant of `P(F_i > t) ~ C_i t^(-alpha)` for each agent.
    pub per_agent: Vec<ExpectationEstimate>,
    /// Constant of `P(||F||_r > t) ~ C t^(-alpha)`.
    pub market: ExpectationEstimate,
}

fn check_shapes(model: &SharingModel, tail: &TailModel) -> Result<()> {
    let (_, d) = model.shape();
    if d != tail.dim() {
        return Err(Error::ShapeMismatch {
            context: "allocation columns vs. loss factors",
            expected: tail.dim(),
            found: d,
        });
    }
    Ok(())
}

fn assemble(
    dependence: DependenceLabel,
    alpha: f64,
    r: f64,
    mut estimates: Vec<ExpectationEstimate>,
) -> RiskConstants {
    let market = estimates.pop().expect("estimates include the market slot");
    RiskConstants { dependence, alpha, r, per_agent: estimates, market }
}

/// Tail constants when the loss factors are asymptotically independent.
pub fn independent_constants(
    model: &SharingModel,
    tail: &TailModel,
    norm: RNorm,
    method: EvalMethod,
) -> Result<RiskConstants> {
    check_shapes(model, tail)?;
    let (q, d) = model.shape();
    let alpha = tail.alpha();
    let scales = tail.scales().to_vec();
    let estimates = model.expect_many(q + 1, |a, out| {
        let mut terms: Vec<(f64, f64)> = Vec::with_capacity(d);
        for (i, slot) in out.iter_mut().take(q).enumerate() {
            terms.clear();
            terms.extend(scales.iter().zip(a.row(i)).map(|(&k, &x)| (k, x)));
            *slot = weighted_power_sum(&terms, alpha);
        }
        terms.clear();
        for j in 0..d {
            terms.push((scales[j], norm.eval(&a.column(j))));
        }
        out[q] = weighted_power_sum(&terms, alpha);
    }, method)?;
    Ok(assemble(DependenceLabel::Independent, alpha, norm.r(), estimates))
}

/// Tail constants when the loss factors are comonotone (one driving
/// shock).
pub fn dependent_constants(
    model: &SharingModel,
    tail: &TailModel,
    norm: RNorm,
    method: EvalMethod,
) -> Result<RiskConstants> {
    check_shapes(model, tail)?;
    let (q, _) = model.shape();
    let alpha = tail.alpha();
    let roots = tail.scale_roots();
    let estimates = model.expect_many(q + 1, |a, out| {
        let image = a.mul_vec(&roots);
        for (slot, &x) in out.iter_mut().take(q).zip(&image) {
            *slot = if x == 0.0 { 0.0 } else { fmath::powf(x, alpha) };
        }
        let len = norm.eval(&image);
        out[q] = if len == 0.0 { 0.0 } else { fmath::powf(len, alpha) };
    }, method)?;
    Ok(assemble(DependenceLabel::Dependent, alpha, norm.r(), estimates))
}

/// Tail constants for an arbitrary extremal dependence structure given by
/// a canonical spectral measure.
///
/// Specializing `rho` to the canonical independent (axis atoms) or
/// comonotone (single diagonal atom) measure reproduces
/// [`independent_constants`] / [`dependent_constants`] exactly.
pub fn spectral_constants(
    model: &SharingModel,
    tail: &TailModel,
    rho: &DiscreteSpectralMeasure,
    norm: RNorm,
    method: EvalMethod,
) -> Result<RiskConstants> {
    check_shapes(model, tail)?;
    if !rho.is_canonical() {
        return Err(Error::NotCanonical);
    }
    if rho.dim() != tail.dim() {
        return Err(Error::ShapeMismatch {
            context: "spectral measure dimension vs. loss factors",
            expected: tail.dim(),
            found: rho.dim(),
        });
    }
    let (q, _) = model.shape();
    let alpha = tail.alpha();
    let roots = tail.scale_roots();
    let estimates = model.expect_many(q + 1, |a, out| {
        // Column scaling by K^(1/alpha) folds the marginal scales into the
        // allocation; expected to succeed since shapes were checked.
        let scaled = a.scale_columns(&roots).expect("column count checked");
        let per_agent = rho.g_per_agent_raw(&scaled, alpha);
        out[..q].copy_from_slice(&per_agent);
        out[q] = rho.g_functional_raw(&scaled, alpha, norm);
    }, method)?;
    Ok(assemble(DependenceLabel::Custom, alpha, norm.r(), estimates))
}

/// Asymptotic Value-at-Risk at confidence `1 - gamma`:
/// `(C / gamma)^(1/alpha)`.
pub fn var_asymptotic(c: f64, alpha: f64, gamma: f64) -> Result<f64> {
    if !c.is_finite() || c < 0.0 {
        return Err(Error::InvalidParameter {
            name: "c",
            value: c,
            constraint: "tail constant must be finite and >= 0",
        });
    }
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            constraint: "must be finite and > 0",
        });
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidGamma { gamma });
    }
    if c == 0.0 {
        return Ok(0.0);
    }
    Ok(fmath::powf(c / gamma, 1.0 / alpha))
}

/// Asymptotic conditional tail expectation at confidence `1 - gamma`:
/// `alpha / (alpha - 1) * VaR`. Requires `alpha > 1`; below that the tail
/// mean diverges.
pub fn cote_asymptotic(c: f64, alpha: f64, gamma: f64) -> Result<f64> {
    if alpha <= 1.0 {
        return Err(Error::InfiniteMean { alpha });
    }
    Ok(alpha / (alpha - 1.0) * var_asymptotic(c, alpha, gamma)?)
}
