//! Marginal tail model: common tail index, per-factor scales.
//!
//! Loss factor `j` satisfies `P(V_j > t) ~ K_j t^(-alpha)`, with the same
//! index `alpha` for every factor. Scale differences between factors live
//! entirely in `K`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fmath;

/// Pareto-type marginal tails `P(V_j > t) ~ K_j t^(-alpha)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailModel {
    alpha: f64,
    scales: Vec<f64>,
}

impl TailModel {
    /// A tail model with index `alpha > 0` and positive scales `K`.
    pub fn new(alpha: f64, scales: Vec<f64>) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                constraint: "must be finite and > 0",
            });
        }
        if scales.is_empty() {
            return Err(Error::InvalidParameter {
                name: "scales",
                value: 0.0,
                constraint: "must contain at least one factor",
            });
        }
        for &k in &scales {
            if !k.is_finite() || k <= 0.0 {
                return Err(Error::InvalidParameter {
                    name: "scales",
                    value: k,
                    constraint: "every scale must be finite and > 0",
                });
            }
        }
        Ok(TailModel { alpha, scales })
    }

    /// A model with unit scales in dimension `d`.
    pub fn standard(alpha: f64, d: usize) -> Result<Self> {
        TailModel::new(alpha, alloc::vec![1.0; d])
    }

    /// The common tail index.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Per-factor tail scales `K`.
    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    /// Number of loss factors.
    pub fn dim(&self) -> usize {
        self.scales.len()
    }

    /// `K_j^(1/alpha)` for every factor: the natural per-factor size unit.
    pub fn scale_roots(&self) -> Vec<f64> {
        let inv = 1.0 / self.alpha;
        self.scales.iter().map(|&k| fmath::powf(k, inv)).collect()
    }
}
