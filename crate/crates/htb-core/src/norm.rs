//! The `r`-norm family used to aggregate losses across agents.
//!
//! For `r >= 1` this is the usual `l^r` norm; for `0 < r < 1` it is the
//! positively homogeneous quasinorm `(sum |x_i|^r)^(1/r)`, which is the
//! natural aggregate when small losses should weigh relatively more.

use crate::error::{Error, Result};
use crate::fmath;

/// `x -> (sum_i |x_i|^r)^(1/r)` for a fixed exponent `r > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RNorm {
    r: f64,
}

impl RNorm {
    /// A norm with exponent `r`, which must be finite and strictly positive.
    pub fn new(r: f64) -> Result<Self> {
        if !r.is_finite() || r <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "r",
                value: r,
                constraint: "must be finite and > 0",
            });
        }
        Ok(RNorm { r })
    }

    /// The exponent.
    pub fn r(&self) -> f64 {
        self.r
    }

    /// True for `r >= 1`, where the triangle inequality holds.
    pub fn is_genuine_norm(&self) -> bool {
        self.r >= 1.0
    }

    /// Evaluates the norm. `r = 1` and `r = 2` take exact shortcuts.
    #[inline]
    pub fn eval(&self, v: &[f64]) -> f64 {
        if self.r == 1.0 {
            return v.iter().map(|&x| fmath::abs(x)).sum();
        }
        if self.r == 2.0 {
            let s: f64 = v.iter().map(|&x| x * x).sum();
            return fmath::sqrt(s);
        }
        let s: f64 = v
            .iter()
            .map(|&x| {
                let a = fmath::abs(x);
                if a == 0.0 {
                    0.0
                } else {
                    fmath::powf(a, self.r)
                }
            })
            .sum();
        if s == 0.0 {
            0.0
        } else {
            fmath::powf(s, 1.0 / self.r)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonpositive_and_non_finite_exponents() {
        assert!(RNorm::new(0.0).is_err());
        assert!(RNorm::new(-1.0).is_err());
        assert!(RNorm::new(f64::INFINITY).is_err());
        assert!(RNorm::new(f64::NAN).is_err());
    }

    #[test]
    fn unit_vectors_have_norm_one_for_every_exponent() {
        for &r in &[0.3, 0.5, 1.0, 1.7, 2.0, 3.0, 10.0] {
            let norm = RNorm::new(r).unwrap();
            assert_eq!(norm.eval(&[1.0, 0.0, 0.0]), 1.0);
            assert_eq!(norm.eval(&[0.0, 1.0]), 1.0);
        }
    }

    #[test]
    fn known_values_for_small_vectors() {
        let one = RNorm::new(1.0).unwrap();
        assert_eq!(one.eval(&[1.0, 2.0, 3.0]), 6.0);
        let two = RNorm::new(2.0).unwrap();
        assert!((two.eval(&[3.0, 4.0]) - 5.0).abs() < 1e-15);
        let half = RNorm::new(0.5).unwrap();
        // (1^0.5 + 1^0.5)^2 = 4
        assert!((half.eval(&[1.0, 1.0]) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn homogeneous_of_degree_one() {
        let norm = RNorm::new(1.5).unwrap();
        let v = [0.2, 0.0, 1.7, 0.4];
        let scaled: alloc::vec::Vec<f64> = v.iter().map(|x| 3.0 * x).collect();
        let lhs = norm.eval(&scaled);
        let rhs = 3.0 * norm.eval(&v);
        assert!((lhs / rhs - 1.0).abs() < 1e-14);
    }
}
