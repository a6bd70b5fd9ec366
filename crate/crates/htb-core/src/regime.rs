//! Which extremal dependence structure bounds which, by `(alpha, r)`
//! regime.
//!
//! For an individual agent the independent and comonotone constants
//! always sandwich every other dependence structure; the only question is
//! the order, which flips at `alpha = 1`. For the market aggregate under
//! an `r`-norm the guarantees depend on the `(alpha, r)` position:
//! outside the guaranteed regimes there are explicit dependence
//! structures on either side of both extremal constants (see
//! [`crate::bounds::counterexample_suite`]), so no ordering can be
//! promised.

/// How the two extremal constants sandwich an individual agent's
/// constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndividualRegime {
    /// `alpha >= 1`: independent below, comonotone above
    /// (`C_ind <= C <= C_dep`).
    SandwichUp,
    /// `alpha < 1`: comonotone below, independent above
    /// (`C_dep <= C <= C_ind`).
    SandwichDown,
}

/// What the extremal constants guarantee for the market aggregate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarketBound {
    /// The named structure's constant is a guaranteed lower bound.
    Lower,
    /// The named structure's constant is a guaranteed upper bound.
    Upper,
    /// Neither direction is guaranteed in this `(alpha, r)` regime.
    NoneGuaranteed,
}

/// Full classification of one `(alpha, r)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeClassification {
    /// Tail index the classification applies to.
    pub alpha: f64,
    /// Aggregation norm exponent.
    pub r: f64,
    /// Sandwich direction for individual agents (always guaranteed).
    pub individual: IndividualRegime,
    /// Role of the independent-structure market constant.
    pub market_independent: MarketBound,
    /// Role of the comonotone-structure market constant.
    pub market_dependent: MarketBound,
    /// `true` when `(alpha, r)` lies where explicit dependence structures
    /// beat both extremal constants in both directions:
    /// `1 < alpha < r` or `r < alpha < 1`.
    pub counterexample_zone: bool,
    /// `true` exactly at `alpha = r = 1`, where independent and
    /// comonotone market constants coincide for every allocation.
    pub degenerate_equality: bool,
}

/// Classify an `(alpha, r)` pair.
///
/// Market rules, with the `alpha >= r`-side branch taking precedence on
/// boundaries:
///
/// * `r >= 1`: `alpha >= r` gives independent-Lower / dependent-Upper;
///   `alpha <= 1` gives independent-Upper / dependent-Lower;
///   `1 < alpha < r` guarantees nothing.
/// * `r < 1`: `alpha >= 1` gives independent-Lower / dependent-Upper;
///   `alpha <= r` gives independent-Upper / dependent-Lower;
///   `r < alpha < 1` guarantees nothing.
pub fn classify_regime(alpha: f64, r: f64) -> crate::Result<RegimeClassification> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(crate::Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            constraint: "must be finite and > 0",
        });
    }
    if !r.is_finite() || r <= 0.0 {
        return Err(crate::Error::InvalidParameter {
            name: "r",
            value: r,
            constraint: "must be finite and > 0",
        });
    }
    let individual = if alpha >= 1.0 {
        IndividualRegime::SandwichUp
    } else {
        IndividualRegime::SandwichDown
    };
    let (market_independent, market_dependent) = if r >= 1.0 {
        if alpha >= r {
            (MarketBound::Lower, MarketBound::Upper)
        } else if alpha <= 1.0 {
            (MarketBound::Upper, MarketBound::Lower)
        } else {
            (MarketBound::NoneGuaranteed, MarketBound::NoneGuaranteed)
        }
    } else if alpha >= 1.0 {
        (MarketBound::Lower, MarketBound::Upper)
    } else if alpha <= r {
        (MarketBound::Upper, MarketBound::Lower)
    } else {
        (MarketBound::NoneGuaranteed, MarketBound::NoneGuaranteed)
    };
    let counterexample_zone =
        (1.0 < alpha && alpha < r) || (r < alpha && alpha < 1.0);
    Ok(RegimeClassification {
        alpha,
        r,
        individual,
        market_independent,
        market_dependent,
        counterexample_zone,
        degenerate_equality: alpha == 1.0 && r == 1.0,
    })
}
