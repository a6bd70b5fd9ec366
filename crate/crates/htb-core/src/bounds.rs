//! Checks the guaranteed orderings between dependence structures and
//! reproduces the explicit structures that defeat every ordering outside
//! the guaranteed `(alpha, r)` regimes.
//!
//! [`verify_bounds`] computes the independent, comonotone, and custom
//! constants for one configuration and evaluates each ordering that
//! [`classify_regime`](crate::regime::classify_regime) marks guaranteed —
//! both on the expected constants and per matrix realization (the
//! orderings hold conditionally on the allocation, so every realization
//! must satisfy them on its own).
//!
//! [`counterexample_suite`] builds the two-factor common-shock measure
//! obtained by pushing the three-factor independent measure through
//! `B = [[1,1,0],[1,0,1]]` and evaluates its power functional on the
//! identity and fully-pooled allocations against closed forms, reporting
//! which strict crossovers are active at the given `(alpha, r)`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::constants::{
    dependent_constants, independent_constants, spectral_constants, RiskConstants,
};
use crate::error::Result;
use crate::fmath;
use crate::matrix::Matrix;
use crate::measure::DiscreteSpectralMeasure;
use crate::norm::RNorm;
use crate::regime::{
    classify_regime, IndividualRegime, MarketBound, RegimeClassification,
};
use crate::rng::{derive_seed, rng_from};
use crate::sharing::{EvalMethod, SharingModel};
use crate::tail::TailModel;

/// Relative tolerance for exactly-computed quantities.
const EXACT_REL_TOL: f64 = 1e-10;
/// Relative tolerance when comparing numeric functionals to closed forms.
const AGREEMENT_REL_TOL: f64 = 1e-12;
/// Monte Carlo violations are flagged only beyond this many combined
/// standard errors.
const MC_SIGMA: f64 = 4.0;
/// Matrix realizations spot-checked when the support cannot be
/// enumerated.
const REALIZATION_SPOT_CHECKS: u64 = 64;

/// Relationship asserted by one bound row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// `lhs <= rhs` is guaranteed (up to estimator noise).
    Le,
    /// `lhs == rhs` is guaranteed (up to estimator noise).
    Eq,
    /// No ordering is guaranteed; the row reports the observed values.
    Info,
}

/// One evaluated ordering between two constants.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    /// What is being compared, e.g. `"agent 0: independent <= custom"`.
    pub name: String,
    /// Asserted relationship.
    pub relation: Relation,
    /// Left-hand constant.
    pub lhs: f64,
    /// Right-hand constant.
    pub rhs: f64,
    /// Whether the relationship is guaranteed in this `(alpha, r)`
    /// regime. Non-guaranteed rows are informational and always pass.
    pub guaranteed: bool,
    /// Whether the observed values satisfy the relationship within
    /// tolerance.
    pub pass: bool,
    /// `rhs - lhs` for `<=` rows, `-|lhs - rhs|` for `==` rows
    /// (nonnegative slack means satisfied).
    pub slack: f64,
    /// Combined standard error of the two sides (0 when both are exact).
    pub std_error: f64,
}

/// Aggregate outcome of checking the guaranteed orderings on individual
/// matrix realizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealizationSummary {
    /// Number of matrix realizations checked.
    pub checked: usize,
    /// Guaranteed-ordering violations found across all realizations.
    pub violations: usize,
    /// Smallest guaranteed slack seen over all realizations (negative
    /// means a violation).
    pub worst_slack: f64,
}

/// Full outcome of [`verify_bounds`].
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    /// Regime the configuration falls in.
    pub regime: RegimeClassification,
    /// Constants under asymptotic independence.
    pub independent: RiskConstants,
    /// Constants under comonotonicity.
    pub dependent: RiskConstants,
    /// Constants under the supplied spectral measure.
    pub custom: RiskConstants,
    /// Orderings evaluated on the expected constants.
    pub checks: Vec<BoundCheck>,
    /// The same guaranteed orderings evaluated per matrix realization.
    pub realizations: RealizationSummary,
    /// `true` when every guaranteed expectation row passes and no
    /// realization violates a guaranteed ordering.
    pub all_guaranteed_pass: bool,
}

fn tolerance(lhs: f64, rhs: f64, std_error: f64) -> f64 {
    let scale = fmath::abs(lhs).max(fmath::abs(rhs)).max(1.0);
    EXACT_REL_TOL * scale + MC_SIGMA * std_error
}

fn combined_se(a: f64, b: f64) -> f64 {
    fmath::sqrt(a * a + b * b)
}

fn check(
    name: String,
    relation: Relation,
    lhs: f64,
    rhs: f64,
    guaranteed: bool,
    std_error: f64,
) -> BoundCheck {
    let tol = tolerance(lhs, rhs, std_error);
    let (pass, slack) = match relation {
        Relation::Le => (lhs <= rhs + tol, rhs - lhs),
        Relation::Eq => (fmath::abs(lhs - rhs) <= tol, -fmath::abs(lhs - rhs)),
        Relation::Info => (true, rhs - lhs),
    };
    let pass = pass || !guaranteed;
    BoundCheck { name, relation, lhs, rhs, guaranteed, pass, slack, std_error }
}

/// Build the ordering rows for one triple of constant sets.
fn build_checks(
    regime: &RegimeClassification,
    ind: &RiskConstants,
    dep: &RiskConstants,
    custom: &RiskConstants,
) -> Vec<BoundCheck> {
    let mut rows = Vec::new();
    for i in 0..custom.per_agent.len() {
        let (lo, lo_name, hi, hi_name) = match regime.individual {
            IndividualRegime::SandwichUp => (ind, "independent", dep, "dependent"),
            IndividualRegime::SandwichDown => (dep, "dependent", ind, "independent"),
        };
        let (l, c, h) = (&lo.per_agent[i], &custom.per_agent[i], &hi.per_agent[i]);
        rows.push(check(
            format!("agent {i}: {lo_name} <= custom"),
            Relation::Le,
            l.value,
            c.value,
            true,
            combined_se(l.std_error, c.std_error),
        ));
        rows.push(check(
            format!("agent {i}: custom <= {hi_name}"),
            Relation::Le,
            c.value,
            h.value,
            true,
            combined_se(c.std_error, h.std_error),
        ));
    }
    let im = &ind.market;
    let dm = &dep.market;
    let cm = &custom.market;
    if regime.degenerate_equality {
        rows.push(check(
            String::from("market: independent == custom"),
            Relation::Eq,
            im.value,
            cm.value,
            true,
            combined_se(im.std_error, cm.std_error),
        ));
        rows.push(check(
            String::from("market: dependent == custom"),
            Relation::Eq,
            dm.value,
            cm.value,
            true,
            combined_se(dm.std_error, cm.std_error),
        ));
        return rows;
    }
    rows.push(match regime.market_independent {
        MarketBound::Lower => check(
            String::from("market: independent <= custom"),
            Relation::Le,
            im.value,
            cm.value,
            true,
            combined_se(im.std_error, cm.std_error),
        ),
        MarketBound::Upper => check(
            String::from("market: custom <= independent"),
            Relation::Le,
            cm.value,
            im.value,
            true,
            combined_se(cm.std_error, im.std_error),
        ),
        MarketBound::NoneGuaranteed => check(
            String::from("market: independent vs custom (no ordering guaranteed)"),
            Relation::Info,
            im.value,
            cm.value,
            false,
            combined_se(im.std_error, cm.std_error),
        ),
    });
    rows.push(match regime.market_dependent {
        MarketBound::Upper => check(
            String::from("market: custom <= dependent"),
            Relation::Le,
            cm.value,
            dm.value,
            true,
            combined_se(cm.std_error, dm.std_error),
        ),
        MarketBound::Lower => check(
            String::from("market: dependent <= custom"),
            Relation::Le,
            dm.value,
            cm.value,
            true,
            combined_se(dm.std_error, cm.std_error),
        ),
        MarketBound::NoneGuaranteed => check(
            String::from("market: dependent vs custom (no ordering guaranteed)"),
            Relation::Info,
            dm.value,
            cm.value,
            false,
            combined_se(dm.std_error, cm.std_error),
        ),
    });
    rows
}

/// Evaluate every ordering guaranteed at this configuration's
/// `(alpha, r)`, on the expected constants and per matrix realization.
///
/// With a Monte Carlo method the three constant sets share one stream of
/// matrix draws, so the in-sample orderings inherit the per-realization
/// guarantees; a violation is declared only beyond four combined standard
/// errors.
pub fn verify_bounds(
    model: &SharingModel,
    tail: &TailModel,
    rho: &DiscreteSpectralMeasure,
    norm: RNorm,
    method: EvalMethod,
) -> Result<BoundReport> {
    let regime = classify_regime(tail.alpha(), norm.r())?;
    let independent = independent_constants(model, tail, norm, method)?;
    let dependent = dependent_constants(model, tail, norm, method)?;
    let custom = spectral_constants(model, tail, rho, norm, method)?;
    let checks = build_checks(&regime, &independent, &dependent, &custom);

    let realizations = realization_summary(model, tail, rho, norm, method, &regime)?;
    let expectation_pass = checks.iter().all(|c| !c.guaranteed || c.pass);
    let all_guaranteed_pass = expectation_pass && realizations.violations == 0;
    Ok(BoundReport {
        regime,
        independent,
        dependent,
        custom,
        checks,
        realizations,
        all_guaranteed_pass,
    })
}

fn realization_summary(
    model: &SharingModel,
    tail: &TailModel,
    rho: &DiscreteSpectralMeasure,
    norm: RNorm,
    method: EvalMethod,
    regime: &RegimeClassification,
) -> Result<RealizationSummary> {
    let matrices: Vec<Matrix> = match method {
        EvalMethod::Exact => {
            model.support()?.into_iter().map(|(a, _)| a).collect()
        }
        EvalMethod::MonteCarlo { n, seed } => {
            let count = (n as u64).min(REALIZATION_SPOT_CHECKS);
            let mut rng = rng_from(derive_seed(seed, 0x5245_414c_495a)); // "REALIZ"
            let mut out = Vec::with_capacity(count as usize);
            for _ in 0..count {
                out.push(model.sample_with(&mut rng)?);
            }
            out
        }
    };
    let mut summary = RealizationSummary {
        checked: 0,
        violations: 0,
        worst_slack: f64::INFINITY,
    };
    for a in matrices {
        let fixed = SharingModel::deterministic(a)?;
        let ind = independent_constants(&fixed, tail, norm, EvalMethod::Exact)?;
        let dep = dependent_constants(&fixed, tail, norm, EvalMethod::Exact)?;
        let cus = spectral_constants(&fixed, tail, rho, norm, EvalMethod::Exact)?;
        summary.checked += 1;
        for row in build_checks(regime, &ind, &dep, &cus) {
            if !row.guaranteed {
                continue;
            }
            if !row.pass {
                summary.violations += 1;
            }
            if row.slack < summary.worst_slack {
                summary.worst_slack = row.slack;
            }
        }
    }
    Ok(summary)
}

/// One power-functional value compared against its closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalValue {
    /// Which measure/allocation pair, e.g. `"common-shock g(A2)"`.
    pub name: &'static str,
    /// Value computed through the measure's power functional.
    pub numeric: f64,
    /// Closed-form value.
    pub closed_form: f64,
    /// `|numeric - closed_form| / closed_form`.
    pub rel_error: f64,
}

/// One strict crossover between two functionals, with the `(alpha, r)`
/// predicate that decides when it is active.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossoverCheck {
    /// Which strict inequality, e.g. `"common-shock g(A1) < independent
    /// g(A1)"`.
    pub name: &'static str,
    /// Left side (closed form).
    pub lhs: f64,
    /// Right side (closed form).
    pub rhs: f64,
    /// Whether `lhs < rhs` holds beyond tolerance.
    pub active: bool,
    /// Whether the regime predicate says it should be active.
    pub predicted: bool,
    /// Values agree within tolerance — the crossover boundary.
    pub boundary: bool,
    /// `active == predicted`, or on the boundary.
    pub matches: bool,
}

/// Outcome of [`counterexample_suite`].
#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleReport {
    /// Tail index the suite was evaluated at.
    pub alpha: f64,
    /// Aggregation norm exponent.
    pub r: f64,
    /// The canonical common-shock measure: `1/2` on each axis plus
    /// `||(1,1)||_r / 2` on the diagonal direction.
    pub common_shock: DiscreteSpectralMeasure,
    /// The six functional values (three measures x two allocations).
    pub values: Vec<FunctionalValue>,
    /// The four strict crossovers with their activation predicates.
    pub crossovers: Vec<CrossoverCheck>,
    /// Largest relative disagreement between numeric and closed form.
    pub max_rel_error: f64,
    /// `max_rel_error <= 1e-12`.
    pub values_agree: bool,
    /// Every crossover's activation matches its predicate.
    pub crossovers_match: bool,
}

fn crossover(
    name: &'static str,
    lhs: f64,
    rhs: f64,
    predicted: bool,
) -> CrossoverCheck {
    let tol = AGREEMENT_REL_TOL * fmath::abs(lhs).max(fmath::abs(rhs)).max(1.0);
    let boundary = fmath::abs(lhs - rhs) <= tol;
    let active = !boundary && lhs < rhs;
    CrossoverCheck {
        name,
        lhs,
        rhs,
        active,
        predicted,
        boundary,
        matches: boundary || active == predicted,
    }
}

/// Construct the two-agent common-shock configuration and evaluate the
/// six power-functional values against closed forms.
///
/// The common-shock measure is the canonical form of the pushforward of
/// the three-factor independent measure (unit scales) through
/// `B = [[1,1,0],[1,0,1]]`: factor 1 hits both agents, factors 2 and 3
/// one agent each. Its atoms are `1/2` on each axis plus
/// `||(1,1)||_r / 2` on the diagonal. The allocations are `A1 = I` (each
/// agent keeps its own loss) and `A2` all-ones (full pooling). The four
/// crossover rows show that in `1 < alpha < r` and `r < alpha < 1` this
/// measure beats the independent and comonotone constants on one
/// allocation each, in both directions — so no market ordering can be
/// guaranteed there.
pub fn counterexample_suite(alpha: f64, r: f64) -> Result<CounterexampleReport> {
    let norm = RNorm::new(r)?;
    let tail3 = TailModel::standard(alpha, 3)?;
    let push = Matrix::from_rows(vec![
        vec![1.0, 1.0, 0.0],
        vec![1.0, 0.0, 1.0],
    ])?;
    let common_shock = DiscreteSpectralMeasure::independent(&tail3, norm)
        .pushforward(&push)?
        .canonicalize()?;

    let tail2 = TailModel::standard(alpha, 2)?;
    let rho_ind = DiscreteSpectralMeasure::independent(&tail2, norm).canonicalize()?;
    let rho_dep = DiscreteSpectralMeasure::dependent(&tail2, norm).canonicalize()?;
    let a1 = Matrix::identity(2);
    let a2 = Matrix::ones(2, 2);

    // Closed forms, with s = alpha / r:
    //   independent g(A1) = 2                 common-shock g(A1) = 1 + 2^(s-1)
    //   dependent   g(A1) = 2^s               independent  g(A2) = 2^(s+1)
    //   common-shock g(A2) = 2^s + 2^(alpha+s)/2
    //   dependent   g(A2) = 2^(alpha+s)
    let s = alpha / r;
    let two_s = fmath::powf(2.0, s);
    let closed = [
        2.0,
        1.0 + 0.5 * two_s,
        two_s,
        2.0 * two_s,
        two_s + 0.5 * fmath::powf(2.0, alpha + s),
        fmath::powf(2.0, alpha + s),
    ];
    let names = [
        "independent g(A1)",
        "common-shock g(A1)",
        "dependent g(A1)",
        "independent g(A2)",
        "common-shock g(A2)",
        "dependent g(A2)",
    ];
    let numeric = [
        rho_ind.g_functional(&a1, alpha, norm)?,
        common_shock.g_functional(&a1, alpha, norm)?,
        rho_dep.g_functional(&a1, alpha, norm)?,
        rho_ind.g_functional(&a2, alpha, norm)?,
        common_shock.g_functional(&a2, alpha, norm)?,
        rho_dep.g_functional(&a2, alpha, norm)?,
    ];
    let mut values = Vec::with_capacity(6);
    let mut max_rel_error: f64 = 0.0;
    for k in 0..6 {
        let rel_error = fmath::abs(numeric[k] - closed[k]) / closed[k];
        if rel_error > max_rel_error {
            max_rel_error = rel_error;
        }
        values.push(FunctionalValue {
            name: names[k],
            numeric: numeric[k],
            closed_form: closed[k],
            rel_error,
        });
    }

    let crossovers = vec![
        crossover(
            "common-shock g(A1) < independent g(A1)",
            closed[1],
            closed[0],
            r > alpha,
        ),
        crossover(
            "independent g(A2) < common-shock g(A2)",
            closed[3],
            closed[4],
            alpha > 1.0,
        ),
        crossover(
            "dependent g(A1) < common-shock g(A1)",
            closed[2],
            closed[1],
            alpha < r,
        ),
        crossover(
            "common-shock g(A2) < dependent g(A2)",
            closed[4],
            closed[5],
            alpha > 1.0,
        ),
    ];
    let values_agree = max_rel_error <= AGREEMENT_REL_TOL;
    let crossovers_match = crossovers.iter().all(|c| c.matches);
    Ok(CounterexampleReport {
        alpha,
        r,
        common_shock,
        values,
        crossovers,
        max_rel_error,
        values_agree,
        crossovers_match,
    })
}
