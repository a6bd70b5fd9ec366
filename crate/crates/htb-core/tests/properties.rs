//! Randomized structural properties of the public API: standardization
//! invariants, closed-form specializations, guaranteed orderings across
//! the whole parameter box, scaling equivariance, and estimator
//! definitions checked against naive oracles.

use htb_core::{
    classify_regime, counterexample_suite, dependent_constants, empirical_cote,
    empirical_var, independent_constants, operator_norm, spectral_constants,
    var_asymptotic, verify_bounds, BatchMeta, DiscreteSpectralMeasure, Error, EvalMethod,
    IndividualRegime, MarketBound, Matrix, RNorm, SampleBatch, SharingModel, SpectralAtom,
    TailModel, ZeroDegreePolicy,
};
use proptest::prelude::*;

const TOL: f64 = 1e-10;

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Raw spectral-measure ingredients: a tail index, a norm exponent, and
/// 1-5 atoms with strictly positive directions (so every coordinate is
/// covered and canonicalization cannot hit a degenerate margin).
fn measure_parts() -> impl Strategy<Value = (f64, f64, Vec<(Vec<f64>, f64)>)> {
    (0.3f64..3.5, 0.3f64..3.5, 1usize..=4).prop_flat_map(|(alpha, r, d)| {
        (
            Just(alpha),
            Just(r),
            prop::collection::vec(
                (prop::collection::vec(0.05f64..1.0, d), 0.1f64..3.0),
                1..=5,
            ),
        )
    })
}

fn build_raw(alpha: f64, r: f64, parts: &[(Vec<f64>, f64)]) -> DiscreteSpectralMeasure {
    let norm = RNorm::new(r).unwrap();
    let atoms = parts
        .iter()
        .map(|(dir, mass)| {
            let len = norm.eval(dir);
            SpectralAtom::new(dir.iter().map(|&x| x / len).collect(), *mass)
        })
        .collect();
    DiscreteSpectralMeasure::new(alpha, norm, atoms, false).unwrap()
}

proptest! {
    /// Standardization always lands on a canonical measure: index 1,
    /// unit margins, and applying it twice changes nothing.
    #[test]
    fn canonicalization_balances_and_is_idempotent(
        (alpha, r, parts) in measure_parts()
    ) {
        let raw = build_raw(alpha, r, &parts);
        let canon = raw.canonicalize().unwrap();
        prop_assert!(canon.is_canonical());
        prop_assert!((canon.alpha() - 1.0).abs() == 0.0);
        prop_assert!(canon.balance_defect() <= TOL);
        for m in canon.margins() {
            prop_assert!((m - 1.0).abs() <= TOL);
        }
        let again = canon.canonicalize().unwrap();
        prop_assert_eq!(again.atoms().len(), canon.atoms().len());
        for (a, b) in again.atoms().iter().zip(canon.atoms()) {
            prop_assert!((a.mass - b.mass).abs() <= 1e-12 * b.mass.max(1.0));
            for (x, y) in a.direction.iter().zip(&b.direction) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }
    }

    /// Standardization divides the margins out; reinserting them as
    /// column scales recovers the raw measure's tail set function
    /// `sum_k m_k ||A s_k||^alpha` — both directly and after a linear
    /// pushforward.
    #[test]
    fn pushforward_and_canonicalization_preserve_tail_functionals(
        (alpha, r, parts) in measure_parts(),
        b_rows in 1usize..=3,
        seed_entries in prop::collection::vec(0.05f64..2.0, 12),
        a_data in prop::collection::vec(0.0f64..2.0, 9),
    ) {
        let d = parts[0].0.len();
        let norm = RNorm::new(r).unwrap();
        let raw = build_raw(alpha, r, &parts);

        // Rescale A's columns by the margins' alpha-roots so that the
        // functional of the standardized measure matches the raw one.
        let reinstate = |a: &Matrix, margins: &[f64]| -> Matrix {
            let mut data = Vec::with_capacity(a.rows() * a.cols());
            for i in 0..a.rows() {
                for (j, &m) in margins.iter().enumerate() {
                    data.push(a.row(i)[j] * m.powf(1.0 / alpha));
                }
            }
            Matrix::from_flat(a.rows(), a.cols(), data).unwrap()
        };

        // Direct identity: g(canon(raw), A diag(c^(1/alpha)))
        //   = sum_k m_k ||A s_k||^alpha   with c the raw margins.
        let q = 1 + a_data.len() % 2;
        let a = Matrix::from_flat(q, d, a_data[..q * d].to_vec()).unwrap();
        let canon = raw.canonicalize().unwrap();
        let got = canon
            .g_functional(&reinstate(&a, &raw.margins()), alpha, norm)
            .unwrap();
        let oracle: f64 = raw
            .atoms()
            .iter()
            .map(|atom| {
                atom.mass * norm.eval(&a.mul_vec(&atom.direction)).powf(alpha)
            })
            .sum();
        prop_assert!(rel_close(got, oracle, 1e-10), "direct: {got} vs {oracle}");

        // Pushforward: same identity with B folded into the rays.
        let bp = Matrix::from_flat(b_rows, d, seed_entries[..b_rows * d].to_vec()).unwrap();
        let pushed_raw = raw.pushforward(&bp).unwrap();
        let pushed = pushed_raw.canonicalize().unwrap();
        let ap = Matrix::from_flat(q, b_rows, seed_entries[..q * b_rows].to_vec()).unwrap();
        let got = pushed
            .g_functional(&reinstate(&ap, &pushed_raw.margins()), alpha, norm)
            .unwrap();
        let oracle: f64 = raw
            .atoms()
            .iter()
            .map(|atom| {
                let image = bp.mul_vec(&atom.direction);
                atom.mass * norm.eval(&ap.mul_vec(&image)).powf(alpha)
            })
            .sum();
        prop_assert!(rel_close(got, oracle, 1e-10), "pushforward: {got} vs {oracle}");
    }

    /// The spectral route through the canonicalized reference measures
    /// reproduces the independent / comonotone closed forms.
    #[test]
    fn spectral_route_matches_closed_form_constants(
        alpha in 0.3f64..3.5,
        r in 0.3f64..3.5,
        scales in prop::collection::vec(0.2f64..3.0, 1..=4),
        q in 1usize..=3,
        entries in prop::collection::vec(0.0f64..2.0, 12),
    ) {
        let d = scales.len();
        let norm = RNorm::new(r).unwrap();
        let tail = TailModel::new(alpha, scales).unwrap();
        let a = Matrix::from_flat(q, d, entries[..q * d].to_vec()).unwrap();
        let model = SharingModel::deterministic(a).unwrap();

        let ind = independent_constants(&model, &tail, norm, EvalMethod::Exact).unwrap();
        let rho = DiscreteSpectralMeasure::independent(&tail, norm).canonicalize().unwrap();
        let via = spectral_constants(&model, &tail, &rho, norm, EvalMethod::Exact).unwrap();
        prop_assert!(rel_close(ind.market.value, via.market.value, 1e-12));
        for (x, y) in ind.per_agent.iter().zip(&via.per_agent) {
            prop_assert!(rel_close(x.value, y.value, 1e-12));
        }

        let dep = dependent_constants(&model, &tail, norm, EvalMethod::Exact).unwrap();
        let rho = DiscreteSpectralMeasure::dependent(&tail, norm).canonicalize().unwrap();
        let via = spectral_constants(&model, &tail, &rho, norm, EvalMethod::Exact).unwrap();
        prop_assert!(rel_close(dep.market.value, via.market.value, 1e-12));
        for (x, y) in dep.per_agent.iter().zip(&via.per_agent) {
            prop_assert!(rel_close(x.value, y.value, 1e-12));
        }
    }

    /// Individual constants are always bracketed by the independent and
    /// comonotone ones — upward for alpha >= 1, downward for alpha < 1 —
    /// and the market constant obeys whatever the regime guarantees.
    #[test]
    fn extremal_constants_bracket_every_spectral_measure(
        (alpha, r, parts) in measure_parts(),
        a_data in prop::collection::vec(0.0f64..2.0, 12),
        q in 1usize..=3,
    ) {
        let d = parts[0].0.len();
        let norm = RNorm::new(r).unwrap();
        let rho = build_raw(alpha, r, &parts).canonicalize().unwrap();
        let tail = TailModel::standard(alpha, d).unwrap();
        let a = Matrix::from_flat(q, d, a_data[..q * d].to_vec()).unwrap();
        let model = SharingModel::deterministic(a).unwrap();

        let ind = independent_constants(&model, &tail, norm, EvalMethod::Exact).unwrap();
        let dep = dependent_constants(&model, &tail, norm, EvalMethod::Exact).unwrap();
        let cus = spectral_constants(&model, &tail, &rho, norm, EvalMethod::Exact).unwrap();

        let regime = classify_regime(alpha, r).unwrap();
        for i in 0..q {
            let (lo, hi) = match regime.individual {
                IndividualRegime::SandwichUp => (&ind, &dep),
                IndividualRegime::SandwichDown => (&dep, &ind),
            };
            let slack_tol = TOL * cus.per_agent[i].value.abs().max(1.0);
            prop_assert!(
                lo.per_agent[i].value <= cus.per_agent[i].value + slack_tol,
                "agent {i} lower: {} > {}", lo.per_agent[i].value, cus.per_agent[i].value
            );
            prop_assert!(
                cus.per_agent[i].value <= hi.per_agent[i].value + slack_tol,
                "agent {i} upper: {} > {}", cus.per_agent[i].value, hi.per_agent[i].value
            );
        }
        let slack_tol = TOL * cus.market.value.abs().max(1.0);
        match regime.market_independent {
            MarketBound::Lower => prop_assert!(ind.market.value <= cus.market.value + slack_tol),
            MarketBound::Upper => prop_assert!(cus.market.value <= ind.market.value + slack_tol),
            MarketBound::NoneGuaranteed => {}
        }
        match regime.market_dependent {
            MarketBound::Upper => prop_assert!(cus.market.value <= dep.market.value + slack_tol),
            MarketBound::Lower => prop_assert!(dep.market.value <= cus.market.value + slack_tol),
            MarketBound::NoneGuaranteed => {}
        }

        // The packaged verdict agrees.
        let report = verify_bounds(&model, &tail, &rho, norm, EvalMethod::Exact).unwrap();
        prop_assert!(report.all_guaranteed_pass);
    }

    /// Scaling all marginal scales by c scales every constant by c and
    /// every asymptotic Value-at-Risk by c^(1/alpha).
    #[test]
    fn constants_are_equivariant_under_scale_changes(
        (alpha, r, parts) in measure_parts(),
        scales in prop::collection::vec(0.2f64..3.0, 4),
        c in 0.1f64..10.0,
        a_data in prop::collection::vec(0.0f64..2.0, 12),
        q in 1usize..=3,
        gamma in 0.001f64..0.5,
    ) {
        let d = parts[0].0.len();
        let norm = RNorm::new(r).unwrap();
        let rho = build_raw(alpha, r, &parts).canonicalize().unwrap();
        let tail = TailModel::new(alpha, scales[..d].to_vec()).unwrap();
        let scaled = TailModel::new(
            alpha,
            scales[..d].iter().map(|&k| c * k).collect(),
        ).unwrap();
        let a = Matrix::from_flat(q, d, a_data[..q * d].to_vec()).unwrap();
        let model = SharingModel::deterministic(a).unwrap();

        type ConstFn = fn(&SharingModel, &TailModel, RNorm, EvalMethod)
            -> htb_core::Result<htb_core::RiskConstants>;
        let routes: [ConstFn; 2] = [independent_constants, dependent_constants];
        for f in routes {
            let base = f(&model, &tail, norm, EvalMethod::Exact).unwrap();
            let big = f(&model, &scaled, norm, EvalMethod::Exact).unwrap();
            prop_assert!(rel_close(big.market.value, c * base.market.value, 1e-11));
            for (x, y) in base.per_agent.iter().zip(&big.per_agent) {
                prop_assert!(rel_close(y.value, c * x.value, 1e-11));
            }
        }
        let base = spectral_constants(&model, &tail, &rho, norm, EvalMethod::Exact).unwrap();
        let big = spectral_constants(&model, &scaled, &rho, norm, EvalMethod::Exact).unwrap();
        prop_assert!(rel_close(big.market.value, c * base.market.value, 1e-11));

        if base.market.value > 0.0 {
            let v1 = var_asymptotic(base.market.value, alpha, gamma).unwrap();
            let v2 = var_asymptotic(c * base.market.value, alpha, gamma).unwrap();
            prop_assert!(rel_close(v2, c.powf(1.0 / alpha) * v1, 1e-11));
        }
    }

    /// At alpha = r = 1 the market constant does not depend on the
    /// dependence structure at all.
    #[test]
    fn degenerate_point_makes_all_market_constants_equal(
        (_, _, parts) in measure_parts(),
        scales in prop::collection::vec(0.2f64..3.0, 4),
        a_data in prop::collection::vec(0.0f64..2.0, 12),
        q in 1usize..=3,
    ) {
        let d = parts[0].0.len();
        let norm = RNorm::new(1.0).unwrap();
        let rho = build_raw(1.0, 1.0, &parts).canonicalize().unwrap();
        let tail = TailModel::new(1.0, scales[..d].to_vec()).unwrap();
        let a = Matrix::from_flat(q, d, a_data[..q * d].to_vec()).unwrap();
        let model = SharingModel::deterministic(a).unwrap();
        let ind = independent_constants(&model, &tail, norm, EvalMethod::Exact).unwrap();
        let dep = dependent_constants(&model, &tail, norm, EvalMethod::Exact).unwrap();
        let cus = spectral_constants(&model, &tail, &rho, norm, EvalMethod::Exact).unwrap();
        prop_assert!(rel_close(ind.market.value, dep.market.value, TOL));
        prop_assert!(rel_close(ind.market.value, cus.market.value, TOL));
    }

    /// The counterexample suite's numeric and closed-form values agree
    /// and every crossover activation matches its predicate, across the
    /// whole (alpha, r) box.
    #[test]
    fn counterexample_suite_is_consistent_everywhere(
        alpha in 0.3f64..3.5,
        r in 0.3f64..3.5,
    ) {
        let report = counterexample_suite(alpha, r).unwrap();
        prop_assert!(report.values_agree, "max rel error {}", report.max_rel_error);
        prop_assert!(report.crossovers_match);
        prop_assert_eq!(report.values.len(), 6);
        prop_assert_eq!(report.crossovers.len(), 4);
        // Inside the unguarded zones the crossovers defeat the candidate
        // bounds: all four fire for 1 < alpha < r, and the reversed
        // orderings (all four inactive) defeat them for r < alpha < 1.
        let regime = classify_regime(alpha, r).unwrap();
        let interior = (alpha - 1.0).abs() > 1e-6
            && (alpha - r).abs() > 1e-6
            && (r - 1.0).abs() > 1e-6;
        if regime.counterexample_zone && interior {
            let active = report.crossovers.iter().filter(|c| c.active).count();
            if alpha > 1.0 {
                prop_assert_eq!(active, 4, "zone 1<alpha<r at ({}, {})", alpha, r);
            } else {
                prop_assert_eq!(active, 0, "zone r<alpha<1 at ({}, {})", alpha, r);
            }
        }
    }

    /// Sharing-graph samples allocate each covered risk fully: column
    /// sums are 0 or 1 under Drop, exactly 1 under Resample.
    #[test]
    fn sharing_graph_columns_split_each_risk_fully(
        probs in prop::collection::vec(0.0f64..1.0, 1..=12),
        q in 1usize..=3,
        seed in any::<u64>(),
    ) {
        let d = 1 + probs.len() / (q * 3) % 4;
        let mut data = vec![0.0; q * d];
        for (i, slot) in data.iter_mut().enumerate() {
            *slot = probs[i % probs.len()];
        }
        // Guarantee coverage for the Resample policy: first row certain.
        for j in 0..d {
            data[j] = 1.0;
        }
        let edge = Matrix::from_flat(q, d, data).unwrap();
        let drop_model =
            SharingModel::bipartite(edge.clone(), ZeroDegreePolicy::Drop).unwrap();
        let re_model =
            SharingModel::bipartite(edge, ZeroDegreePolicy::Resample).unwrap();
        for (model, must_cover) in [(&drop_model, true), (&re_model, true)] {
            let a = model.sample(seed).unwrap();
            for j in 0..d {
                let s: f64 = a.column(j).iter().sum();
                prop_assert!(
                    (s - 1.0).abs() < 1e-12 || (!must_cover && s.abs() < 1e-12),
                    "column {j} sums to {s}"
                );
            }
        }
    }

    /// The empirical Value-at-Risk is exactly the smallest sample point
    /// whose exceedance frequency is at most gamma, and the conditional
    /// tail mean dominates it.
    #[test]
    fn empirical_var_matches_its_definition(
        values in prop_oneof![
            prop::collection::vec(0.0f64..100.0, 1..=200),
            prop::collection::vec(0u8..10, 1..=200)
                .prop_map(|v| v.into_iter().map(f64::from).collect::<Vec<_>>()),
        ],
        gamma in 0.01f64..0.9,
    ) {
        let batch = SampleBatch {
            values: values.clone(),
            meta: BatchMeta {
                label: "prop".into(),
                seed: 0,
                fingerprint: 0,
                gammas: Vec::new(),
            },
        };
        let got = empirical_var(&batch, gamma).unwrap();
        // Naive oracle: scan sorted sample points.
        let mut sorted = values.clone();
        sorted.sort_unstable_by(f64::total_cmp);
        let n = values.len() as f64;
        let naive = sorted
            .iter()
            .copied()
            .find(|&x| {
                let exceed = values.iter().filter(|&&v| v > x).count() as f64;
                exceed <= gamma * n + 1e-9
            })
            .unwrap();
        prop_assert_eq!(got, naive);

        match empirical_cote(&batch, gamma) {
            Ok(cote) => prop_assert!(cote > got),
            Err(Error::EmptyTail) => {
                prop_assert!(values.iter().all(|&v| v <= got));
            }
            Err(e) => prop_assert!(false, "unexpected error {e:?}"),
        }
    }

    /// Operator norms certify `||A x||_r <= ||A||_op ||x||_r` for genuine
    /// norms.
    #[test]
    fn operator_norm_certifies_image_lengths(
        r in 1.0f64..3.5,
        q in 1usize..=3,
        d in 1usize..=3,
        entries in prop::collection::vec(0.0f64..2.0, 9),
        x in prop::collection::vec(0.0f64..1.0, 3),
    ) {
        let norm = RNorm::new(r).unwrap();
        let a = Matrix::from_flat(q, d, entries[..q * d].to_vec()).unwrap();
        let op = operator_norm(&a, norm);
        let xv = &x[..d];
        let lhs = norm.eval(&a.mul_vec(xv));
        let rhs = op * norm.eval(xv);
        prop_assert!(
            lhs <= rhs * (1.0 + 1e-3) + 1e-9,
            "||Ax|| = {lhs} exceeds certified {rhs}"
        );
    }
}
