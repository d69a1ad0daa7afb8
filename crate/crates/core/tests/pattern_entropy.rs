use ergopart::dynamics::{GroupElement, SystemAction};
use ergopart::partition::{conditional_entropy, join_entropy};
use ergopart::pattern_entropy::{
    fekete_rate, max_pattern_entropy_estimate, max_pattern_profile, orbit_join_entropy, sequence_entropy_estimate,
    union_subadditivity_check, BoundKind, PatternVerdict, Strategy as Search, INEQUALITY_TOL,
};
use ergopart::{MeasurableSet, MeasureSpace, Partition, Rational};
use proptest::prelude::*;

const LN2: f64 = std::f64::consts::LN_2;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn halves() -> Partition {
    Partition::from_cuts(&[q(1, 2)]).unwrap()
}

fn window(n: i64) -> Vec<GroupElement> {
    (0..n).map(|i| vec![i]).collect()
}

#[test]
fn sequence_entropy_examples() {
    let alpha = Partition::from_cuts(&[q(1, 3)]).unwrap();
    let constant = vec![alpha.clone(); 10];
    let pts = sequence_entropy_estimate(&constant, 10).unwrap();
    for p in &pts {
        assert!((p.rate - alpha.entropy() / p.n as f64).abs() < 1e-12);
    }

    let dbl = SystemAction::doubling().orbit_partitions(&halves(), &window(20)).unwrap();
    for p in sequence_entropy_estimate(&dbl, 20).unwrap() {
        assert!((p.rate - LN2).abs() < 1e-9, "{p:?}");
    }

    let rot = SystemAction::golden_rotation().orbit_partitions(&halves(), &window(40)).unwrap();
    let pts = sequence_entropy_estimate(&rot, 40).unwrap();
    for p in &pts {
        assert!(p.rate <= (2.0 * p.n as f64).ln() / p.n as f64 + 1e-12);
    }
    assert!(pts[39].rate < pts[3].rate);
    assert!(sequence_entropy_estimate(&rot, 41).is_err());
}

#[test]
fn max_pattern_profile_examples() {
    let alpha = Partition::from_cuts(&[q(1, 4), q(1, 2)]).unwrap();
    for n in [1, 3, 7] {
        let e = max_pattern_profile(std::slice::from_ref(&alpha), n, Search::Exhaustive).unwrap();
        assert!((e.p_star - alpha.entropy()).abs() < 1e-12);
        assert_eq!(e.bound_kind, BoundKind::Exact);
    }
    let x = MeasureSpace::interval();
    assert_eq!(max_pattern_profile(&[Partition::trivial(&x)], 4, Search::Exhaustive).unwrap().p_star, 0.0);

    let k = SystemAction::doubling().orbit_partitions(&halves(), &window(2)).unwrap();
    let exact = max_pattern_profile(&k, 4, Search::Exhaustive).unwrap();
    let greedy = max_pattern_profile(&k, 4, Search::Greedy).unwrap();
    assert_eq!(greedy.bound_kind, BoundKind::LowerBound);
    assert!(greedy.p_star <= exact.p_star + INEQUALITY_TOL);
    assert!((exact.p_star - 2.0 * LN2).abs() < 1e-12);
}

#[test]
fn exhaustive_budget_is_enforced() {
    let k = SystemAction::golden_rotation().orbit_partitions(&halves(), &window(40)).unwrap();
    assert!(matches!(max_pattern_profile(&k, 10, Search::Exhaustive), Err(ergopart::Error::Capacity(_))));
}

#[test]
fn pattern_entropy_estimates() {
    let alpha = halves();
    let dbl = SystemAction::doubling();
    let est = max_pattern_entropy_estimate(&alpha, &dbl, &window(8), &[2, 4, 6, 8], Search::Exhaustive).unwrap();
    for (n, p) in est.n_values.iter().zip(&est.p_star) {
        assert!(*p >= *n as f64 * LN2 - 1e-9);
    }
    assert_eq!(est.verdict, PatternVerdict::PositiveTrend);

    let est = max_pattern_entropy_estimate(&alpha, &dbl, &[vec![0]], &[1, 2, 4, 8], Search::Exhaustive).unwrap();
    assert!(est.p_star.iter().all(|p| (p - LN2).abs() < 1e-12));
    assert_eq!(est.verdict, PatternVerdict::ZeroTrend);

    let rot = SystemAction::golden_rotation();
    let ns = [1, 2, 4, 6, 12, 24, 48];
    let est = max_pattern_entropy_estimate(&alpha, &rot, &window(12), &ns, Search::Exhaustive).unwrap();
    assert_eq!(est.verdict, PatternVerdict::ZeroTrend, "{:?}", est.rates());
    assert!(est.p_star.windows(2).all(|w| w[0] <= w[1] + INEQUALITY_TOL));
    assert!(est.rates().iter().all(|&r| (0.0..=LN2 + 1e-12).contains(&r)));
    let cert = fekete_rate(&est.n_values, &est.p_star, est.bound_kind).unwrap();
    assert!(cert.rate < est.threshold);
}

#[test]
fn fekete_examples() {
    let c = fekete_rate(&[1, 2, 3], &[LN2, 2.0 * LN2, 3.0 * LN2], BoundKind::Exact).unwrap();
    assert!((c.rate - LN2).abs() < 1e-12);
    let c = fekete_rate(&[1, 2, 3], &[1.0, 1.0, 1.0], BoundKind::Exact).unwrap();
    assert!((c.rate - 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(c.attained_at, 3);
    assert!(matches!(fekete_rate(&[1, 2], &[1.0, 1.0], BoundKind::LowerBound), Err(ergopart::Error::Precondition(_))));
}

#[test]
fn union_subadditivity_examples() {
    let dbl = SystemAction::doubling();
    let wins = vec![window(1), window(3), window(5)];
    let a = MeasurableSet::interval(q(1, 8), q(5, 8)).unwrap();
    let empty = MeasurableSet::intervals(Vec::<(Rational, Rational)>::new()).unwrap();
    for row in union_subadditivity_check(&a, &empty, &dbl, &wins).unwrap() {
        assert!(row.holds);
        assert!((row.union_term - row.a_term).abs() < 1e-12);
        assert_eq!(row.b_term, 0.0);
    }
    for row in union_subadditivity_check(&a, &a, &dbl, &wins).unwrap() {
        assert!(row.holds);
        assert!(row.union_term <= 2.0 * row.a_term + INEQUALITY_TOL);
    }
}

fn dyadic_set(bits: u16) -> MeasurableSet {
    MeasurableSet::intervals((0..16).filter(|i| bits & (1 << i) != 0).map(|i| (q(i, 16), q(i + 1, 16)))).unwrap()
}

fn arb_family() -> impl Strategy<Value = Vec<Partition>> {
    let part = prop::collection::btree_set(1i64..16, 1..3)
        .prop_map(|c| Partition::from_cuts(&c.into_iter().map(|c| q(c, 16)).collect::<Vec<_>>()).unwrap());
    prop::collection::vec(part, 1..=4)
}

fn arb_window() -> impl Strategy<Value = Vec<GroupElement>> {
    prop::collection::btree_set(0i64..10, 1..=8).prop_map(|s| s.into_iter().map(|g| vec![g]).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exact_p_star_is_subadditive(k in 1i64..9, m in 1usize..4, n in 1usize..4) {
        let family = SystemAction::golden_rotation().orbit_partitions(&halves(), &window(k)).unwrap();
        let p = |n| max_pattern_profile(&family, n, Search::Exhaustive).unwrap().p_star;
        prop_assert!(p(m + n) <= p(m) + p(n) + INEQUALITY_TOL);
        prop_assert!(p(m) <= p(m + n) + INEQUALITY_TOL);
    }

    #[test]
    fn lipschitz_in_the_partition(
        a in prop::collection::btree_set(1i64..24, 1..4),
        b in prop::collection::btree_set(1i64..24, 1..4),
        which in 0usize..2,
        s in arb_window(),
    ) {
        let to_part = |c: &std::collections::BTreeSet<i64>| {
            Partition::from_cuts(&c.iter().map(|&c| q(c, 24)).collect::<Vec<_>>()).unwrap()
        };
        let (alpha, beta) = (to_part(&a), to_part(&b));
        let sys = [SystemAction::doubling(), SystemAction::golden_rotation()][which].clone();
        let lhs = orbit_join_entropy(&alpha, &sys, &s).unwrap();
        let rhs = orbit_join_entropy(&beta, &sys, &s).unwrap() + s.len() as f64 * conditional_entropy(&alpha, &beta).unwrap();
        prop_assert!(lhs <= rhs + INEQUALITY_TOL, "{} > {}", lhs, rhs);
    }

    #[test]
    fn greedy_and_beam_below_exhaustive(family in arb_family(), n in 1usize..5, width in 1usize..4) {
        let exact = max_pattern_profile(&family, n, Search::Exhaustive).unwrap().p_star;
        prop_assert!(max_pattern_profile(&family, n, Search::Greedy).unwrap().p_star <= exact + INEQUALITY_TOL);
        let beam = max_pattern_profile(&family, n, Search::Beam { width }).unwrap().p_star;
        prop_assert!(beam <= exact + INEQUALITY_TOL);
    }

    #[test]
    fn exhaustive_matches_sequence_enumeration(family in arb_family(), n in 1usize..4) {
        let r = family.len();
        let space = family[0].space().clone();
        let mut best = 0.0f64;
        for code in 0..r.pow(n as u32) {
            let seq: Vec<&Partition> = (0..n).map(|i| &family[code / r.pow(i as u32) % r]).collect();
            best = best.max(join_entropy(&space, seq).unwrap());
        }
        let p = max_pattern_profile(&family, n, Search::Exhaustive).unwrap().p_star;
        prop_assert!((p - best).abs() <= 1e-12, "{} vs {}", p, best);
    }

    #[test]
    fn union_subadditivity_under_doubling(a in any::<u16>(), b in any::<u16>(), k in 1i64..=6) {
        let rows = union_subadditivity_check(&dyadic_set(a), &dyadic_set(b), &SystemAction::doubling(), &[window(k)]).unwrap();
        prop_assert!(rows.iter().all(|r| r.holds));
    }
}
