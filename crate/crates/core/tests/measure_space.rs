use ergopart::measure_space::neumaier_sum;
use ergopart::region::RegionSet;
use ergopart::{MeasurableSet, MeasureSpace, Point, Rational};
use proptest::prelude::*;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn interval_set(parts: &[(i64, i64)], den: i64) -> MeasurableSet {
    MeasurableSet::intervals(parts.iter().map(|&(a, b)| (q(a, den), q(b, den)))).unwrap()
}

#[test]
fn uniform_points() {
    let one = MeasureSpace::uniform_points(1).unwrap();
    assert_eq!(one.weights().unwrap(), &[1.0]);
    let four = MeasureSpace::uniform_points(4).unwrap();
    assert_eq!(four.weights().unwrap(), &[0.25; 4]);
    let big = MeasureSpace::uniform_points(100_000).unwrap();
    assert!((neumaier_sum(big.weights().unwrap().iter().copied()) - 1.0).abs() <= 1e-12);
    assert!((big.measure(&big.full_set()).unwrap() - 1.0).abs() <= 1e-12);
    assert!(MeasureSpace::uniform_points(0).is_err());
}

#[test]
fn interval_measures() {
    let x = MeasureSpace::interval();
    assert_eq!(x.measure(&x.full_set()).unwrap(), 1.0);
    assert_eq!(x.measure(&x.empty_set()).unwrap(), 0.0);
    let a = MeasurableSet::interval(q(1, 3), q(1, 2)).unwrap();
    assert_eq!(x.measure_exact(&a).unwrap(), Some(q(1, 6)));
    let u = interval_set(&[(0, 1), (2, 3)], 4);
    assert_eq!(x.measure_exact(&u).unwrap(), Some(q(1, 2)));
}

#[test]
fn set_operations() {
    let x = MeasureSpace::interval();
    let a = MeasurableSet::interval(q(0, 1), q(1, 2)).unwrap();
    assert!(a.symmetric_difference(&a).unwrap().is_empty());
    assert_eq!(a.symmetric_difference(&a.complement().unwrap()).unwrap(), x.full_set());
    let b = MeasurableSet::interval(q(1, 4), q(3, 4)).unwrap();
    let d = a.symmetric_difference(&b).unwrap();
    assert_eq!(d, interval_set(&[(0, 1), (2, 3)], 4));
    assert_eq!(x.measure_exact(&d).unwrap(), Some(q(1, 2)));

    let p = MeasureSpace::uniform_points(5).unwrap();
    let s = MeasurableSet::points(5, [0, 2]).unwrap();
    assert_eq!(s.symmetric_difference(&s.complement().unwrap()).unwrap(), p.full_set());
    assert!(s.union(&a).is_err());
}

#[test]
fn sampling() {
    let x = MeasureSpace::interval();
    assert_eq!(x.sample_points(50, 9).unwrap(), x.sample_points(50, 9).unwrap());
    assert_eq!(x.sample_points(1, 3).unwrap().len(), 1);
    let pts = x.sample_points(100_000, 11).unwrap();
    let half = MeasurableSet::interval(q(0, 1), q(1, 2)).unwrap();
    let frac = pts.iter().filter(|p| half.contains(p)).count() as f64 / 1e5;
    // 6σ for a fair coin over 10^5 draws is about 0.0095
    assert!((frac - 0.5).abs() < 0.01, "{frac}");
    let w = MeasureSpace::weighted_points(vec![0.5, 0.25, 0.25]).unwrap();
    assert!(w.sample_points(10, 1).unwrap().iter().all(|p| matches!(p, Point::Index(i) if *i < 3)));
}

fn arb_intervals() -> impl Strategy<Value = MeasurableSet> {
    prop::collection::vec((0i64..64, 1i64..16), 0..5).prop_map(|v| {
        let parts: Vec<(Rational, Rational)> =
            v.into_iter().map(|(a, len)| (q(a, 64), q((a + len).min(64), 64))).filter(|(a, b)| a < b).collect();
        MeasurableSet::intervals(parts).unwrap()
    })
}

fn arb_points(n: usize) -> impl Strategy<Value = MeasurableSet> {
    prop::collection::vec(any::<bool>(), n)
        .prop_map(move |bits| MeasurableSet::points(n, (0..n).filter(|&i| bits[i])).unwrap())
}

fn weighted_space() -> MeasureSpace {
    MeasureSpace::weighted_points(vec![0.1, 0.2, 0.05, 0.15, 0.3, 0.2]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn inclusion_exclusion_intervals(a in arb_intervals(), b in arb_intervals()) {
        let x = MeasureSpace::interval();
        let m = |s: &MeasurableSet| x.measure_exact(s).unwrap().unwrap();
        let lhs = m(&a.union(&b).unwrap()) + m(&a.intersection(&b).unwrap());
        prop_assert_eq!(lhs, m(&a) + m(&b));
    }

    #[test]
    fn inclusion_exclusion_points(a in arb_points(6), b in arb_points(6)) {
        let x = weighted_space();
        let m = |s: &MeasurableSet| x.measure(s).unwrap();
        let lhs = m(&a.union(&b).unwrap()) + m(&a.intersection(&b).unwrap());
        prop_assert!((lhs - m(&a) - m(&b)).abs() <= 1e-12);
    }

    #[test]
    fn canonicalization_idempotent(a in arb_intervals()) {
        let r = a.as_region().unwrap();
        let again = RegionSet::from_intervals(r.intervals().map(|(lo, hi)| (lo.clone(), hi.clone()))).unwrap();
        prop_assert_eq!(&again, r);
        let ends: Vec<(&Rational, &Rational)> = r.intervals().collect();
        for w in ends.windows(2) {
            prop_assert!(w[0].1 < w[1].0, "adjacent intervals must be merged");
        }
    }

    #[test]
    fn symmetric_difference_pseudometric(a in arb_intervals(), b in arb_intervals(), c in arb_intervals()) {
        let x = MeasureSpace::interval();
        let d = |s: &MeasurableSet, t: &MeasurableSet| x.measure_exact(&s.symmetric_difference(t).unwrap()).unwrap().unwrap();
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
        prop_assert_eq!(d(&a, &a), Rational::ZERO);
    }
}
