use ergopart::dynamics::{compose, Irrational, SystemAction, MIN_ANGLE_DENOMINATOR};
use ergopart::join::Refiner;
use ergopart::partition::matching_distance;
use ergopart::{MeasurableSet, MeasureSpace, Partition, Rational};
use proptest::prelude::*;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn intervals(parts: &[(i64, i64)], den: i64) -> MeasurableSet {
    MeasurableSet::intervals(parts.iter().map(|&(a, b)| (q(a, den), q(b, den)))).unwrap()
}

#[test]
fn pullback_examples() {
    let dbl = SystemAction::doubling();
    let a = MeasurableSet::interval(q(0, 1), q(1, 2)).unwrap();
    assert_eq!(dbl.pullback_set(&[0], &a).unwrap(), a);
    assert_eq!(dbl.pullback_set(&[1], &a).unwrap(), intervals(&[(0, 1), (2, 3)], 4));

    let rot = SystemAction::rotation(q(1, 3));
    let third = MeasurableSet::interval(q(0, 1), q(1, 3)).unwrap();
    let pulled = rot.pullback_set(&[1], &third).unwrap();
    // x + 1/3 ∈ [0,1/3) ⇔ x ∈ [2/3, 1)
    assert_eq!(pulled, MeasurableSet::interval(q(2, 3), q(1, 1)).unwrap());
    let x = MeasureSpace::interval();
    assert_eq!(x.measure_exact(&pulled).unwrap(), x.measure_exact(&third).unwrap());
    assert_eq!(rot.pullback_set(&[-1], &third).unwrap(), MeasurableSet::interval(q(1, 3), q(2, 3)).unwrap());
}

#[test]
fn partition_pullbacks() {
    let alpha = Partition::from_cuts(&[q(1, 2)]).unwrap();
    let dbl = SystemAction::doubling();
    assert_eq!(dbl.pullback_partition(&[0], &alpha).unwrap().atoms(), alpha.atoms());
    let family = dbl.orbit_partitions(&alpha, &[vec![0]]).unwrap();
    assert_eq!(family.len(), 1);
    assert_eq!(family[0].atoms(), alpha.atoms());

    let three = dbl.orbit_partitions(&alpha, &[vec![0], vec![1], vec![2]]).unwrap();
    for i in 0..3 {
        for j in i + 1..3 {
            assert!(matching_distance(&three[i], &three[j]).unwrap().rho_tilde > 0.0);
        }
    }
    let boxed: Vec<Vec<i64>> = (0..7).map(|i| vec![i]).collect();
    assert_eq!(dbl.orbit_partitions(&alpha, &boxed).unwrap().len(), 7);

    for n in 1..=10 {
        let elements: Vec<Vec<i64>> = (0..n).map(|i| vec![i]).collect();
        let family = dbl.orbit_partitions(&alpha, &elements).unwrap();
        let r = Refiner::from_partitions(alpha.space(), &family, false).unwrap();
        let w = r.weights_exact().unwrap();
        assert_eq!(w.len(), 1 << n);
        assert!(w.iter().all(|m| *m == q(1, 1 << n)));
    }
}

#[test]
fn measure_preservation_reports() {
    let sqrt2 = SystemAction::rotation(Irrational::Sqrt2Minus1.convergent(MIN_ANGLE_DENOMINATOR));
    let rep = sqrt2.check_measure_preserving(200, 3).unwrap();
    assert_eq!(rep.max_deviation, 0.0);
    assert_eq!(rep.max_deviation_exact, Some(Rational::ZERO));
    assert_eq!(SystemAction::doubling().check_measure_preserving(200, 4).unwrap().max_deviation, 0.0);
    let pts = MeasureSpace::uniform_points(7).unwrap();
    let perm = SystemAction::finite_permutation(&pts, vec![3, 0, 6, 1, 2, 5, 4]).unwrap();
    assert_eq!(perm.check_measure_preserving(200, 5).unwrap().max_deviation, 0.0);
    let odo = SystemAction::odometer(3).unwrap();
    assert_eq!(odo.check_measure_preserving(100, 6).unwrap().max_deviation, 0.0);
}

#[test]
fn doubling_join_growth() {
    let alpha = Partition::from_cuts(&[q(1, 2)]).unwrap();
    let dbl = SystemAction::doubling();
    let start = std::time::Instant::now();
    for n in 1..=20i64 {
        let elements: Vec<Vec<i64>> = (0..n).map(|i| vec![i]).collect();
        let family = dbl.orbit_partitions(&alpha, &elements).unwrap();
        let h = Refiner::from_partitions(alpha.space(), &family, false).unwrap().entropy();
        assert!((h - n as f64 * 2f64.ln()).abs() <= 1e-9, "n={n}: {h}");
    }
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn rotation_join_bound() {
    let alpha = Partition::from_cuts(&[q(1, 2)]).unwrap();
    let rot = SystemAction::golden_rotation();
    for n in [1i64, 2, 5, 17, 64, 300] {
        let elements: Vec<Vec<i64>> = (0..n).map(|i| vec![i]).collect();
        let family = rot.orbit_partitions(&alpha, &elements).unwrap();
        let r = Refiner::from_partitions(alpha.space(), &family, false).unwrap();
        assert!(r.cell_count() <= 2 * n as usize);
        assert!(r.entropy() <= (2.0 * n as f64).ln() + 1e-12);
    }
}

fn arb_interval_partition() -> impl Strategy<Value = Partition> {
    prop::collection::btree_set(1i64..48, 1..5)
        .prop_map(|cuts| Partition::from_cuts(&cuts.into_iter().map(|c| q(c, 48)).collect::<Vec<_>>()).unwrap())
}

fn systems() -> Vec<SystemAction> {
    vec![
        SystemAction::golden_rotation(),
        SystemAction::rotation(q(2, 7)),
        SystemAction::doubling(),
        SystemAction::odometer(2).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cocycle(which in 0usize..4, g in 0i64..6, h in 0i64..6, cuts in prop::collection::btree_set(1i64..32, 1..4)) {
        let sys = &systems()[which];
        let set = MeasurableSet::intervals(cuts.iter().map(|&c| (q(c - 1, 32), q(c, 32)))).unwrap();
        let gh = compose(&[g], &[h]);
        let direct = sys.pullback_set(&gh, &set).unwrap();
        let stepwise = sys.pullback_set(&[h], &sys.pullback_set(&[g], &set).unwrap()).unwrap();
        prop_assert_eq!(direct, stepwise);
    }

    #[test]
    fn torus_cocycle(g in (-4i64..4, -4i64..4), h in (-4i64..4, -4i64..4)) {
        let sys = SystemAction::torus_rotation(vec![q(1, 5), q(3, 11)]).unwrap();
        let set = MeasurableSet::Region(
            ergopart::region::RegionSet::from_boxes(2, &[vec![(q(1, 10), q(1, 2)), (q(0, 1), q(1, 3))]]).unwrap(),
        );
        let (g, h) = (vec![g.0, g.1], vec![h.0, h.1]);
        let direct = sys.pullback_set(&compose(&g, &h), &set).unwrap();
        let stepwise = sys.pullback_set(&h, &sys.pullback_set(&g, &set).unwrap()).unwrap();
        prop_assert_eq!(direct, stepwise);
    }

    #[test]
    fn entropy_invariance(which in 0usize..4, g in 0i64..9, alpha in arb_interval_partition()) {
        let sys = &systems()[which];
        let pulled = sys.pullback_partition(&[g], &alpha).unwrap();
        prop_assert_eq!(pulled.masses_exact(), alpha.masses_exact());
        prop_assert!((pulled.entropy() - alpha.entropy()).abs() <= 1e-12);
    }
}
