use ergopart::complexity::{
    complexity_profile, covering_number, invariance_check, mean_equicontinuity_diagnostic, BlockReport, NameTable,
    Solver, TableMode, Verdict, DEFAULT_MAX_BLOCKS,
};
use ergopart::dynamics::{GroupElement, SystemAction};
use ergopart::{MeasureSpace, Partition, Rational};
use proptest::prelude::*;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn halves() -> Partition {
    Partition::from_cuts(&[q(1, 2)]).unwrap()
}

fn window(n: i64) -> Vec<GroupElement> {
    (0..n).map(|i| vec![i]).collect()
}

fn table_of(alpha: &Partition, sys: &SystemAction, n: i64) -> NameTable {
    NameTable::build(&sys.orbit_partitions(alpha, &window(n)).unwrap(), TableMode::Cells).unwrap()
}

#[test]
fn name_table_examples() {
    let three = Partition::from_cuts(&[q(1, 5), q(1, 2)]).unwrap();
    let t = NameTable::build(&[three], TableMode::Cells).unwrap();
    assert_eq!(t.cell_count(), 3);

    let dbl = table_of(&halves(), &SystemAction::doubling(), 6);
    assert_eq!(dbl.cell_count(), 64);
    assert!(dbl.weights_exact().unwrap().iter().all(|w| *w == q(1, 64)));

    for n in [3, 10, 40] {
        let rot = table_of(&halves(), &SystemAction::golden_rotation(), n);
        assert!(rot.cell_count() <= 2 * n as usize);
        let total: Rational = rot.weights_exact().unwrap().iter().sum();
        assert_eq!(total, Rational::ONE);
        for c in 1..rot.cell_count() {
            assert_ne!(rot.name(c - 1), rot.name(c));
        }
    }

    let sampled = NameTable::build(
        &SystemAction::doubling().orbit_partitions(&halves(), &window(3)).unwrap(),
        TableMode::Samples { n: 1000, seed: 5 },
    )
    .unwrap();
    let sum: f64 = sampled.weights().iter().sum();
    assert!((sum - 1.0).abs() < 1e-12);
    assert!(sampled.weights().iter().all(|w| (w * 1000.0 - (w * 1000.0).round()).abs() < 1e-9));
}

#[test]
fn hamming_examples() {
    let t = table_of(&halves(), &SystemAction::doubling(), 4);
    assert_eq!(t.hamming_distance(&[0, 1, 0, 1], &[0, 1, 0, 1]).unwrap(), 0.0);
    assert_eq!(t.hamming_distance(&[0, 1, 0, 1], &[0, 1, 1, 1]).unwrap(), 0.25);
    let single = NameTable::build(&[halves()], TableMode::Cells).unwrap();
    assert_eq!(single.hamming_distance(&[0], &[1]).unwrap(), 1.0);
}

#[test]
fn covering_examples() {
    let x = MeasureSpace::interval();
    let trivial = NameTable::build(&[Partition::trivial(&x)], TableMode::Cells).unwrap();
    assert_eq!(covering_number(&trivial, 0.1, Solver::Exact).unwrap().cover_size, 1);
    let two = NameTable::build(&[halves()], TableMode::Cells).unwrap();
    assert_eq!(covering_number(&two, 0.4, Solver::Exact).unwrap().cover_size, 2);
    assert_eq!(covering_number(&two, 0.4, Solver::Greedy).unwrap().cover_size, 2);
}

#[test]
fn dichotomy_profiles() {
    let alpha = halves();
    let rot = SystemAction::golden_rotation();
    let wins: Vec<Vec<GroupElement>> = [16, 32, 64, 128, 256, 512].iter().map(|&n| window(n)).collect();
    let p = complexity_profile(&alpha, &rot, &wins, 0.1, Solver::Greedy, TableMode::Cells).unwrap();
    assert_eq!(p.verdict, Verdict::BoundedPlateau, "{:?}", p.sizes());

    let dbl = SystemAction::doubling();
    let wins: Vec<Vec<GroupElement>> = [4, 8, 12, 16].iter().map(|&n| window(n)).collect();
    let p = complexity_profile(&alpha, &dbl, &wins, 0.1, Solver::Greedy, TableMode::Cells).unwrap();
    let s = p.sizes();
    assert!(s.windows(2).all(|w| w[0] < w[1]), "{s:?}");
    assert!(s[3] >= 4 * s[1]);
    assert_eq!(p.verdict, Verdict::Growing);

    let constant = vec![vec![vec![0i64]]; 4];
    let p = complexity_profile(&alpha, &dbl, &constant, 0.1, Solver::Greedy, TableMode::Cells).unwrap();
    assert!(p.sizes().windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn greedy_spot_checked_by_exact_solver() {
    let alpha = halves();
    for (sys, max_n) in [(SystemAction::golden_rotation(), 8), (SystemAction::doubling(), 4)] {
        for n in 1..=max_n {
            let t = table_of(&alpha, &sys, n);
            let g = covering_number(&t, 0.1, Solver::Greedy).unwrap().cover_size;
            let e = covering_number(&t, 0.1, Solver::Exact).unwrap().cover_size;
            assert!(g >= e);
        }
    }
}

#[test]
fn exact_solver_refuses_large_tables() {
    let t = table_of(&halves(), &SystemAction::doubling(), 5);
    assert!(matches!(covering_number(&t, 0.1, Solver::Exact), Err(ergopart::Error::Capacity(_))));
}

#[test]
fn diagnostic_examples() {
    let x = MeasureSpace::interval();
    let rot = SystemAction::golden_rotation();
    let trivial = Partition::trivial(&x);
    match mean_equicontinuity_diagnostic(&trivial, &rot, &[window(8)], 0.2, DEFAULT_MAX_BLOCKS).unwrap() {
        BlockReport::Blocks(b) => assert_eq!(b.block_masses, vec![1.0]),
        other => panic!("{other:?}"),
    }

    let alpha = halves();
    let short: Vec<Vec<GroupElement>> = vec![window(4), window(8)];
    let long: Vec<Vec<GroupElement>> = vec![window(4), window(8), window(16), window(32)];
    let count =
        |wins: &[Vec<GroupElement>]| match mean_equicontinuity_diagnostic(&alpha, &rot, wins, 0.2, DEFAULT_MAX_BLOCKS)
            .unwrap()
        {
            BlockReport::Blocks(b) => {
                assert!(b.cover_check.iter().all(|&ok| ok));
                assert_eq!(b.centers.len(), b.block_masses.len());
                // one center per block is a covering witness
                for w in wins.iter().filter(|w| w.len() <= 8) {
                    let t = NameTable::build(&rot.orbit_partitions(&alpha, w).unwrap(), TableMode::Cells).unwrap();
                    assert!(covering_number(&t, 0.2, Solver::Exact).unwrap().cover_size <= b.block_masses.len());
                }
                b.block_masses.len()
            }
            other => panic!("{other:?}"),
        };
    assert!(count(&long) <= DEFAULT_MAX_BLOCKS);
    assert!(count(&short) <= count(&long));

    let dbl = SystemAction::doubling();
    match mean_equicontinuity_diagnostic(&alpha, &dbl, &[window(12)], 0.2, DEFAULT_MAX_BLOCKS).unwrap() {
        BlockReport::Failure(c) => {
            assert_eq!(c.window_size, 12);
            assert!(c.attempted_blocks as f64 * c.max_ball_mass <= 0.8);
        }
        other => panic!("{other:?}"),
    }
}

/// A random table: distinct names over an alphabet of size `s`, integer weights.
fn arb_table(max_cells: usize) -> impl Strategy<Value = NameTable> {
    (1usize..=6, 2u16..=3).prop_flat_map(move |(len, s)| {
        prop::collection::btree_map(prop::collection::vec(0u16..s, len), 1i64..10, 1..=max_cells).prop_map(move |m| {
            let total: i64 = m.values().sum();
            let names: Vec<u16> = m.keys().flatten().copied().collect();
            let exact: Vec<Rational> = m.values().map(|&w| q(w, total)).collect();
            let weights = exact.iter().map(Rational::to_f64).collect();
            NameTable::from_cells(len, names, weights, Some(exact), TableMode::Cells).unwrap()
        })
    })
}

/// Smallest number of centers whose open balls cover mass `> 1 − ε`, by
/// enumerating every subset of cells.
fn exhaustive_cover(t: &NameTable, eps: Rational) -> usize {
    let m = t.cell_count();
    let len = t.name_len() as i64;
    let w = t.weights_exact().unwrap();
    let ball = |c: usize| -> u32 {
        (0..m)
            .filter(|&d| {
                let k = t.name(c).iter().zip(t.name(d)).filter(|(a, b)| a != b).count() as i64;
                q(k, len) < eps
            })
            .fold(0, |acc, d| acc | (1 << d))
    };
    let balls: Vec<u32> = (0..m).map(ball).collect();
    let need = Rational::ONE - eps;
    (0u32..1 << m)
        .filter(|s| {
            let covered = (0..m).filter(|&c| s & (1 << c) != 0).fold(0u32, |acc, c| acc | balls[c]);
            (0..m).filter(|&d| covered & (1 << d) != 0).map(|d| w[d].clone()).sum::<Rational>() > need
        })
        .map(u32::count_ones)
        .min()
        .unwrap() as usize
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn greedy_bounds_exact(t in arb_table(20), e in prop::sample::select(vec![0.2, 0.3, 0.45])) {
        let g = covering_number(&t, e, Solver::Greedy).unwrap();
        let x = covering_number(&t, e, Solver::Exact).unwrap();
        prop_assert!(g.cover_size >= x.cover_size);
        prop_assert!(x.cover_size <= t.cell_count());
    }

    #[test]
    fn exact_matches_enumeration(t in arb_table(12), e in prop::sample::select(vec![(0.2, 5i64), (0.3, 10), (0.45, 20)])) {
        let eps = Rational::new((e.0 * e.1 as f64).round() as i64, e.1);
        prop_assert_eq!(covering_number(&t, e.0, Solver::Exact).unwrap().cover_size, exhaustive_cover(&t, eps));
    }

    #[test]
    fn monotone_in_epsilon(t in arb_table(16)) {
        let sizes: Vec<usize> = [0.05, 0.1, 0.2, 0.4]
            .iter()
            .map(|&e| covering_number(&t, e, Solver::Exact).unwrap().cover_size)
            .collect();
        prop_assert!(sizes.windows(2).all(|w| w[0] >= w[1]), "{:?}", sizes);
    }

    #[test]
    fn cover_at_most_join_size(cuts in prop::collection::btree_set(1i64..16, 1..3), n in 1i64..6) {
        let alpha = Partition::from_cuts(&cuts.iter().map(|&c| q(c, 16)).collect::<Vec<_>>()).unwrap();
        let t = table_of(&alpha, &SystemAction::doubling(), n);
        let c = covering_number(&t, 0.1, Solver::Greedy).unwrap().cover_size;
        prop_assert!(c <= t.cell_count());
        prop_assert!(t.cell_count() <= alpha.len().pow(n as u32));
    }

    #[test]
    fn hamming_triangle(u in prop::collection::vec(0u16..3, 9), v in prop::collection::vec(0u16..3, 9), w in prop::collection::vec(0u16..3, 9)) {
        let t = table_of(&halves(), &SystemAction::doubling(), 9);
        let count = |a: &[u16], b: &[u16]| (t.hamming_distance(a, b).unwrap() * 9.0).round() as i64;
        prop_assert!(count(&u, &w) <= count(&u, &v) + count(&v, &w));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(25))]

    #[test]
    fn invariance_finite_permutation(
        perm in Just((0..9usize).collect::<Vec<_>>()).prop_shuffle(),
        labels in prop::collection::vec(prop::collection::vec(0usize..3, 9), 1..3),
        g in 0i64..12,
    ) {
        let space = MeasureSpace::uniform_points(9).unwrap();
        let sys = SystemAction::finite_permutation(&space, perm).unwrap();
        let family: Vec<Partition> = labels.iter().map(|l| Partition::from_labels(&space, l).unwrap()).collect();
        for eps in [0.1, 0.3, 0.6] {
            prop_assert!(invariance_check(&family, &[g], &sys, eps).unwrap().holds);
        }
    }

    #[test]
    fn invariance_rotation(cut in 1i64..12, k in 1i64..4, g in -50i64..50) {
        let alpha = Partition::from_cuts(&[q(cut, 12)]).unwrap();
        let sys = SystemAction::golden_rotation();
        let family = sys.orbit_partitions(&alpha, &window(k)).unwrap();
        for eps in [0.1, 0.3, 0.6] {
            prop_assert!(invariance_check(&family, &[g], &sys, eps).unwrap().holds);
        }
    }
}
