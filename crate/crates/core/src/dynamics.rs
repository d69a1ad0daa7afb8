//! Exactly representable actions of `ℤ^d` (and `ℕ` for the doubling map) and
//! the pullbacks `g⁻¹A`, `g⁻¹α` they induce.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measure_space::{MeasurableSet, MeasureSpace, Point, PointSet, SpaceKind};
use crate::partition::Partition;
use crate::rational::{continued_fraction_terms, convergent_with_min_denominator, Rational};
use crate::region::{AxisMap, RegionSet};

/// An element of `ℤ^d`, written additively.
pub type GroupElement = Vec<i64>;

/// Default lower bound on the denominator of rational stand-ins for irrational angles.
pub const MIN_ANGLE_DENOMINATOR: u64 = 1_000_000;

pub fn identity(rank: usize) -> GroupElement {
    vec![0; rank]
}

pub fn compose(g: &[i64], h: &[i64]) -> GroupElement {
    g.iter().zip(h).map(|(a, b)| a + b).collect()
}

/// Named irrationals used for rotation angles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Irrational {
    /// `(√5 − 1)/2`
    GoldenConjugate,
    /// `√2 − 1`
    Sqrt2Minus1,
}

impl Irrational {
    fn terms(self) -> Box<dyn Iterator<Item = u64>> {
        match self {
            Irrational::GoldenConjugate => Box::new(std::iter::once(0).chain(std::iter::repeat(1))),
            Irrational::Sqrt2Minus1 => Box::new(std::iter::once(0).chain(std::iter::repeat(2))),
        }
    }

    /// First continued-fraction convergent with denominator `≥ min_den`.
    pub fn convergent(self, min_den: u64) -> Rational {
        convergent_with_min_denominator(self.terms(), min_den)
    }
}

/// Convergent of a float's continued fraction with denominator `≥ min_den`
/// (or the float's exact value if the expansion terminates first).
pub fn angle_near(x: f64, min_den: u64) -> Result<Rational> {
    let exact = Rational::from_f64_exact(x).ok_or_else(|| Error::InvalidInput(format!("angle {x} is not finite")))?;
    let frac = exact.fract_mod1();
    let terms = continued_fraction_terms(&frac);
    let r = convergent_with_min_denominator(terms.iter().copied(), min_den);
    Ok(r)
}

#[derive(Clone, Debug, PartialEq)]
pub enum SystemKind {
    /// `x ↦ x + θ (mod 1)` on `[0,1)`.
    Rotation { angle: Rational },
    /// `x ↦ 2x (mod 1)`; only non-negative powers act.
    Doubling,
    /// Adding one with carry to the base-`b` digit expansion.
    Odometer { base: u32 },
    /// `i ↦ perm[i]` on a point space.
    FinitePermutation { perm: Vec<usize> },
    /// `ℤ^d` on `[0,1)^d`, generator `e_i` rotating coordinate `i` by `θ_i`.
    TorusRotation { angles: Vec<Rational> },
    /// `ℤ` acting diagonally on the product of one-dimensional factors.
    Product(Vec<SystemAction>),
}

/// The base metric on `X` used by mean metrics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaseMetric {
    /// `min(|x−y|, 1−|x−y|)` on `[0,1)`.
    Circle,
    /// `0` on equal points, `1` otherwise.
    Discrete,
    /// Maximum of coordinatewise circle distances on `[0,1)^d`.
    TorusMax,
    /// Identically zero.
    Zero,
}

impl BaseMetric {
    pub fn distance(self, x: &Point, y: &Point) -> f64 {
        match (self, x, y) {
            (BaseMetric::Zero, _, _) => 0.0,
            (BaseMetric::Discrete, Point::Index(a), Point::Index(b)) => f64::from(u8::from(a != b)),
            (BaseMetric::Discrete, Point::Coords(a), Point::Coords(b)) => f64::from(u8::from(a != b)),
            (BaseMetric::Circle | BaseMetric::TorusMax, Point::Coords(a), Point::Coords(b)) => {
                a.iter().zip(b).map(|(s, t)| circle_distance(*s, *t)).fold(0.0, f64::max)
            }
            _ => f64::NAN,
        }
    }

    pub fn diameter(self) -> f64 {
        match self {
            BaseMetric::Zero => 0.0,
            BaseMetric::Discrete => 1.0,
            BaseMetric::Circle | BaseMetric::TorusMax => 0.5,
        }
    }
}

pub fn circle_distance(x: f64, y: f64) -> f64 {
    let d = (x - y).abs().rem_euclid(1.0);
    d.min(1.0 - d)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SystemAction {
    kind: SystemKind,
    space: MeasureSpace,
}

impl SystemAction {
    pub fn rotation(angle: Rational) -> SystemAction {
        SystemAction { kind: SystemKind::Rotation { angle: angle.fract_mod1() }, space: MeasureSpace::interval() }
    }

    /// Rotation by the golden-ratio convergent with denominator `≥ 10⁶`.
    pub fn golden_rotation() -> SystemAction {
        SystemAction::rotation(Irrational::GoldenConjugate.convergent(MIN_ANGLE_DENOMINATOR))
    }

    pub fn doubling() -> SystemAction {
        SystemAction { kind: SystemKind::Doubling, space: MeasureSpace::interval() }
    }

    pub fn odometer(base: u32) -> Result<SystemAction> {
        if base < 2 {
            return Err(Error::InvalidInput(format!("odometer base must be at least 2, got {base}")));
        }
        Ok(SystemAction { kind: SystemKind::Odometer { base }, space: MeasureSpace::interval() })
    }

    pub fn finite_permutation(space: &MeasureSpace, perm: Vec<usize>) -> Result<SystemAction> {
        let n =
            space.point_count().ok_or_else(|| Error::BackendMismatch("a permutation needs a point space".into()))?;
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&i| i >= n || std::mem::replace(&mut seen[i], true)) {
            return Err(Error::InvalidInput(format!("not a permutation of {n} points")));
        }
        Ok(SystemAction { kind: SystemKind::FinitePermutation { perm }, space: space.clone() })
    }

    pub fn torus_rotation(angles: Vec<Rational>) -> Result<SystemAction> {
        let space = MeasureSpace::torus(angles.len())?;
        let angles = angles.iter().map(Rational::fract_mod1).collect();
        Ok(SystemAction { kind: SystemKind::TorusRotation { angles }, space })
    }

    pub fn product(factors: Vec<SystemAction>) -> Result<SystemAction> {
        if factors.is_empty() {
            return Err(Error::InvalidInput("product of no factors".into()));
        }
        for f in &factors {
            if !matches!(f.kind, SystemKind::Rotation { .. } | SystemKind::Doubling | SystemKind::Odometer { .. }) {
                return Err(Error::Unsupported("product factors must be interval maps".into()));
            }
        }
        let space = MeasureSpace::torus(factors.len())?;
        Ok(SystemAction { kind: SystemKind::Product(factors), space })
    }

    pub fn kind(&self) -> &SystemKind {
        &self.kind
    }

    pub fn space(&self) -> &MeasureSpace {
        &self.space
    }

    /// `d` for an action of `ℤ^d`.
    pub fn rank(&self) -> usize {
        match &self.kind {
            SystemKind::TorusRotation { angles } => angles.len(),
            _ => 1,
        }
    }

    /// Whether negative group elements act (false for non-invertible maps).
    pub fn is_invertible(&self) -> bool {
        match &self.kind {
            SystemKind::Doubling => false,
            SystemKind::Product(f) => f.iter().all(SystemAction::is_invertible),
            _ => true,
        }
    }

    /// Whether every group element preserves the default base metric.
    pub fn is_isometry(&self) -> bool {
        match &self.kind {
            SystemKind::Rotation { .. } | SystemKind::TorusRotation { .. } | SystemKind::FinitePermutation { .. } => {
                true
            }
            SystemKind::Product(f) => f.iter().all(SystemAction::is_isometry),
            _ => false,
        }
    }

    pub fn default_metric(&self) -> BaseMetric {
        match self.space.kind() {
            SpaceKind::WeightedPoints { .. } => BaseMetric::Discrete,
            SpaceKind::Boxes { dim: 1 } => BaseMetric::Circle,
            SpaceKind::Boxes { .. } => BaseMetric::TorusMax,
        }
    }

    pub fn check_element(&self, g: &[i64]) -> Result<()> {
        if g.len() != self.rank() {
            return Err(Error::InvalidInput(format!(
                "group element {g:?} has rank {}, system has rank {}",
                g.len(),
                self.rank()
            )));
        }
        if !self.is_invertible() && g.iter().any(|&k| k < 0) {
            return Err(Error::InvalidInput(format!("{g:?}: negative powers of a non-invertible map")));
        }
        Ok(())
    }

    /// One-dimensional preimage maps, one per axis, for `g`.
    fn axis_maps(&self, g: &[i64]) -> Result<Vec<AxisMap>> {
        fn factor_map(kind: &SystemKind, k: i64) -> Result<AxisMap> {
            Ok(match kind {
                SystemKind::Rotation { angle } => AxisMap::Translate((angle * &Rational::integer(k)).fract_mod1()),
                SystemKind::Doubling => {
                    AxisMap::Dyadic(u32::try_from(k).map_err(|_| Error::InvalidInput(format!("doubling power {k}")))?)
                }
                SystemKind::Odometer { base } => AxisMap::Odometer { base: *base, steps: k },
                _ => unreachable!("validated in the constructor"),
            })
        }
        match &self.kind {
            SystemKind::TorusRotation { angles } => Ok(angles
                .iter()
                .zip(g)
                .map(|(a, &k)| AxisMap::Translate((a * &Rational::integer(k)).fract_mod1()))
                .collect()),
            SystemKind::Product(factors) => factors.iter().map(|f| factor_map(&f.kind, g[0])).collect(),
            SystemKind::FinitePermutation { .. } => unreachable!("point system"),
            kind => Ok(vec![factor_map(kind, g[0])?]),
        }
    }

    /// `perm^k` as an index map.
    fn permutation_power(perm: &[usize], k: i64) -> Vec<usize> {
        let n = perm.len();
        let mut out = vec![0usize; n];
        let mut done = vec![false; n];
        for start in 0..n {
            if done[start] {
                continue;
            }
            let mut cycle = vec![start];
            let mut cur = perm[start];
            while cur != start {
                cycle.push(cur);
                cur = perm[cur];
            }
            let len = cycle.len() as i64;
            let shift = k.rem_euclid(len) as usize;
            for (pos, &i) in cycle.iter().enumerate() {
                out[i] = cycle[(pos + shift) % cycle.len()];
                done[i] = true;
            }
        }
        out
    }

    /// `g⁻¹A = {x : gx ∈ A}`.
    pub fn pullback_set(&self, g: &[i64], set: &MeasurableSet) -> Result<MeasurableSet> {
        self.check_element(g)?;
        self.space.check_set(set)?;
        if g.iter().all(|&k| k == 0) {
            return Ok(set.clone());
        }
        match (&self.kind, set) {
            (SystemKind::FinitePermutation { perm }, MeasurableSet::Points(p)) => {
                let map = SystemAction::permutation_power(perm, g[0]);
                let mut out = PointSet::empty(perm.len());
                for (i, &gi) in map.iter().enumerate() {
                    if p.contains(gi) {
                        out.insert(i);
                    }
                }
                Ok(MeasurableSet::Points(out))
            }
            (_, MeasurableSet::Region(r)) => Ok(MeasurableSet::Region(r.preimage(&self.axis_maps(g)?)?)),
            _ => Err(Error::BackendMismatch("set does not belong to the system's space".into())),
        }
    }

    /// `g⁻¹α`, atom order preserved.
    pub fn pullback_partition(&self, g: &[i64], alpha: &Partition) -> Result<Partition> {
        self.space.check_same(alpha.space())?;
        let atoms = alpha.atoms().iter().map(|a| self.pullback_set(g, a)).collect::<Result<Vec<_>>>()?;
        Partition::new(&self.space, atoms)
    }

    /// `[g⁻¹α for g in S]`, in the order of `S`.
    pub fn orbit_partitions(&self, alpha: &Partition, elements: &[GroupElement]) -> Result<Vec<Partition>> {
        if elements.is_empty() {
            return Err(Error::InvalidInput("empty set of group elements".into()));
        }
        elements.par_iter().map(|g| self.pullback_partition(g, alpha)).collect()
    }

    /// `gx`.
    pub fn apply(&self, g: &[i64], x: &Point) -> Result<Point> {
        self.check_element(g)?;
        match (&self.kind, x) {
            (SystemKind::FinitePermutation { perm }, Point::Index(i)) => {
                Ok(Point::Index(SystemAction::permutation_power(perm, g[0])[*i]))
            }
            (SystemKind::FinitePermutation { .. }, _) => Err(Error::BackendMismatch("expected a point index".into())),
            (SystemKind::TorusRotation { angles }, Point::Coords(c)) if c.len() == angles.len() => {
                Ok(Point::Coords(c.iter().zip(angles.iter().zip(g)).map(|(x, (a, &k))| rotate(*x, a, k)).collect()))
            }
            (SystemKind::Product(factors), Point::Coords(c)) if c.len() == factors.len() => {
                Ok(Point::Coords(factors.iter().zip(c).map(|(f, x)| forward_1d(&f.kind, *x, g[0])).collect()))
            }
            (kind, Point::Coords(c)) if c.len() == 1 => Ok(Point::Coords(vec![forward_1d(kind, c[0], g[0])])),
            _ => Err(Error::BackendMismatch(format!("point {x:?} does not belong to the system's space"))),
        }
    }

    /// Largest `|μ(A) − μ(g⁻¹A)|` over random test sets and elements `g`
    /// (the generators, their inverses where they act, and small random words).
    pub fn check_measure_preserving(&self, trials: usize, seed: u64) -> Result<MeasurePreservationReport> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rank = self.rank();
        let mut elements: Vec<GroupElement> = Vec::new();
        for i in 0..rank {
            let mut e = identity(rank);
            e[i] = 1;
            elements.push(e.clone());
            if self.is_invertible() {
                e[i] = -1;
                elements.push(e);
            }
        }
        for _ in 0..3 {
            let lo = if self.is_invertible() { -7 } else { 0 };
            elements.push((0..rank).map(|_| rng.gen_range(lo..=7)).collect());
        }
        let mut max_dev = 0.0f64;
        let mut max_exact = Some(Rational::ZERO);
        for _ in 0..trials {
            let set = random_set(&self.space, &mut rng)?;
            for g in &elements {
                let pulled = self.pullback_set(g, &set)?;
                match (self.space.measure_exact(&set)?, self.space.measure_exact(&pulled)?) {
                    (Some(a), Some(b)) => {
                        let dev = (&a - &b).abs();
                        max_dev = max_dev.max(dev.to_f64());
                        if let Some(m) = &mut max_exact {
                            if dev > *m {
                                *m = dev;
                            }
                        }
                    }
                    _ => {
                        max_exact = None;
                        let dev = (self.space.measure(&set)? - self.space.measure(&pulled)?).abs();
                        max_dev = max_dev.max(dev);
                    }
                }
            }
        }
        Ok(MeasurePreservationReport {
            trials,
            elements_tested: elements.len(),
            max_deviation: max_dev,
            max_deviation_exact: max_exact,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurePreservationReport {
    pub trials: usize,
    pub elements_tested: usize,
    pub max_deviation: f64,
    pub max_deviation_exact: Option<Rational>,
}

fn rotate(x: f64, angle: &Rational, k: i64) -> f64 {
    let shift = (angle * &Rational::integer(k)).fract_mod1().to_f64();
    let y = x + shift;
    if y >= 1.0 {
        y - 1.0
    } else {
        y
    }
}

fn forward_1d(kind: &SystemKind, x: f64, k: i64) -> f64 {
    match kind {
        SystemKind::Rotation { angle } => rotate(x, angle, k),
        SystemKind::Doubling => {
            let mut y = x;
            for _ in 0..k {
                y *= 2.0;
                if y >= 1.0 {
                    y -= 1.0;
                }
            }
            y
        }
        SystemKind::Odometer { base } => {
            let mut y = x;
            for _ in 0..k.unsigned_abs() {
                y = odometer_step_point(y, *base, k > 0);
            }
            y
        }
        _ => unreachable!("interval maps only"),
    }
}

/// One forward (or inverse) odometer step on a float.
fn odometer_step_point(x: f64, base: u32, forward: bool) -> f64 {
    let b = f64::from(base);
    let carry_digit = if forward { b - 1.0 } else { 0.0 };
    let mut rest = x;
    let mut k = 0i32;
    while k < 64 {
        let d = (rest * b).floor().min(b - 1.0);
        if d != carry_digit {
            break;
        }
        rest = rest * b - d;
        k += 1;
    }
    let head = 1.0 - b.powi(-k);
    let y = if forward { x - head + b.powi(-(k + 1)) } else { x + head - b.powi(-(k + 1)) };
    y.rem_euclid(1.0)
}

fn random_set(space: &MeasureSpace, rng: &mut ChaCha8Rng) -> Result<MeasurableSet> {
    match space.kind() {
        SpaceKind::WeightedPoints { weights, .. } => {
            let idx: Vec<usize> = (0..weights.len()).filter(|_| rng.gen_bool(0.5)).collect();
            MeasurableSet::points(weights.len(), idx)
        }
        SpaceKind::Boxes { dim } => {
            let den = 64i64;
            let mut boxes = Vec::new();
            for _ in 0..rng.gen_range(1..=3) {
                let side = (0..*dim)
                    .map(|_| {
                        let a = rng.gen_range(0..den);
                        let b = rng.gen_range(a + 1..=den);
                        (Rational::new(a, den), Rational::new(b, den))
                    })
                    .collect::<Vec<_>>();
                boxes.push(side);
            }
            Ok(MeasurableSet::Region(RegionSet::from_boxes(*dim, &boxes)?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn doubling_preimage_of_left_half() {
        let t = SystemAction::doubling();
        let a = MeasurableSet::interval(q(0, 1), q(1, 2)).unwrap();
        let pre = t.pullback_set(&[1], &a).unwrap();
        assert_eq!(pre, MeasurableSet::intervals([(q(0, 1), q(1, 4)), (q(1, 2), q(3, 4))]).unwrap());
        assert!(t.pullback_set(&[-1], &a).is_err());
    }

    #[test]
    fn rotation_by_third() {
        let t = SystemAction::rotation(q(1, 3));
        let a = MeasurableSet::interval(q(0, 1), q(1, 3)).unwrap();
        let pre = t.pullback_set(&[1], &a).unwrap();
        assert_eq!(pre, MeasurableSet::interval(q(2, 3), q(1, 1)).unwrap());
        let pre = t.pullback_set(&[-1], &a).unwrap();
        assert_eq!(pre, MeasurableSet::interval(q(1, 3), q(2, 3)).unwrap());
    }

    #[test]
    fn golden_angle() {
        match SystemAction::golden_rotation().kind() {
            SystemKind::Rotation { angle } => assert_eq!(*angle, q(832040, 1346269)),
            _ => unreachable!(),
        }
        assert_eq!(Irrational::Sqrt2Minus1.convergent(1000), q(985, 2378));
        assert_eq!(angle_near(0.25, 1_000_000).unwrap(), q(1, 4));
    }

    #[test]
    fn permutation_pullback_and_forward() {
        let space = MeasureSpace::uniform_points(4).unwrap();
        let t = SystemAction::finite_permutation(&space, vec![1, 2, 3, 0]).unwrap();
        let a = MeasurableSet::points(4, [0]).unwrap();
        // T(3) = 0
        assert_eq!(t.pullback_set(&[1], &a).unwrap(), MeasurableSet::points(4, [3]).unwrap());
        assert_eq!(t.pullback_set(&[-1], &a).unwrap(), MeasurableSet::points(4, [1]).unwrap());
        assert_eq!(t.apply(&[5], &Point::Index(0)).unwrap(), Point::Index(1));
    }

    #[test]
    fn odometer_forward_matches_pullback() {
        let t = SystemAction::odometer(2).unwrap();
        // T(0.75) = 0.125: digits 1,1,0 -> 0,0,1
        let y = t.apply(&[1], &Point::Coords(vec![0.75])).unwrap();
        assert_eq!(y, Point::Coords(vec![0.125]));
        let back = t.apply(&[-1], &y).unwrap();
        assert_eq!(back, Point::Coords(vec![0.75]));
        let a = MeasurableSet::interval(q(1, 8), q(1, 4)).unwrap();
        let pre = t.pullback_set(&[1], &a).unwrap();
        assert!(pre.contains(&Point::Coords(vec![0.75])));
    }

    #[test]
    fn measure_preservation_is_exact() {
        for sys in [
            SystemAction::golden_rotation(),
            SystemAction::doubling(),
            SystemAction::odometer(3).unwrap(),
            SystemAction::torus_rotation(vec![q(1, 7), q(2, 9)]).unwrap(),
        ] {
            let rep = sys.check_measure_preserving(20, 1).unwrap();
            assert_eq!(rep.max_deviation_exact, Some(Rational::ZERO), "{sys:?}");
        }
        let space = MeasureSpace::uniform_points(6).unwrap();
        let t = SystemAction::finite_permutation(&space, vec![2, 0, 1, 4, 5, 3]).unwrap();
        assert_eq!(t.check_measure_preserving(20, 1).unwrap().max_deviation, 0.0);
    }
}
