//! Probability spaces and their measurable sets.
//!
//! Two backends: finitely many weighted points, and the Lebesgue measure on
//! `[0,1)^d` with sets that are finite unions of rational boxes (`d = 1` is
//! the interval algebra).

use std::fmt;
use std::sync::Arc;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::region::RegionSet;

/// Tolerance for the total mass of a weighted point space.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Compensated (Neumaier) summation.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Clone)]
pub struct MeasureSpace(Arc<SpaceKind>);

#[derive(Debug, PartialEq)]
pub enum SpaceKind {
    WeightedPoints {
        weights: Vec<f64>,
        uniform: bool,
    },
    /// Lebesgue measure on `[0,1)^dim`; `dim == 1` is the interval algebra.
    Boxes {
        dim: usize,
    },
}

/// A sample from a space: a point index or coordinates in `[0,1)^d`.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Index(usize),
    Coords(Vec<f64>),
}

impl MeasureSpace {
    pub fn uniform_points(n: usize) -> Result<MeasureSpace> {
        if n == 0 {
            return Err(Error::InvalidInput("point count must be positive".into()));
        }
        let w = 1.0 / n as f64;
        Ok(MeasureSpace(Arc::new(SpaceKind::WeightedPoints { weights: vec![w; n], uniform: true })))
    }

    pub fn weighted_points(weights: Vec<f64>) -> Result<MeasureSpace> {
        if weights.is_empty() {
            return Err(Error::InvalidInput("point count must be positive".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidInput("weights must be finite and non-negative".into()));
        }
        let total = neumaier_sum(weights.iter().copied());
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidInput(format!("weights sum to {total}, not 1")));
        }
        let uniform = weights.iter().all(|w| *w == weights[0]);
        Ok(MeasureSpace(Arc::new(SpaceKind::WeightedPoints { weights, uniform })))
    }

    pub fn interval() -> MeasureSpace {
        MeasureSpace(Arc::new(SpaceKind::Boxes { dim: 1 }))
    }

    pub fn torus(dim: usize) -> Result<MeasureSpace> {
        if dim == 0 {
            return Err(Error::InvalidInput("torus dimension must be positive".into()));
        }
        Ok(MeasureSpace(Arc::new(SpaceKind::Boxes { dim })))
    }

    pub fn kind(&self) -> &SpaceKind {
        &self.0
    }

    pub fn point_count(&self) -> Option<usize> {
        match &*self.0 {
            SpaceKind::WeightedPoints { weights, .. } => Some(weights.len()),
            SpaceKind::Boxes { .. } => None,
        }
    }

    pub fn weights(&self) -> Option<&[f64]> {
        match &*self.0 {
            SpaceKind::WeightedPoints { weights, .. } => Some(weights),
            SpaceKind::Boxes { .. } => None,
        }
    }

    pub fn is_uniform(&self) -> bool {
        matches!(&*self.0, SpaceKind::WeightedPoints { uniform: true, .. })
    }

    pub fn region_dim(&self) -> Option<usize> {
        match &*self.0 {
            SpaceKind::Boxes { dim } => Some(*dim),
            SpaceKind::WeightedPoints { .. } => None,
        }
    }

    pub fn same_as(&self, other: &MeasureSpace) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }

    pub fn check_same(&self, other: &MeasureSpace) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::BackendMismatch(format!("{self:?} vs {other:?}")))
        }
    }

    pub fn full_set(&self) -> MeasurableSet {
        match &*self.0 {
            SpaceKind::WeightedPoints { weights, .. } => MeasurableSet::Points(PointSet::full(weights.len())),
            SpaceKind::Boxes { dim } => MeasurableSet::Region(RegionSet::full(*dim)),
        }
    }

    pub fn empty_set(&self) -> MeasurableSet {
        match &*self.0 {
            SpaceKind::WeightedPoints { weights, .. } => MeasurableSet::Points(PointSet::empty(weights.len())),
            SpaceKind::Boxes { dim } => MeasurableSet::Region(RegionSet::empty(*dim)),
        }
    }

    /// Whether `set` lives in this space's backend.
    pub fn check_set(&self, set: &MeasurableSet) -> Result<()> {
        match (&*self.0, set) {
            (SpaceKind::WeightedPoints { weights, .. }, MeasurableSet::Points(p)) if p.len() == weights.len() => Ok(()),
            (SpaceKind::Boxes { dim }, MeasurableSet::Region(r)) if r.dim() == *dim => Ok(()),
            _ => Err(Error::BackendMismatch(format!("set {set:?} does not belong to {self:?}"))),
        }
    }

    pub fn measure(&self, set: &MeasurableSet) -> Result<f64> {
        self.check_set(set)?;
        Ok(match (&*self.0, set) {
            (SpaceKind::WeightedPoints { weights, uniform: true }, MeasurableSet::Points(p)) => {
                p.count() as f64 / weights.len() as f64
            }
            (SpaceKind::WeightedPoints { weights, .. }, MeasurableSet::Points(p)) => {
                neumaier_sum(p.iter().map(|i| weights[i]))
            }
            (_, MeasurableSet::Region(r)) => r.measure().to_f64(),
            _ => unreachable!("checked above"),
        })
    }

    /// Exact measure where the backend has one: rational lengths for boxes,
    /// `count / N` for uniform points. `None` for general weights.
    pub fn measure_exact(&self, set: &MeasurableSet) -> Result<Option<Rational>> {
        self.check_set(set)?;
        Ok(match (&*self.0, set) {
            (SpaceKind::WeightedPoints { weights, uniform: true }, MeasurableSet::Points(p)) => {
                Some(Rational::new(p.count() as i64, weights.len() as i64))
            }
            (SpaceKind::WeightedPoints { .. }, _) => None,
            (_, MeasurableSet::Region(r)) => Some(r.measure()),
            _ => unreachable!("checked above"),
        })
    }

    /// `n` i.i.d. draws from the measure; identical for identical seeds.
    pub fn sample_points(&self, n: usize, seed: u64) -> Result<Vec<Point>> {
        if n == 0 {
            return Err(Error::InvalidInput("sample size must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match &*self.0 {
            SpaceKind::WeightedPoints { weights, .. } => {
                let dist = WeightedIndex::new(weights).map_err(|e| Error::InvalidInput(format!("weights: {e}")))?;
                Ok((0..n).map(|_| Point::Index(dist.sample(&mut rng))).collect())
            }
            SpaceKind::Boxes { dim } => {
                Ok((0..n).map(|_| Point::Coords((0..*dim).map(|_| rng.gen::<f64>()).collect())).collect())
            }
        }
    }
}

impl PartialEq for MeasureSpace {
    fn eq(&self, other: &MeasureSpace) -> bool {
        self.same_as(other)
    }
}

impl fmt::Debug for MeasureSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            SpaceKind::WeightedPoints { weights, uniform } => {
                write!(f, "WeightedPoints(n={}, uniform={uniform})", weights.len())
            }
            SpaceKind::Boxes { dim: 1 } => write!(f, "Interval"),
            SpaceKind::Boxes { dim } => write!(f, "Torus(d={dim})"),
        }
    }
}

/// Subset of `{0, .., n-1}` as a bitset.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PointSet {
    len: usize,
    words: Vec<u64>,
}

impl PointSet {
    pub fn empty(len: usize) -> PointSet {
        PointSet { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn full(len: usize) -> PointSet {
        let mut s = PointSet::empty(len);
        for i in 0..len {
            s.insert(i);
        }
        s
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Result<PointSet> {
        let mut s = PointSet::empty(len);
        for i in indices {
            if i >= len {
                return Err(Error::InvalidInput(format!("point index {i} out of range 0..{len}")));
            }
            s.insert(i);
        }
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(wi * 64 + tz)
            })
        })
    }

    fn zip_with(&self, other: &PointSet, f: impl Fn(u64, u64) -> u64) -> PointSet {
        let mut words: Vec<u64> = self.words.iter().zip(&other.words).map(|(a, b)| f(*a, *b)).collect();
        if let Some(last) = words.last_mut() {
            let tail = self.len % 64;
            if tail != 0 {
                *last &= (1u64 << tail) - 1;
            }
        }
        PointSet { len: self.len, words }
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum MeasurableSet {
    Points(PointSet),
    Region(RegionSet),
}

impl MeasurableSet {
    pub fn interval(lo: Rational, hi: Rational) -> Result<MeasurableSet> {
        Ok(MeasurableSet::Region(RegionSet::from_intervals([(lo, hi)])?))
    }

    pub fn intervals(parts: impl IntoIterator<Item = (Rational, Rational)>) -> Result<MeasurableSet> {
        Ok(MeasurableSet::Region(RegionSet::from_intervals(parts)?))
    }

    pub fn points(len: usize, indices: impl IntoIterator<Item = usize>) -> Result<MeasurableSet> {
        Ok(MeasurableSet::Points(PointSet::from_indices(len, indices)?))
    }

    pub fn is_empty(&self) -> bool {
        match self {
            MeasurableSet::Points(p) => p.is_empty(),
            MeasurableSet::Region(r) => r.is_empty(),
        }
    }

    pub fn as_region(&self) -> Option<&RegionSet> {
        match self {
            MeasurableSet::Region(r) => Some(r),
            MeasurableSet::Points(_) => None,
        }
    }

    pub fn as_points(&self) -> Option<&PointSet> {
        match self {
            MeasurableSet::Points(p) => Some(p),
            MeasurableSet::Region(_) => None,
        }
    }

    pub fn contains(&self, point: &Point) -> bool {
        match (self, point) {
            (MeasurableSet::Points(p), Point::Index(i)) => p.contains(*i),
            (MeasurableSet::Region(r), Point::Coords(c)) => r.contains(c),
            _ => false,
        }
    }

    fn binary(
        &self,
        other: &MeasurableSet,
        points: impl Fn(u64, u64) -> u64,
        region: impl Fn(&RegionSet, &RegionSet) -> Result<RegionSet>,
    ) -> Result<MeasurableSet> {
        match (self, other) {
            (MeasurableSet::Points(a), MeasurableSet::Points(b)) if a.len == b.len => {
                Ok(MeasurableSet::Points(a.zip_with(b, points)))
            }
            (MeasurableSet::Region(a), MeasurableSet::Region(b)) => Ok(MeasurableSet::Region(region(a, b)?)),
            _ => Err(Error::BackendMismatch(format!("{self:?} vs {other:?}"))),
        }
    }

    pub fn union(&self, other: &MeasurableSet) -> Result<MeasurableSet> {
        self.binary(other, |a, b| a | b, RegionSet::union)
    }

    pub fn intersection(&self, other: &MeasurableSet) -> Result<MeasurableSet> {
        self.binary(other, |a, b| a & b, RegionSet::intersection)
    }

    pub fn difference(&self, other: &MeasurableSet) -> Result<MeasurableSet> {
        self.binary(other, |a, b| a & !b, RegionSet::difference)
    }

    pub fn symmetric_difference(&self, other: &MeasurableSet) -> Result<MeasurableSet> {
        self.binary(other, |a, b| a ^ b, RegionSet::symmetric_difference)
    }

    pub fn complement(&self) -> Result<MeasurableSet> {
        match self {
            MeasurableSet::Points(p) => Ok(MeasurableSet::Points(p.zip_with(p, |a, _| !a))),
            MeasurableSet::Region(r) => Ok(MeasurableSet::Region(r.complement()?)),
        }
    }
}

impl fmt::Debug for MeasurableSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasurableSet::Points(p) => write!(f, "Points{p:?}"),
            MeasurableSet::Region(r) => write!(f, "{r:?}"),
        }
    }
}
