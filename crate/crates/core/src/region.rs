//! Finite unions of half-open rational boxes in `[0,1)^d`.
//!
//! A set is stored as sorted slabs along the first axis, each carrying the
//! cross-section over the remaining axes. Slabs are disjoint, non-empty, and
//! two slabs that touch always have different cross-sections, which makes the
//! representation canonical: equal sets have identical slab lists.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Upper bound on the number of components a single set may hold.
pub const COMPONENT_CAP: usize = 1 << 20;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RegionSet {
    dim: usize,
    slabs: Vec<Slab>,
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct Slab {
    lo: Rational,
    hi: Rational,
    /// Cross-section over the remaining axes; `None` for the last axis.
    inner: Option<Arc<RegionSet>>,
}

/// A one-dimensional piecewise map whose preimages of intervals are finite
/// unions of intervals.
#[derive(Clone, Debug, PartialEq)]
pub enum AxisMap {
    Identity,
    /// `x -> x + shift (mod 1)`
    Translate(Rational),
    /// `x -> 2^power * x (mod 1)`
    Dyadic(u32),
    /// `steps` applications of the base-`base` odometer (negative = inverse).
    Odometer {
        base: u32,
        steps: i64,
    },
}

#[derive(Clone, Copy)]
enum BoolOp {
    Union,
    Intersection,
    Difference,
    SymmetricDifference,
}

impl BoolOp {
    fn apply(self, a: bool, b: bool) -> bool {
        match self {
            BoolOp::Union => a || b,
            BoolOp::Intersection => a && b,
            BoolOp::Difference => a && !b,
            BoolOp::SymmetricDifference => a != b,
        }
    }
}

impl RegionSet {
    pub fn empty(dim: usize) -> RegionSet {
        assert!(dim >= 1);
        RegionSet { dim, slabs: Vec::new() }
    }

    pub fn full(dim: usize) -> RegionSet {
        RegionSet::single_box(&vec![(Rational::ZERO, Rational::ONE); dim]).expect("unit box is valid")
    }

    /// The box `∏ [lo_i, hi_i)`; empty if any side is degenerate.
    pub fn single_box(sides: &[(Rational, Rational)]) -> Result<RegionSet> {
        let dim = sides.len();
        if dim == 0 {
            return Err(Error::InvalidInput("box needs at least one side".into()));
        }
        for (lo, hi) in sides {
            if lo < &Rational::ZERO || hi > &Rational::ONE || lo > hi {
                return Err(Error::InvalidInput(format!("box side [{lo}, {hi}) is not inside [0, 1)")));
            }
        }
        if sides.iter().any(|(lo, hi)| lo == hi) {
            return Ok(RegionSet::empty(dim));
        }
        let mut set = RegionSet::empty(1);
        for (i, (lo, hi)) in sides.iter().enumerate().rev() {
            let inner = if i + 1 == dim { None } else { Some(Arc::new(set)) };
            set = RegionSet { dim: dim - i, slabs: vec![Slab { lo: lo.clone(), hi: hi.clone(), inner }] };
        }
        Ok(set)
    }

    /// Union of the half-open intervals, in any order and possibly overlapping.
    pub fn from_intervals<I>(intervals: I) -> Result<RegionSet>
    where
        I: IntoIterator<Item = (Rational, Rational)>,
    {
        let mut slabs: Vec<Slab> = Vec::new();
        for (lo, hi) in intervals {
            if lo < Rational::ZERO || hi > Rational::ONE || lo > hi {
                return Err(Error::InvalidInput(format!("interval [{lo}, {hi}) is not inside [0, 1)")));
            }
            if lo < hi {
                slabs.push(Slab { lo, hi, inner: None });
            }
        }
        slabs.sort_by(|a, b| a.lo.cmp(&b.lo));
        let mut merged: Vec<Slab> = Vec::with_capacity(slabs.len());
        for s in slabs {
            match merged.last_mut() {
                Some(last) if s.lo <= last.hi => {
                    if s.hi > last.hi {
                        last.hi = s.hi;
                    }
                }
                _ => merged.push(s),
            }
        }
        check_cap(merged.len())?;
        Ok(RegionSet { dim: 1, slabs: merged })
    }

    /// Union of boxes given as per-axis sides.
    pub fn from_boxes(dim: usize, boxes: &[Vec<(Rational, Rational)>]) -> Result<RegionSet> {
        let mut acc = RegionSet::empty(dim);
        for b in boxes {
            if b.len() != dim {
                return Err(Error::InvalidInput(format!("box has {} sides, expected {dim}", b.len())));
            }
            acc = acc.union(&RegionSet::single_box(b)?)?;
        }
        Ok(acc)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.slabs.is_empty()
    }

    /// Number of slabs along the first axis.
    pub fn slab_count(&self) -> usize {
        self.slabs.len()
    }

    /// Intervals of a one-dimensional set, in increasing order.
    pub fn intervals(&self) -> impl Iterator<Item = (&Rational, &Rational)> {
        debug_assert_eq!(self.dim, 1);
        self.slabs.iter().map(|s| (&s.lo, &s.hi))
    }

    /// Disjoint boxes whose union is the set (one per leaf of the slab tree).
    pub fn boxes(&self) -> Vec<Vec<(Rational, Rational)>> {
        let mut out = Vec::new();
        for s in &self.slabs {
            match &s.inner {
                None => out.push(vec![(s.lo.clone(), s.hi.clone())]),
                Some(inner) => {
                    for mut rest in inner.boxes() {
                        rest.insert(0, (s.lo.clone(), s.hi.clone()));
                        out.push(rest);
                    }
                }
            }
        }
        out
    }

    pub fn measure(&self) -> Rational {
        self.slabs
            .iter()
            .map(|s| {
                let len = &s.hi - &s.lo;
                match &s.inner {
                    None => len,
                    Some(inner) => &len * &inner.measure(),
                }
            })
            .sum()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        debug_assert_eq!(point.len(), self.dim);
        let x = point[0];
        // slabs are sorted and disjoint; binary search on lower ends
        let idx = self.slabs.partition_point(|s| s.lo.to_f64() <= x);
        if idx == 0 {
            return false;
        }
        let s = &self.slabs[idx - 1];
        if x >= s.hi.to_f64() {
            return false;
        }
        match &s.inner {
            None => true,
            Some(inner) => inner.contains(&point[1..]),
        }
    }

    pub fn union(&self, other: &RegionSet) -> Result<RegionSet> {
        self.combine(other, BoolOp::Union)
    }

    pub fn intersection(&self, other: &RegionSet) -> Result<RegionSet> {
        self.combine(other, BoolOp::Intersection)
    }

    pub fn difference(&self, other: &RegionSet) -> Result<RegionSet> {
        self.combine(other, BoolOp::Difference)
    }

    pub fn symmetric_difference(&self, other: &RegionSet) -> Result<RegionSet> {
        self.combine(other, BoolOp::SymmetricDifference)
    }

    pub fn complement(&self) -> Result<RegionSet> {
        RegionSet::full(self.dim).difference(self)
    }

    fn check_dim(&self, other: &RegionSet) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::BackendMismatch(format!("region of dimension {} vs {}", self.dim, other.dim)));
        }
        Ok(())
    }

    fn combine(&self, other: &RegionSet, op: BoolOp) -> Result<RegionSet> {
        self.check_dim(other)?;
        if self.dim == 1 {
            return combine_1d(&self.slabs, &other.slabs, op);
        }
        // Sweep the merged breakpoints of both slab lists.
        let mut cuts: Vec<&Rational> = Vec::with_capacity(2 * (self.slabs.len() + other.slabs.len()));
        for s in self.slabs.iter().chain(other.slabs.iter()) {
            cuts.push(&s.lo);
            cuts.push(&s.hi);
        }
        cuts.sort();
        cuts.dedup();
        let empty = RegionSet::empty(self.dim - 1);
        let (mut i, mut j) = (0usize, 0usize);
        let mut out: Vec<Slab> = Vec::new();
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            while i < self.slabs.len() && &self.slabs[i].hi <= lo {
                i += 1;
            }
            while j < other.slabs.len() && &other.slabs[j].hi <= lo {
                j += 1;
            }
            let a = self.slabs.get(i).filter(|s| &s.lo <= lo).and_then(|s| s.inner.as_deref());
            let b = other.slabs.get(j).filter(|s| &s.lo <= lo).and_then(|s| s.inner.as_deref());
            let inner = match (a, b) {
                (None, None) => continue,
                (Some(a), None) => apply_one_sided(a, &empty, op)?,
                (None, Some(b)) => apply_one_sided(&empty, b, op)?,
                (Some(a), Some(b)) => a.combine(b, op)?,
            };
            if inner.is_empty() {
                continue;
            }
            push_merged(&mut out, lo.clone(), hi.clone(), Some(Arc::new(inner)));
        }
        check_cap(out.len())?;
        Ok(RegionSet { dim: self.dim, slabs: out })
    }

    /// Preimage under the product of one-dimensional maps, one per axis.
    pub fn preimage(&self, maps: &[AxisMap]) -> Result<RegionSet> {
        if maps.len() != self.dim {
            return Err(Error::BackendMismatch(format!(
                "{} axis maps for a set of dimension {}",
                maps.len(),
                self.dim
            )));
        }
        let mut pieces: Vec<Slab> = Vec::new();
        for s in &self.slabs {
            let inner = match &s.inner {
                None => None,
                Some(inner) => Some(Arc::new(inner.preimage(&maps[1..])?)),
            };
            for (lo, hi) in interval_preimage(&maps[0], &s.lo, &s.hi)? {
                pieces.push(Slab { lo, hi, inner: inner.clone() });
                if pieces.len() > COMPONENT_CAP {
                    return Err(Error::Capacity(format!("preimage exceeds {COMPONENT_CAP} components")));
                }
            }
        }
        pieces.sort_by(|a, b| a.lo.cmp(&b.lo));
        let mut out: Vec<Slab> = Vec::with_capacity(pieces.len());
        for p in pieces {
            push_merged(&mut out, p.lo, p.hi, p.inner);
        }
        Ok(RegionSet { dim: self.dim, slabs: out })
    }
}

fn check_cap(n: usize) -> Result<()> {
    if n > COMPONENT_CAP {
        Err(Error::Capacity(format!("set would have {n} components (cap {COMPONENT_CAP})")))
    } else {
        Ok(())
    }
}

fn apply_one_sided(a: &RegionSet, b: &RegionSet, op: BoolOp) -> Result<RegionSet> {
    match (op, a.is_empty(), b.is_empty()) {
        (BoolOp::Intersection, _, _) => Ok(RegionSet::empty(a.dim)),
        (BoolOp::Difference, true, _) => Ok(RegionSet::empty(a.dim)),
        (_, true, _) => Ok(b.clone()),
        (_, _, true) => Ok(a.clone()),
        _ => a.combine(b, op),
    }
}

/// Append a slab, merging with the previous one when they touch and carry
/// the same cross-section.
fn push_merged(out: &mut Vec<Slab>, lo: Rational, hi: Rational, inner: Option<Arc<RegionSet>>) {
    if let Some(last) = out.last_mut() {
        if last.hi == lo && last.inner == inner {
            last.hi = hi;
            return;
        }
    }
    out.push(Slab { lo, hi, inner });
}

fn combine_1d(a: &[Slab], b: &[Slab], op: BoolOp) -> Result<RegionSet> {
    // Endpoint sequences of each canonical list are already sorted; merge them.
    let ends_a = a.iter().flat_map(|s| [&s.lo, &s.hi]);
    let ends_b = b.iter().flat_map(|s| [&s.lo, &s.hi]);
    let cuts = merge_sorted(ends_a, ends_b);
    let (mut i, mut j) = (0usize, 0usize);
    let mut out: Vec<Slab> = Vec::new();
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        while i < a.len() && &a[i].hi <= lo {
            i += 1;
        }
        while j < b.len() && &b[j].hi <= lo {
            j += 1;
        }
        let in_a = i < a.len() && &a[i].lo <= lo;
        let in_b = j < b.len() && &b[j].lo <= lo;
        if op.apply(in_a, in_b) {
            push_merged(&mut out, lo.clone(), hi.clone(), None);
        }
    }
    check_cap(out.len())?;
    Ok(RegionSet { dim: 1, slabs: out })
}

fn merge_sorted<'a>(a: impl Iterator<Item = &'a Rational>, b: impl Iterator<Item = &'a Rational>) -> Vec<&'a Rational> {
    let mut a = a.peekable();
    let mut b = b.peekable();
    let mut out: Vec<&Rational> = Vec::new();
    loop {
        let next = match (a.peek(), b.peek()) {
            (None, None) => break,
            (Some(_), None) => a.next(),
            (None, Some(_)) => b.next(),
            (Some(x), Some(y)) => {
                if x <= y {
                    a.next()
                } else {
                    b.next()
                }
            }
        };
        let next = next.expect("peeked");
        if out.last().is_none_or(|last| *last != next) {
            out.push(next);
        }
    }
    out
}

/// Preimage of `[lo, hi)` under a one-dimensional map, as disjoint intervals.
pub fn interval_preimage(map: &AxisMap, lo: &Rational, hi: &Rational) -> Result<Vec<(Rational, Rational)>> {
    match map {
        AxisMap::Identity => Ok(vec![(lo.clone(), hi.clone())]),
        AxisMap::Translate(shift) => {
            // {x : x + s mod 1 in [lo, hi)} = [lo - s, hi - s) mod 1
            let a = (lo - shift).fract_mod1();
            let len = hi - lo;
            let b = &a + &len;
            if b <= Rational::ONE {
                Ok(vec![(a, b)])
            } else {
                let wrap = &b - &Rational::ONE;
                Ok(vec![(Rational::ZERO, wrap), (a, Rational::ONE)])
            }
        }
        AxisMap::Dyadic(power) => {
            if (1usize << (*power).min(40)) > COMPONENT_CAP {
                return Err(Error::Capacity(format!(
                    "dyadic preimage of order {power} exceeds {COMPONENT_CAP} pieces"
                )));
            }
            let scale = Rational::integer(1i64 << power);
            let count = 1i64 << power;
            let mut out = Vec::with_capacity(count as usize);
            for j in 0..count {
                let jj = Rational::integer(j);
                out.push(((lo + &jj) / &scale, (hi + &jj) / &scale));
            }
            Ok(out)
        }
        AxisMap::Odometer { base, steps } => {
            let mut cur = vec![(lo.clone(), hi.clone())];
            let step_map = if *steps >= 0 { OdometerStep::Preimage } else { OdometerStep::Image };
            for _ in 0..steps.unsigned_abs() {
                let mut next = Vec::new();
                for (a, b) in &cur {
                    next.extend(odometer_step(*base, step_map, a, b));
                }
                next.sort();
                cur = merge_intervals(next);
                check_cap(cur.len())?;
            }
            Ok(cur)
        }
    }
}

#[derive(Clone, Copy)]
enum OdometerStep {
    Preimage,
    Image,
}

fn merge_intervals(mut v: Vec<(Rational, Rational)>) -> Vec<(Rational, Rational)> {
    v.sort();
    let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(v.len());
    for (a, b) in v {
        match out.last_mut() {
            Some(last) if a <= last.1 => {
                if b > last.1 {
                    last.1 = b;
                }
            }
            _ => out.push((a, b)),
        }
    }
    out
}

/// One step of the odometer `T`: on `I_k = [1 - b^-k, 1 - b^-(k+1))` it is the
/// translation onto `J_k = [b^-(k+1), b^-k)`. The pieces accumulate at 1 (for
/// `I_k`) and at 0 (for `J_k`); a tail reaching the accumulation point is
/// handled as one block, `T[1 - b^-k, 1) = [0, b^-k)` mod 0.
fn odometer_step(base: u32, dir: OdometerStep, lo: &Rational, hi: &Rational) -> Vec<(Rational, Rational)> {
    let b = Rational::integer(base as i64);
    let one = Rational::ONE;
    let mut out = Vec::new();
    let mut pow = Rational::ONE; // b^-k
    loop {
        let next_pow = &pow / &b; // b^-(k+1)
        let (i_lo, i_hi) = (&one - &pow, &one - &next_pow);
        let (j_lo, j_hi) = (next_pow.clone(), pow.clone());
        match dir {
            OdometerStep::Preimage => {
                if lo.is_zero() && &pow <= hi {
                    out.push((&one - &pow, one.clone()));
                    break;
                }
                if &pow <= lo {
                    break;
                }
                let a = lo.clone().max(j_lo.clone());
                let c = hi.clone().min(j_hi);
                if a < c {
                    let shift = &i_lo - &j_lo;
                    out.push((&a + &shift, &c + &shift));
                }
            }
            OdometerStep::Image => {
                if hi == &one && &i_lo >= lo {
                    out.push((Rational::ZERO, pow.clone()));
                    break;
                }
                if &i_lo >= hi {
                    break;
                }
                let a = lo.clone().max(i_lo.clone());
                let c = hi.clone().min(i_hi);
                if a < c {
                    let shift = &j_lo - &i_lo;
                    out.push((&a + &shift, &c + &shift));
                }
            }
        }
        pow = next_pow;
    }
    out
}

impl fmt::Debug for RegionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RegionSet{}", self)
    }
}

impl fmt::Display for RegionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let boxes = self.boxes();
        if boxes.is_empty() {
            return write!(f, "-");
        }
        let mut first = true;
        for b in boxes {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            let sides: Vec<String> = b.iter().map(|(lo, hi)| format!("{lo}..{hi}")).collect();
            write!(f, "{}", sides.join("*"))?;
        }
        Ok(())
    }
}
