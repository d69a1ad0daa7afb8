//! Følner windows in `ℤ^d`, their defects and temperedness ratios, and the
//! mean metric `d̄_F(x,y) = (1/|F|) Σ_{g∈F} d(gx, gy)` with its sampled
//! covering numbers.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::complexity::{complexity_profile, ComplexityProfile, Solver, TableMode, Verdict};
use crate::dynamics::{BaseMetric, GroupElement, SystemAction};
use crate::error::{Error, Result};
use crate::measure_space::Point;
use crate::partition::Partition;
use crate::rational::Rational;

/// Default number of sample points tried as centers before falling back to
/// uncovered points.
pub const DEFAULT_CANDIDATES: usize = 256;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FolnerSequence {
    pub rank: usize,
    /// `F_1, F_2, …` (stored from index 0).
    pub windows: Vec<Vec<GroupElement>>,
}

/// All points of `[0,n)^d` in lexicographic order.
pub fn box_elements(d: usize, n: usize) -> Vec<GroupElement> {
    let total = n.pow(d as u32);
    (0..total)
        .map(|mut k| {
            let mut g = vec![0i64; d];
            for slot in g.iter_mut().rev() {
                *slot = (k % n) as i64;
                k /= n;
            }
            g
        })
        .collect()
}

impl FolnerSequence {
    /// `F_n = [0, sizes_n)^d`.
    pub fn boxes(d: usize, sizes: &[usize]) -> Result<FolnerSequence> {
        if d == 0 || sizes.is_empty() || sizes[0] == 0 || sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(format!(
                "box sizes must be positive and strictly increasing, got {sizes:?} in dimension {d}"
            )));
        }
        Ok(FolnerSequence { rank: d, windows: sizes.iter().map(|&n| box_elements(d, n)).collect() })
    }

    /// Boxes of side `2^k` for `k` in the given range.
    pub fn dyadic_boxes(d: usize, exponents: std::ops::RangeInclusive<u32>) -> Result<FolnerSequence> {
        let sizes: Vec<usize> = exponents.map(|k| 1usize << k).collect();
        FolnerSequence::boxes(d, &sizes)
    }

    pub fn from_sets(rank: usize, windows: Vec<Vec<GroupElement>>) -> Result<FolnerSequence> {
        if windows.is_empty() || windows.iter().any(|w| w.is_empty() || w.iter().any(|g| g.len() != rank)) {
            return Err(Error::InvalidInput("windows must be nonempty sets of rank-matching elements".into()));
        }
        let windows = windows
            .into_iter()
            .map(|mut w| {
                w.sort();
                w.dedup();
                w
            })
            .collect();
        Ok(FolnerSequence { rank, windows })
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    /// `F_n`, indexed from 1.
    pub fn window(&self, n: usize) -> Result<&[GroupElement]> {
        n.checked_sub(1)
            .and_then(|i| self.windows.get(i))
            .map(Vec::as_slice)
            .ok_or_else(|| Error::InvalidInput(format!("window index {n} outside 1..={}", self.windows.len())))
    }
}

/// `|gF_n Δ F_n| / |F_n|`.
pub fn folner_defect(seq: &FolnerSequence, g: &[i64], n: usize) -> Result<Rational> {
    if g.len() != seq.rank {
        return Err(Error::InvalidInput(format!("element of rank {} for a rank-{} sequence", g.len(), seq.rank)));
    }
    let f = seq.window(n)?;
    let set: HashSet<&[i64]> = f.iter().map(Vec::as_slice).collect();
    let shifted: HashSet<GroupElement> = f.iter().map(|h| h.iter().zip(g).map(|(a, b)| a + b).collect()).collect();
    let only_shifted = shifted.iter().filter(|x| !set.contains(x.as_slice())).count();
    let only_original = f.iter().filter(|x| !shifted.contains(*x)).count();
    Ok(Rational::new((only_shifted + only_original) as i64, f.len() as i64))
}

/// A finite subset of `ℤ^d` stored as runs along the last axis, keyed by the
/// other coordinates.
#[derive(Clone, Default)]
struct RunSet {
    rows: BTreeMap<Vec<i64>, Vec<(i64, i64)>>,
}

impl RunSet {
    fn from_elements(elements: &[GroupElement]) -> RunSet {
        let mut rows: BTreeMap<Vec<i64>, Vec<i64>> = BTreeMap::new();
        for g in elements {
            let (last, prefix) = g.split_last().expect("rank ≥ 1");
            rows.entry(prefix.to_vec()).or_default().push(*last);
        }
        let mut out = RunSet::default();
        for (prefix, mut xs) in rows {
            xs.sort_unstable();
            xs.dedup();
            let runs = out.rows.entry(prefix).or_default();
            for x in xs {
                match runs.last_mut() {
                    Some((_, hi)) if *hi + 1 == x => *hi = x,
                    _ => runs.push((x, x)),
                }
            }
        }
        out
    }

    fn negated(&self) -> RunSet {
        let mut out = RunSet::default();
        for (prefix, runs) in &self.rows {
            let p: Vec<i64> = prefix.iter().map(|x| -x).collect();
            let mut r: Vec<(i64, i64)> = runs.iter().map(|&(lo, hi)| (-hi, -lo)).collect();
            r.reverse();
            out.rows.insert(p, r);
        }
        out
    }

    fn insert_runs(&mut self, prefix: Vec<i64>, mut runs: Vec<(i64, i64)>) {
        let entry = self.rows.entry(prefix).or_default();
        runs.append(entry);
        runs.sort_unstable();
        let mut merged: Vec<(i64, i64)> = Vec::with_capacity(runs.len());
        for (lo, hi) in runs {
            match merged.last_mut() {
                Some((_, h)) if lo <= *h + 1 => *h = (*h).max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        *entry = merged;
    }

    fn union_with(&mut self, other: &RunSet) {
        for (prefix, runs) in &other.rows {
            self.insert_runs(prefix.clone(), runs.clone());
        }
    }

    /// `{a + b : a ∈ self, b ∈ other}`.
    fn sumset(&self, other: &RunSet) -> RunSet {
        let mut pieces: BTreeMap<Vec<i64>, Vec<(i64, i64)>> = BTreeMap::new();
        for (pa, ra) in &self.rows {
            for (pb, rb) in &other.rows {
                let prefix: Vec<i64> = pa.iter().zip(pb).map(|(x, y)| x + y).collect();
                let slot = pieces.entry(prefix).or_default();
                for &(a0, a1) in ra {
                    for &(b0, b1) in rb {
                        slot.push((a0 + b0, a1 + b1));
                    }
                }
            }
        }
        let mut out = RunSet::default();
        for (prefix, runs) in pieces {
            out.insert_runs(prefix, runs);
        }
        out
    }

    fn count(&self) -> usize {
        self.rows.values().flatten().map(|(lo, hi)| (hi - lo + 1) as usize).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TemperedReport {
    /// Largest `n` for which the ratio was computed.
    pub n_checked: usize,
    /// `(n, |∪_{i<n} F_i⁻¹F_n| / |F_n|)` for `2 ≤ n ≤ n_checked`.
    #[serde(serialize_with = "ratios_as_pairs")]
    pub c_values: Vec<(usize, Rational)>,
    pub c_max: Option<Rational>,
}

fn ratios_as_pairs<S: serde::Serializer>(values: &[(usize, Rational)], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(values.len()))?;
    for (n, c) in values {
        seq.serialize_element(&(n, c.numer().to_string(), c.denom().to_string()))?;
    }
    seq.end()
}

/// Exact ratios `|∪_{1≤i<n} F_i⁻¹F_n| / |F_n|`; says nothing about `n > n_checked`.
pub fn temperedness_profile(seq: &FolnerSequence, n_max: usize) -> Result<TemperedReport> {
    let n_max = n_max.min(seq.len());
    let mut inverses = RunSet::default();
    let mut c_values = Vec::new();
    for n in 2..=n_max {
        inverses.union_with(&RunSet::from_elements(seq.window(n - 1)?).negated());
        let f = RunSet::from_elements(seq.window(n)?);
        let size = inverses.sumset(&f).count();
        c_values.push((n, Rational::new(size as i64, f.count() as i64)));
    }
    let c_max = c_values.iter().map(|(_, c)| c.clone()).max();
    Ok(TemperedReport { n_checked: if n_max >= 2 { n_max } else { 0 }, c_values, c_max })
}

/// Orbit of a point over a window, flattened to coordinates (or indices).
fn orbit_features(sys: &SystemAction, window: &[GroupElement], x: &Point) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for g in window {
        match sys.apply(g, x)? {
            Point::Coords(c) => out.extend(c),
            Point::Index(i) => out.push(i as f64),
        }
    }
    Ok(out)
}

fn feature_distance(metric: BaseMetric, dim: usize, a: &[f64], b: &[f64]) -> f64 {
    match metric {
        BaseMetric::Zero => 0.0,
        BaseMetric::Discrete => f64::from(u8::from(a != b)),
        BaseMetric::Circle | BaseMetric::TorusMax => a
            .iter()
            .zip(b)
            .take(dim)
            .map(|(s, t)| {
                let d = (s - t).abs();
                let d = if d < 1.0 { d } else { d.rem_euclid(1.0) };
                d.min(1.0 - d)
            })
            .fold(0.0, f64::max),
    }
}

/// `d̄_F(x,y)`. Isometric systems return `d(x,y)` directly.
pub fn mean_metric(
    sys: &SystemAction,
    metric: BaseMetric,
    window: &[GroupElement],
    x: &Point,
    y: &Point,
) -> Result<f64> {
    if window.is_empty() {
        return Err(Error::InvalidInput("empty window".into()));
    }
    if sys.is_isometry() && metric == sys.default_metric() {
        sys.apply(&window[0], x)?;
        return Ok(metric.distance(x, y));
    }
    let total: f64 = window
        .iter()
        .map(|g| Ok(metric.distance(&sys.apply(g, x)?, &sys.apply(g, y)?)))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .sum();
    Ok(total / window.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricCoverEntry {
    /// `|F|`.
    pub n: usize,
    /// Upper bound on the sampled-measure covering number (centers are sample points).
    pub cover_size: usize,
    pub covered_mass: f64,
    pub samples: usize,
    /// Centers taken beyond the initial candidate pool.
    pub fallback_centers: usize,
}

/// Greedy `C_d(F,ε)` on the empirical measure of `points`.
///
/// The first `candidates` points are tried as centers; if their balls cannot
/// reach mass `> 1 − ε`, uncovered points are added as centers in order.
pub fn metric_covering_on_points(
    sys: &SystemAction,
    metric: BaseMetric,
    window: &[GroupElement],
    eps: f64,
    points: &[Point],
    candidates: usize,
) -> Result<MetricCoverEntry> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput(format!("ε must lie in (0,1), got {eps}")));
    }
    if points.is_empty() || window.is_empty() {
        return Err(Error::InvalidInput("need sample points and a nonempty window".into()));
    }
    let n = points.len();
    let shortcut = sys.is_isometry() && metric == sys.default_metric();
    let eff_window: &[GroupElement] = if shortcut { &window[..1] } else { window };
    let dim = match &points[0] {
        Point::Coords(c) => c.len(),
        Point::Index(_) => 1,
    };
    let base_features: Vec<Vec<f64>> = if shortcut {
        points
            .iter()
            .map(|p| match p {
                Point::Coords(c) => c.clone(),
                Point::Index(i) => vec![*i as f64],
            })
            .collect()
    } else {
        points.par_iter().map(|p| orbit_features(sys, eff_window, p)).collect::<Result<Vec<_>>>()?
    };
    let steps = eff_window.len();
    let budget = eps * steps as f64;
    // On the circle with an isometry, balls are arcs: sort once and index
    // points by rank so every ball is one or two contiguous ranges.
    let arcs = shortcut && dim == 1 && metric == BaseMetric::Circle;
    let mut order: Vec<usize> = (0..n).collect();
    if arcs {
        order.sort_by(|&a, &b| base_features[a][0].total_cmp(&base_features[b][0]));
    }
    let base_features: Vec<Vec<f64>> = order.iter().map(|&i| base_features[i].clone()).collect();
    let positions: Vec<f64> = if arcs { base_features.iter().map(|f| f[0]).collect() } else { Vec::new() };
    let mut rank = vec![0usize; n];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let words = n.div_ceil(64);
    let set_range = |bits: &mut [u64], lo: usize, hi: usize| {
        for y in lo..hi {
            bits[y / 64] |= 1 << (y % 64);
        }
    };
    let ball = |c: usize| -> Vec<u64> {
        let fc = &base_features[c];
        let mut bits = vec![0u64; words];
        if arcs {
            let x = positions[c];
            let first = positions.partition_point(|&y| y <= x - eps);
            let last = positions.partition_point(|&y| y < x + eps);
            set_range(&mut bits, first, last);
            if x - eps < 0.0 {
                set_range(&mut bits, positions.partition_point(|&y| y <= x - eps + 1.0), n);
            }
            if x + eps > 1.0 {
                set_range(&mut bits, 0, positions.partition_point(|&y| y < x + eps - 1.0));
            }
            for y in first.saturating_sub(2)..(last + 2).min(n) {
                let inside = feature_distance(metric, 1, fc, &base_features[y]) < eps;
                if inside {
                    bits[y / 64] |= 1 << (y % 64);
                } else {
                    bits[y / 64] &= !(1 << (y % 64));
                }
            }
            return bits;
        }
        for (y, fy) in base_features.iter().enumerate() {
            let mut sum = 0.0;
            let mut inside = true;
            for s in 0..steps {
                sum += feature_distance(metric, dim, &fc[s * dim..(s + 1) * dim], &fy[s * dim..(s + 1) * dim]);
                if sum >= budget {
                    inside = false;
                    break;
                }
            }
            if inside {
                bits[y / 64] |= 1 << (y % 64);
            }
        }
        bits
    };
    let eps_q = Rational::simplest_from_f64(eps).expect("finite");
    // covered/n > 1 − ε
    let enough = |covered: usize| Rational::new(covered as i64, n as i64) > &Rational::ONE - &eps_q;
    let pool = candidates.clamp(1, n);
    let balls: Vec<Vec<u64>> = (0..pool).into_par_iter().map(|c| ball(rank[c])).collect();
    let mut covered = vec![0u64; words];
    let mut count = 0usize;
    let mut size = 0usize;
    let gain =
        |b: &[u64], covered: &[u64]| b.iter().zip(covered).map(|(x, c)| (x & !c).count_ones() as usize).sum::<usize>();
    // Lazy greedy: stored gains only overestimate.
    let mut heap: BinaryHeap<(usize, Reverse<usize>)> =
        (0..pool).map(|c| (gain(&balls[c], &covered), Reverse(c))).collect();
    while !enough(count) {
        let Some((stale, Reverse(c))) = heap.pop() else { break };
        let fresh = gain(&balls[c], &covered);
        if fresh == 0 {
            continue;
        }
        if fresh < stale {
            heap.push((fresh, Reverse(c)));
            continue;
        }
        for (w, b) in covered.iter_mut().zip(&balls[c]) {
            *w |= b;
        }
        count += fresh;
        size += 1;
    }
    let mut fallback = 0usize;
    let mut next = 0usize;
    while !enough(count) {
        while covered[next / 64] & (1 << (next % 64)) != 0 {
            next += 1;
        }
        let b = ball(next);
        count += gain(&b, &covered);
        for (w, x) in covered.iter_mut().zip(&b) {
            *w |= x;
        }
        size += 1;
        fallback += 1;
    }
    Ok(MetricCoverEntry {
        n: window.len(),
        cover_size: size,
        covered_mass: count as f64 / n as f64,
        samples: n,
        fallback_centers: fallback,
    })
}

/// `C_d(F,ε)` with centers restricted to `samples` points drawn with `seed`.
pub fn metric_covering_number(
    sys: &SystemAction,
    metric: BaseMetric,
    window: &[GroupElement],
    eps: f64,
    samples: usize,
    seed: u64,
) -> Result<MetricCoverEntry> {
    let points = sys.space().sample_points(samples, seed)?;
    metric_covering_on_points(sys, metric, window, eps, &points, DEFAULT_CANDIDATES)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricProfile {
    pub epsilon: f64,
    pub entries: Vec<MetricCoverEntry>,
    pub verdict: Verdict,
}

pub fn metric_profile(
    sys: &SystemAction,
    metric: BaseMetric,
    seq: &FolnerSequence,
    eps: f64,
    samples: usize,
    seed: u64,
) -> Result<MetricProfile> {
    let points = sys.space().sample_points(samples, seed)?;
    let entries = seq
        .windows
        .iter()
        .map(|w| metric_covering_on_points(sys, metric, w, eps, &points, DEFAULT_CANDIDATES))
        .collect::<Result<Vec<_>>>()?;
    let sizes: Vec<usize> = entries.iter().map(|e| e.cover_size).collect();
    Ok(MetricProfile { epsilon: eps, verdict: Verdict::of_sizes(&sizes), entries })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrosscheckReport {
    pub partition: ComplexityProfile,
    pub metric: MetricProfile,
    /// Both bounded or both growing.
    pub agree: bool,
}

/// Compares the partition profile `C({g⁻¹α : g ∈ F_n}, ε)` with the metric
/// profile `C_d(F_n, ε)` on the same windows. Disagreement is reported, not
/// treated as an error.
#[allow(clippy::too_many_arguments)]
pub fn profile_crosscheck(
    alpha: &Partition,
    sys: &SystemAction,
    metric: BaseMetric,
    seq: &FolnerSequence,
    eps: f64,
    mode: TableMode,
    samples: usize,
    seed: u64,
) -> Result<CrosscheckReport> {
    let partition = complexity_profile(alpha, sys, &seq.windows, eps, Solver::Greedy, mode)?;
    let metric = metric_profile(sys, metric, seq, eps, samples, seed)?;
    let agree = partition.verdict == metric.verdict && partition.verdict != Verdict::Inconclusive;
    Ok(CrosscheckReport { partition, metric, agree })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boxes_and_defects() {
        let s = FolnerSequence::boxes(1, &[1, 2, 4]).unwrap();
        assert_eq!(s.windows[2], vec![vec![0], vec![1], vec![2], vec![3]]);
        let s2 = FolnerSequence::boxes(2, &[3]).unwrap();
        assert_eq!(s2.windows[0].len(), 9);
        assert_eq!(folner_defect(&s, &[0], 3).unwrap(), Rational::ZERO);
        assert_eq!(folner_defect(&s, &[1], 3).unwrap(), Rational::new(2, 4));
        let s2 = FolnerSequence::boxes(2, &[5]).unwrap();
        assert_eq!(folner_defect(&s2, &[1, 0], 1).unwrap(), Rational::new(2, 5));
        assert!(FolnerSequence::boxes(1, &[2, 2]).is_err());
    }

    #[test]
    fn integer_box_temperedness() {
        let sizes: Vec<usize> = (1..=50).collect();
        let s = FolnerSequence::boxes(1, &sizes).unwrap();
        let rep = temperedness_profile(&s, 50).unwrap();
        for (n, c) in &rep.c_values {
            assert_eq!(*c, Rational::new(2 * *n as i64 - 2, *n as i64));
        }
        let single = FolnerSequence::boxes(1, &[3]).unwrap();
        assert!(temperedness_profile(&single, 5).unwrap().c_values.is_empty());
    }

    #[test]
    fn rotation_mean_metric_is_isometric() {
        let sys = SystemAction::golden_rotation();
        let w = box_elements(1, 10);
        let (x, y) = (Point::Coords(vec![0.1]), Point::Coords(vec![0.95]));
        let d = mean_metric(&sys, BaseMetric::Circle, &w, &x, &y).unwrap();
        assert_eq!(d, BaseMetric::Circle.distance(&x, &y));
        assert_eq!(mean_metric(&sys, BaseMetric::Circle, &w, &x, &x).unwrap(), 0.0);
    }

    #[test]
    fn doubling_mean_metric_separates() {
        let sys = SystemAction::doubling();
        let (x, y) = (Point::Coords(vec![0.0]), Point::Coords(vec![1.0 / 64.0]));
        let short = mean_metric(&sys, BaseMetric::Circle, &box_elements(1, 1), &x, &y).unwrap();
        let long = mean_metric(&sys, BaseMetric::Circle, &box_elements(1, 6), &x, &y).unwrap();
        assert!(long > short);
    }
}
