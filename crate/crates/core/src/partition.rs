//! Finite measurable partitions: entropy, joins, the Rokhlin metric `ρ` and
//! the matching metric `ρ̃`.

use std::fmt::Write as _;

use crate::assignment::min_cost_assignment;
use crate::error::{Error, Result};
use crate::join::{entropy_of_masses, Refiner};
use crate::measure_space::{neumaier_sum, MeasurableSet, MeasureSpace, PointSet, SpaceKind};
use crate::rational::Rational;
use crate::region::RegionSet;

/// Tolerance for `Σ μ(atom) = 1`.
pub const MASS_TOL: f64 = 1e-12;
/// `α ⪰ β` is decided by `H(β|α) ≤ REFINEMENT_TOL`.
pub const REFINEMENT_TOL: f64 = 1e-10;
/// Largest atom count accepted by [`matching_distance`].
pub const MATCHING_MAX_ATOMS: usize = 64;

#[derive(Clone)]
pub struct Partition {
    space: MeasureSpace,
    atoms: Vec<MeasurableSet>,
    masses: Vec<f64>,
    exact: Option<Vec<Rational>>,
}

impl Partition {
    /// Validates disjointness and total mass.
    pub fn new(space: &MeasureSpace, atoms: Vec<MeasurableSet>) -> Result<Partition> {
        if atoms.is_empty() {
            return Err(Error::InvalidInput("a partition needs at least one atom".into()));
        }
        for a in &atoms {
            space.check_set(a)?;
        }
        check_disjoint(&atoms)?;
        let p = Partition::new_unchecked(space, atoms);
        let total: f64 = p.masses.iter().sum();
        let covers = match &p.exact {
            Some(ex) => ex.iter().sum::<Rational>() == Rational::ONE,
            None => (total - 1.0).abs() <= MASS_TOL,
        };
        if !covers {
            return Err(Error::InvalidInput(format!("atoms cover mass {total}, not 1")));
        }
        Ok(p)
    }

    pub(crate) fn new_unchecked(space: &MeasureSpace, atoms: Vec<MeasurableSet>) -> Partition {
        let exact: Option<Vec<Rational>> = atoms.iter().map(|a| space.measure_exact(a).ok().flatten()).collect();
        let masses = match &exact {
            Some(ex) => ex.iter().map(Rational::to_f64).collect(),
            None => atoms.iter().map(|a| space.measure(a).unwrap_or(0.0)).collect(),
        };
        Partition { space: space.clone(), atoms, masses, exact }
    }

    /// `{X}`.
    pub fn trivial(space: &MeasureSpace) -> Partition {
        Partition::new_unchecked(space, vec![space.full_set()])
    }

    /// Interval partition `[c_0,c_1), [c_1,c_2), …` with `c_0 = 0` and a final cut at 1.
    pub fn from_cuts(cuts: &[Rational]) -> Result<Partition> {
        let mut points = vec![Rational::ZERO];
        points.extend(cuts.iter().cloned());
        points.push(Rational::ONE);
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("cuts must be strictly increasing inside (0,1)".into()));
        }
        let atoms = points
            .windows(2)
            .map(|w| MeasurableSet::interval(w[0].clone(), w[1].clone()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Partition::new_unchecked(&MeasureSpace::interval(), atoms))
    }

    /// Interval partition whose atom `i` is the union of the listed intervals.
    pub fn from_interval_atoms(atoms: Vec<Vec<(Rational, Rational)>>) -> Result<Partition> {
        let sets = atoms.into_iter().map(MeasurableSet::intervals).collect::<Result<Vec<_>>>()?;
        Partition::new(&MeasureSpace::interval(), sets)
    }

    /// Point partition with point `k` in atom `labels[k]`; atom count is
    /// `max(label) + 1`.
    pub fn from_labels(space: &MeasureSpace, labels: &[usize]) -> Result<Partition> {
        let n = space.point_count().ok_or_else(|| Error::BackendMismatch("labels need a point space".into()))?;
        if labels.len() != n {
            return Err(Error::InvalidInput(format!("{} labels for {n} points", labels.len())));
        }
        let r = labels.iter().max().map_or(1, |m| m + 1);
        let mut sets = vec![PointSet::empty(n); r];
        for (k, &l) in labels.iter().enumerate() {
            sets[l].insert(k);
        }
        Ok(Partition::new_unchecked(space, sets.into_iter().map(MeasurableSet::Points).collect()))
    }

    pub fn space(&self) -> &MeasureSpace {
        &self.space
    }

    pub fn atoms(&self) -> &[MeasurableSet] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn masses_exact(&self) -> Option<&[Rational]> {
        self.exact.as_deref()
    }

    /// Number of atoms of positive measure.
    pub fn support_size(&self) -> usize {
        self.masses.iter().filter(|m| **m > 0.0).count()
    }

    /// Pads with empty atoms up to `r` atoms.
    pub fn padded(&self, r: usize) -> Partition {
        let mut p = self.clone();
        while p.atoms.len() < r {
            p.atoms.push(self.space.empty_set());
            p.masses.push(0.0);
            if let Some(ex) = &mut p.exact {
                ex.push(Rational::ZERO);
            }
        }
        p
    }

    /// Same partition with atoms reordered: atom `i` of the result is atom `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Partition> {
        let mut seen = vec![false; self.len()];
        if order.len() != self.len() || order.iter().any(|&i| i >= self.len() || std::mem::replace(&mut seen[i], true))
        {
            return Err(Error::InvalidInput("not a permutation of the atoms".into()));
        }
        let atoms = order.iter().map(|&i| self.atoms[i].clone()).collect();
        Ok(Partition::new_unchecked(&self.space, atoms))
    }

    /// Index of the atom containing the point, if any.
    pub fn atom_of(&self, point: &crate::measure_space::Point) -> Option<usize> {
        self.atoms.iter().position(|a| a.contains(point))
    }

    pub fn entropy(&self) -> f64 {
        entropy_of_masses(&self.masses)
    }

    /// Serializes to the line format read by [`Partition::from_text`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let header = match self.space.kind() {
            SpaceKind::WeightedPoints { weights, .. } => format!("points:{}", weights.len()),
            SpaceKind::Boxes { dim: 1 } => "interval".to_string(),
            SpaceKind::Boxes { dim } => format!("torus:{dim}"),
        };
        let _ = writeln!(out, "partition {header} {}", self.len());
        for atom in &self.atoms {
            match atom {
                MeasurableSet::Points(p) if p.is_empty() => out.push('-'),
                MeasurableSet::Points(p) => {
                    let idx: Vec<String> = p.iter().map(|i| i.to_string()).collect();
                    out.push_str(&idx.join(" "));
                }
                MeasurableSet::Region(r) => {
                    let _ = write!(out, "{r}");
                }
            }
            out.push('\n');
        }
        out
    }

    /// Parses the line format. The header must agree with `space`.
    pub fn from_text(text: &str, space: &MeasureSpace) -> Result<Partition> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty partition text".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 || fields[0] != "partition" {
            return Err(Error::Parse(format!("bad header {header:?}")));
        }
        let r: usize = fields[2].parse().map_err(|_| Error::Parse(format!("bad atom count {:?}", fields[2])))?;
        let expected = match space.kind() {
            SpaceKind::WeightedPoints { weights, .. } => format!("points:{}", weights.len()),
            SpaceKind::Boxes { dim: 1 } => "interval".to_string(),
            SpaceKind::Boxes { dim } => format!("torus:{dim}"),
        };
        if fields[1] != expected {
            return Err(Error::BackendMismatch(format!("text is {}, space is {expected}", fields[1])));
        }
        let mut atoms = Vec::with_capacity(r);
        for line in lines {
            let line = line.trim();
            let atom = match space.kind() {
                SpaceKind::WeightedPoints { weights, .. } => {
                    let idx = if line == "-" {
                        Vec::new()
                    } else {
                        line.split_whitespace()
                            .map(|t| t.parse::<usize>().map_err(|_| Error::Parse(format!("bad index {t:?}"))))
                            .collect::<Result<Vec<_>>>()?
                    };
                    MeasurableSet::points(weights.len(), idx)?
                }
                SpaceKind::Boxes { dim } => MeasurableSet::Region(parse_region(line, *dim)?),
            };
            atoms.push(atom);
        }
        if atoms.len() != r {
            return Err(Error::Parse(format!("header says {r} atoms, found {}", atoms.len())));
        }
        Partition::new(space, atoms)
    }
}

impl std::fmt::Debug for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

fn parse_region(line: &str, dim: usize) -> Result<RegionSet> {
    if line == "-" {
        return Ok(RegionSet::empty(dim));
    }
    let mut boxes = Vec::new();
    for token in line.split_whitespace() {
        let sides = token
            .split('*')
            .map(|side| {
                let (lo, hi) = side.split_once("..").ok_or_else(|| Error::Parse(format!("bad interval {side:?}")))?;
                let parse = |s: &str| s.parse::<Rational>().map_err(|e| Error::Parse(e.0));
                Ok((parse(lo)?, parse(hi)?))
            })
            .collect::<Result<Vec<_>>>()?;
        if sides.len() != dim {
            return Err(Error::Parse(format!("box {token:?} is not {dim}-dimensional")));
        }
        boxes.push(sides);
    }
    RegionSet::from_boxes(dim, &boxes)
}

fn check_disjoint(atoms: &[MeasurableSet]) -> Result<()> {
    let overlap = || Error::InvalidInput("atoms are not pairwise disjoint".into());
    match &atoms[0] {
        MeasurableSet::Points(first) => {
            let mut seen = PointSet::empty(first.len());
            for a in atoms {
                let p = a.as_points().expect("checked by space");
                for i in p.iter() {
                    if seen.contains(i) {
                        return Err(overlap());
                    }
                    seen.insert(i);
                }
            }
        }
        MeasurableSet::Region(r) if r.dim() == 1 => {
            let mut all: Vec<(&Rational, &Rational)> =
                atoms.iter().flat_map(|a| a.as_region().expect("checked by space").intervals()).collect();
            all.sort();
            if all.windows(2).any(|w| w[0].1 > w[1].0) {
                return Err(overlap());
            }
        }
        MeasurableSet::Region(_) => {
            for i in 0..atoms.len() {
                for j in i + 1..atoms.len() {
                    if !atoms[i].intersection(&atoms[j])?.is_empty() {
                        return Err(overlap());
                    }
                }
            }
        }
    }
    Ok(())
}

/// Joint masses `μ(A_i ∩ B_j)`, row-major `rows × cols`.
pub struct JointMasses {
    pub rows: usize,
    pub cols: usize,
    pub mass: Vec<f64>,
    pub exact: Option<Vec<Rational>>,
}

impl JointMasses {
    pub fn compute(alpha: &Partition, beta: &Partition) -> Result<JointMasses> {
        alpha.space.check_same(&beta.space)?;
        let refiner = Refiner::from_partitions(&alpha.space, [alpha, beta], true)?;
        let names = refiner.names().expect("names tracked");
        let (rows, cols) = (alpha.len(), beta.len());
        let mut mass = vec![0.0; rows * cols];
        let weights = refiner.weights();
        let exact_w = refiner.weights_exact();
        let mut exact = exact_w.as_ref().map(|_| vec![Rational::ZERO; rows * cols]);
        for c in 0..refiner.cell_count() {
            let (i, j) = (names[2 * c] as usize, names[2 * c + 1] as usize);
            if i >= rows || j >= cols {
                // cell outside every atom of one partition: a null set for valid partitions
                continue;
            }
            mass[i * cols + j] += weights[c];
            if let (Some(ex), Some(w)) = (&mut exact, &exact_w) {
                ex[i * cols + j] = &ex[i * cols + j] + &w[c];
            }
        }
        Ok(JointMasses { rows, cols, mass, exact })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.mass[i * self.cols + j]
    }

    /// `H(row partition | column partition)`.
    pub fn conditional_rows_given_cols(&self) -> f64 {
        let mut terms = Vec::with_capacity(self.mass.len());
        for j in 0..self.cols {
            let q: f64 = (0..self.rows).map(|i| self.get(i, j)).sum();
            if q <= 0.0 {
                continue;
            }
            for i in 0..self.rows {
                let p = self.get(i, j);
                if p > 0.0 {
                    terms.push(-p * (p / q).ln());
                }
            }
        }
        neumaier_sum(terms).max(0.0)
    }

    pub fn transposed(&self) -> JointMasses {
        let mut mass = vec![0.0; self.mass.len()];
        let mut exact = self.exact.as_ref().map(|_| vec![Rational::ZERO; self.mass.len()]);
        for i in 0..self.rows {
            for j in 0..self.cols {
                mass[j * self.rows + i] = self.mass[i * self.cols + j];
                if let (Some(e), Some(src)) = (&mut exact, &self.exact) {
                    e[j * self.rows + i] = src[i * self.cols + j].clone();
                }
            }
        }
        JointMasses { rows: self.cols, cols: self.rows, mass, exact }
    }
}

/// `H(α|β)`.
pub fn conditional_entropy(alpha: &Partition, beta: &Partition) -> Result<f64> {
    Ok(JointMasses::compute(alpha, beta)?.conditional_rows_given_cols())
}

/// `α ∨ β`, atoms ordered lexicographically by `(i, j)`; empty intersections dropped.
pub fn join(alpha: &Partition, beta: &Partition) -> Result<Partition> {
    join_all([alpha, beta])
}

/// Join of a nonempty family.
pub fn join_all<'a>(parts: impl IntoIterator<Item = &'a Partition>) -> Result<Partition> {
    let parts: Vec<&Partition> = parts.into_iter().collect();
    let first = parts.first().ok_or_else(|| Error::InvalidInput("join of an empty family".into()))?;
    let refiner = Refiner::from_partitions(&first.space, parts.iter().copied(), true)?;
    let depth = refiner.depth();
    let names = refiner.names().expect("names tracked");
    let sets = refiner.cell_sets()?;
    let mut order: Vec<usize> = (0..sets.len()).collect();
    order.sort_by(|&a, &b| names[a * depth..(a + 1) * depth].cmp(&names[b * depth..(b + 1) * depth]));
    let mut sets: Vec<Option<MeasurableSet>> = sets.into_iter().map(Some).collect();
    let atoms = order.iter().map(|&c| sets[c].take().expect("each cell once")).collect();
    Ok(Partition::new_unchecked(&first.space, atoms))
}

/// Entropy of the join of a family without materializing its atoms.
pub fn join_entropy<'a>(space: &MeasureSpace, parts: impl IntoIterator<Item = &'a Partition>) -> Result<f64> {
    Ok(Refiner::from_partitions(space, parts, false)?.entropy())
}

/// `α ⪰ β`: every atom of `β` is a union of atoms of `α` up to measure zero.
pub fn is_finer(alpha: &Partition, beta: &Partition) -> Result<bool> {
    Ok(conditional_entropy(beta, alpha)? <= REFINEMENT_TOL)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricReport {
    pub rho: f64,
    pub rho_tilde: f64,
    /// `ρ̃` in exact arithmetic where the backend has exact measures.
    pub rho_tilde_exact: Option<Rational>,
    /// Atom `i` of the first (padded) partition is matched with atom
    /// `witness_permutation[i]` of the second.
    pub witness_permutation: Vec<usize>,
}

/// `ρ(α,β) = H(α|β) + H(β|α)`.
pub fn rokhlin_distance(alpha: &Partition, beta: &Partition) -> Result<f64> {
    let joint = JointMasses::compute(alpha, beta)?;
    Ok(joint.conditional_rows_given_cols() + joint.transposed().conditional_rows_given_cols())
}

/// Float costs and, where available, exact costs.
pub type CostMatrices = (Vec<Vec<f64>>, Option<Vec<Vec<Rational>>>);

/// The matching cost matrix `μ(A_i Δ B_j)` after padding both to a common size.
fn matching_costs(alpha: &Partition, beta: &Partition) -> Result<CostMatrices> {
    let r = alpha.len().max(beta.len());
    if r > MATCHING_MAX_ATOMS {
        return Err(Error::Capacity(format!("matching distance supports at most {MATCHING_MAX_ATOMS} atoms, got {r}")));
    }
    let (a, b) = (alpha.padded(r), beta.padded(r));
    let joint = JointMasses::compute(&a, &b)?;
    let float = (0..r)
        .map(|i| (0..r).map(|j| (a.masses[i] + b.masses[j] - 2.0 * joint.get(i, j)).max(0.0)).collect())
        .collect();
    let exact = match (&a.exact, &b.exact, &joint.exact) {
        (Some(ma), Some(mb), Some(pj)) => Some(
            (0..r)
                .map(|i| {
                    (0..r)
                        .map(|j| {
                            let two_p = &pj[i * r + j] + &pj[i * r + j];
                            &(&ma[i] + &mb[j]) - &two_p
                        })
                        .collect()
                })
                .collect(),
        ),
        _ => None,
    };
    Ok((float, exact))
}

/// `ρ̃(α,β) = min_σ Σ μ(A_i Δ B_σ(i))` over both partitions padded to a common size.
pub fn matching_distance(alpha: &Partition, beta: &Partition) -> Result<MetricReport> {
    let (float, exact) = matching_costs(alpha, beta)?;
    let (rho_tilde, rho_tilde_exact, perm) = match exact {
        Some(costs) => {
            let (total, perm) = min_cost_assignment(&costs);
            (total.to_f64(), Some(total), perm)
        }
        None => {
            let (total, perm) = min_cost_assignment(&float);
            (total, None, perm)
        }
    };
    Ok(MetricReport { rho: rokhlin_distance(alpha, beta)?, rho_tilde, rho_tilde_exact, witness_permutation: perm })
}

/// Cost matrices used by [`matching_distance`], exposed for oracle checks.
pub fn matching_cost_matrix(alpha: &Partition, beta: &Partition) -> Result<CostMatrices> {
    matching_costs(alpha, beta)
}

/// Constants of the conditional-entropy refinement construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefinementConstants {
    pub a: f64,
    pub b: f64,
    pub c: u64,
    pub delta: f64,
}

fn neg_x_log_x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.ln()
    }
}

/// Root of `f` on `[lo, hi]` where `f(lo)` and `f(hi)` differ in sign.
fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let f_lo_neg = f(lo) < 0.0;
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == f_lo_neg {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn refinement_constants(eps: f64, r: usize) -> Result<RefinementConstants> {
    if !(eps > 0.0 && eps < 1.0) || r == 0 {
        return Err(Error::InvalidInput(format!("need ε in (0,1) and r ≥ 1, got ε={eps}, r={r}")));
    }
    let inv_e = (-1.0f64).exp();
    let a0 = bisect(1e-300, inv_e, |x| neg_x_log_x(x) - std::f64::consts::LN_2 / 2.0);
    let rf = r as f64;
    let a = (1.0 / (2.0 * rf)).min(eps / (4.0 * rf * rf)).min(inv_e).min(a0);
    let target = neg_x_log_x(a);
    let b = bisect(inv_e.max(0.5), 1.0, |x| neg_x_log_x(x) - target);
    let eps_q = Rational::simplest_from_f64(eps).expect("finite ε");
    let ratio = &Rational::integer(2 * (r as i64 + 1)) / &eps_q;
    let c = (-(-ratio).floor()).to_f64() as u64 + 1;
    Ok(RefinementConstants { a, b, c, delta: target / (2.0 * c as f64) })
}

/// Coarsens `β` to `β′ ⪯ β` with `r+1` atoms close to `α ∪ {∅}` in `ρ̃`.
///
/// Atom `i < r` of `β′` collects the atoms `B_j` with small `H(α|B_j)` whose
/// conditional mass on `A_i` exceeds `b`; the last atom collects the rest,
/// including null atoms of `β`.
pub fn refine_from_conditional(alpha: &Partition, beta: &Partition, eps: f64) -> Result<Partition> {
    let r = alpha.len();
    let k = refinement_constants(eps, r)?;
    let joint = JointMasses::compute(alpha, beta)?;
    let h = joint.conditional_rows_given_cols();
    if h >= k.delta {
        return Err(Error::Precondition(format!("H(α|β) = {h} is not below δ = {}", k.delta)));
    }
    let space = &alpha.space;
    let mut groups: Vec<MeasurableSet> = vec![space.empty_set(); r + 1];
    let threshold = k.c as f64 * k.delta;
    for j in 0..beta.len() {
        let q: f64 = (0..r).map(|i| joint.get(i, j)).sum();
        let mut target = r;
        if q > 0.0 {
            let cond: Vec<f64> = (0..r).map(|i| joint.get(i, j) / q).collect();
            let h_j = neumaier_sum(cond.iter().map(|&p| neg_x_log_x(p)));
            if h_j < threshold {
                if let Some(i) = cond.iter().position(|&p| p > k.b) {
                    target = i;
                }
            }
        }
        groups[target] = groups[target].union(&beta.atoms[j])?;
    }
    let result = Partition::new_unchecked(space, groups);
    let d = matching_distance(&alpha.padded(r + 1), &result)?;
    if d.rho_tilde >= eps {
        return Err(Error::Postcondition(format!("ρ̃(α ∪ {{∅}}, β′) = {} is not below ε = {eps}", d.rho_tilde)));
    }
    Ok(result)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartitionMetric {
    Rho,
    RhoTilde,
}

pub fn distance(alpha: &Partition, beta: &Partition, metric: PartitionMetric) -> Result<f64> {
    match metric {
        PartitionMetric::Rho => rokhlin_distance(alpha, beta),
        PartitionMetric::RhoTilde => Ok(matching_distance(alpha, beta)?.rho_tilde),
    }
}

/// Pairwise distance matrix of a family.
pub fn distance_matrix(family: &[Partition], metric: PartitionMetric) -> Result<Vec<Vec<f64>>> {
    let n = family.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = distance(&family[i], &family[j], metric)?;
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    Ok(d)
}

/// Size of a greedy `ε`-net of `family` with centers taken from the family:
/// every member lies within distance `≤ ε` of a chosen center.
pub fn epsilon_net_size(family: &[Partition], eps: f64, metric: PartitionMetric) -> Result<usize> {
    if family.is_empty() {
        return Err(Error::InvalidInput("empty family".into()));
    }
    if eps <= 0.0 {
        return Err(Error::InvalidInput(format!("ε must be positive, got {eps}")));
    }
    let d = distance_matrix(family, metric)?;
    Ok(greedy_net(&d, eps).len())
}

/// Greedy net on a distance matrix; returns the chosen center indices.
pub fn greedy_net(d: &[Vec<f64>], eps: f64) -> Vec<usize> {
    let n = d.len();
    let mut covered = vec![false; n];
    let mut centers = Vec::new();
    while covered.iter().any(|c| !c) {
        let gain = |c: usize| (0..n).filter(|&k| !covered[k] && d[c][k] <= eps).count();
        let best = (0..n).max_by_key(|&c| (gain(c), std::cmp::Reverse(c))).expect("nonempty");
        for k in 0..n {
            if d[best][k] <= eps {
                covered[k] = true;
            }
        }
        centers.push(best);
    }
    centers
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn entropy_examples() {
        let half = Partition::from_cuts(&[q(1, 2)]).unwrap();
        assert!((half.entropy() - std::f64::consts::LN_2).abs() < 1e-12);
        let quarter = Partition::from_cuts(&[q(1, 4)]).unwrap();
        assert!((quarter.entropy() - 0.5623).abs() < 1e-4);
        let space = MeasureSpace::interval();
        let with_empty = Partition::new(&space, vec![space.full_set(), space.empty_set()]).unwrap();
        assert_eq!(with_empty.entropy(), 0.0);
    }

    #[test]
    fn independent_points() {
        let space = MeasureSpace::uniform_points(4).unwrap();
        let a = Partition::from_labels(&space, &[0, 0, 1, 1]).unwrap();
        let b = Partition::from_labels(&space, &[0, 1, 0, 1]).unwrap();
        assert!((conditional_entropy(&a, &b).unwrap() - std::f64::consts::LN_2).abs() < 1e-12);
        let j = join(&a, &b).unwrap();
        assert_eq!(j.len(), 4);
        assert!(j.masses().iter().all(|m| (m - 0.25).abs() < 1e-15));
        assert!(is_finer(&j, &b).unwrap());
        assert!(!is_finer(&b, &j).unwrap());
    }

    #[test]
    fn dyadic_nesting() {
        let l3 = Partition::from_cuts(&(1..8).map(|k| q(k, 8)).collect::<Vec<_>>()).unwrap();
        let l2 = Partition::from_cuts(&[q(1, 4), q(1, 2), q(3, 4)]).unwrap();
        assert!(is_finer(&l3, &l2).unwrap());
        assert!(!is_finer(&l2, &l3).unwrap());
    }

    #[test]
    fn overlapping_atoms_rejected() {
        let r = Partition::from_interval_atoms(vec![vec![(q(0, 1), q(2, 3))], vec![(q(1, 3), q(1, 1))]]);
        assert!(r.is_err());
        let short = Partition::from_interval_atoms(vec![vec![(q(0, 1), q(1, 3))]]);
        assert!(short.is_err());
    }

    #[test]
    fn matching_two_atoms() {
        let a = Partition::from_cuts(&[q(1, 2)]).unwrap();
        let b = Partition::from_cuts(&[q(1, 3)]).unwrap();
        let rep = matching_distance(&a, &b).unwrap();
        // μ(AΔB) = 1/6, μ(AΔB^c) = 5/6
        assert_eq!(rep.rho_tilde_exact, Some(q(1, 3)));
        assert_eq!(rep.witness_permutation, vec![0, 1]);
        let swapped = b.permuted(&[1, 0]).unwrap();
        let rep = matching_distance(&a, &swapped).unwrap();
        assert_eq!(rep.rho_tilde_exact, Some(q(1, 3)));
        assert_eq!(rep.witness_permutation, vec![1, 0]);
    }

    #[test]
    fn text_round_trip() {
        let p = Partition::from_interval_atoms(vec![
            vec![(q(0, 1), q(1, 3)), (q(1, 2), q(2, 3))],
            vec![(q(1, 3), q(1, 2)), (q(2, 3), q(1, 1))],
        ])
        .unwrap()
        .padded(3);
        let text = p.to_text();
        assert_eq!(text, "partition interval 3\n0..1/3 1/2..2/3\n1/3..1/2 2/3..1\n-\n");
        let back = Partition::from_text(&text, &MeasureSpace::interval()).unwrap();
        assert_eq!(back.to_text(), text);

        let space = MeasureSpace::uniform_points(5).unwrap();
        let p = Partition::from_labels(&space, &[1, 0, 1, 1, 0]).unwrap().padded(3);
        let text = p.to_text();
        assert_eq!(text, "partition points:5 3\n1 4\n0 2 3\n-\n");
        assert_eq!(Partition::from_text(&text, &space).unwrap().to_text(), text);
    }

    #[test]
    fn refinement_constants_are_consistent() {
        let k = refinement_constants(0.1, 2).unwrap();
        assert!(k.b > 0.5 && k.b < 1.0);
        assert!((neg_x_log_x(k.a) - neg_x_log_x(k.b)).abs() < 1e-9);
        assert_eq!(k.c, 61);
        assert!(k.delta > 0.0);
    }

    #[test]
    fn refine_identity_and_refinement() {
        let a = Partition::from_cuts(&[q(1, 3), q(1, 2)]).unwrap();
        let out = refine_from_conditional(&a, &a, 0.1).unwrap();
        assert_eq!(matching_distance(&a.padded(4), &out).unwrap().rho_tilde_exact, Some(Rational::ZERO));
        let fine = Partition::from_cuts(&[q(1, 6), q(1, 3), q(5, 12), q(1, 2), q(3, 4)]).unwrap();
        let out = refine_from_conditional(&a, &fine, 0.1).unwrap();
        assert_eq!(matching_distance(&a.padded(4), &out).unwrap().rho_tilde_exact, Some(Rational::ZERO));
        assert!(is_finer(&fine, &out).unwrap());
    }

    #[test]
    fn greedy_net_of_copies() {
        let a = Partition::from_cuts(&[q(1, 3)]).unwrap();
        let fam = vec![a.clone(), a.clone(), a];
        assert_eq!(epsilon_net_size(&fam, 0.1, PartitionMetric::RhoTilde).unwrap(), 1);
    }
}
