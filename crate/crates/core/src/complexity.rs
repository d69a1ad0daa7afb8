//! E-names, normalized Hamming distance, covering numbers `C(E,ε)` and
//! their profiles along windows of group elements.
//!
//! Balls are taken around realized names only. This loses nothing: `H_E(x,·)`
//! depends on `x` only through its name, so the ball of any point equals the
//! ball of its cell.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{GroupElement, SystemAction};
use crate::error::{Error, Result};
use crate::join::Refiner;
use crate::measure_space::{MeasurableSet, Point};
use crate::partition::Partition;
use crate::rational::Rational;

/// Largest table the exact solver accepts.
pub const EXACT_MAX_CELLS: usize = 20;
/// Default number of blocks the equicontinuity diagnostic may use.
pub const DEFAULT_MAX_BLOCKS: usize = 32;

pub const PLATEAU_RULE: &str = "bounded_plateau: last three cover sizes equal";
pub const GROWING_RULE: &str = "growing: last cover size at least twice the first";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TableMode {
    /// Enumerate join cells with exact weights.
    Cells,
    /// Evaluate names at `n` sampled points.
    Samples { n: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    Greedy,
    Exact,
}

impl Solver {
    pub fn as_str(self) -> &'static str {
        match self {
            Solver::Greedy => "greedy",
            Solver::Exact => "exact",
        }
    }
}

/// Realized E-names with their masses, sorted lexicographically by name.
#[derive(Clone, Debug)]
pub struct NameTable {
    len: usize,
    names: Vec<u16>,
    weights: Vec<f64>,
    exact: Option<Vec<Rational>>,
    mode: TableMode,
}

impl NameTable {
    pub fn build(family: &[Partition], mode: TableMode) -> Result<NameTable> {
        let first = family.first().ok_or_else(|| Error::InvalidInput("empty partition family".into()))?;
        let space = first.space();
        match mode {
            TableMode::Cells => {
                let refiner = Refiner::from_partitions(space, family, true).map_err(|e| match e {
                    Error::Capacity(msg) => Error::Capacity(format!("{msg}; rerun in samples mode")),
                    other => other,
                })?;
                let names = refiner.names().expect("names tracked");
                NameTable::from_cells(family.len(), names, refiner.weights(), refiner.weights_exact(), mode)
            }
            TableMode::Samples { n, seed } => {
                let points = space.sample_points(n, seed)?;
                let labelers: Vec<Labeler> = family.iter().map(Labeler::new).collect();
                let rows: Vec<Vec<u16>> =
                    points.par_iter().map(|p| labelers.iter().map(|l| l.label(p)).collect()).collect();
                let mut counts: HashMap<Vec<u16>, i64> = HashMap::new();
                for row in rows {
                    *counts.entry(row).or_insert(0) += 1;
                }
                let mut entries: Vec<(Vec<u16>, i64)> = counts.into_iter().collect();
                entries.sort();
                let len = family.len();
                let names = entries.iter().flat_map(|(v, _)| v.iter().copied()).collect();
                let exact: Vec<Rational> = entries.iter().map(|(_, c)| Rational::new(*c, n as i64)).collect();
                let weights = entries.iter().map(|(_, c)| *c as f64 / n as f64).collect();
                Ok(NameTable { len, names, weights, exact: Some(exact), mode })
            }
        }
    }

    /// Builds a table from explicit names (flattened, stride `len`) and
    /// weights. Null cells are dropped and the rest sorted by name.
    pub fn from_cells(
        len: usize,
        names: Vec<u16>,
        weights: Vec<f64>,
        exact: Option<Vec<Rational>>,
        mode: TableMode,
    ) -> Result<NameTable> {
        let count = weights.len();
        if names.len() != count * len || exact.as_ref().is_some_and(|e| e.len() != count) {
            return Err(Error::InvalidInput("names and weights disagree in length".into()));
        }
        let name = |c: usize| &names[c * len..(c + 1) * len];
        let mut order: Vec<usize> = (0..count).filter(|&c| weights[c] > 0.0).collect();
        order.sort_by(|&a, &b| name(a).cmp(name(b)));
        if order.windows(2).any(|w| name(w[0]) == name(w[1])) {
            return Err(Error::InvalidInput("duplicate name vectors".into()));
        }
        Ok(NameTable {
            len,
            names: order.iter().flat_map(|&c| name(c).iter().copied()).collect(),
            weights: order.iter().map(|&c| weights[c]).collect(),
            exact: exact.map(|e| order.iter().map(|&c| e[c].clone()).collect()),
            mode,
        })
    }

    /// `|E|`.
    pub fn name_len(&self) -> usize {
        self.len
    }

    pub fn cell_count(&self) -> usize {
        self.weights.len()
    }

    pub fn name(&self, cell: usize) -> &[u16] {
        &self.names[cell * self.len..(cell + 1) * self.len]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_exact(&self) -> Option<&[Rational]> {
        self.exact.as_deref()
    }

    pub fn mode(&self) -> TableMode {
        self.mode
    }

    pub fn total_weight(&self) -> f64 {
        crate::measure_space::neumaier_sum(self.weights.iter().copied())
    }

    /// `H_E(u,v)`.
    pub fn hamming_distance(&self, u: &[u16], v: &[u16]) -> Result<f64> {
        if u.len() != self.len || v.len() != self.len {
            return Err(Error::InvalidInput(format!(
                "name vectors must have length {}, got {} and {}",
                self.len,
                u.len(),
                v.len()
            )));
        }
        Ok(mismatches(u, v) as f64 / self.len as f64)
    }

    /// Weights as integer multiples of a common unit, when exact weights exist
    /// and the common denominator fits.
    fn integer_weights(&self) -> Option<(Vec<u64>, u64)> {
        let exact = self.exact.as_ref()?;
        let mut lcm: u64 = 1;
        for w in exact {
            let d = u64::try_from(w.denom()).ok()?;
            let g = num_integer::gcd(lcm, d);
            lcm = (lcm / g).checked_mul(d)?;
            if lcm > 1 << 52 {
                return None;
            }
        }
        let units = exact
            .iter()
            .map(|w| {
                let n = u64::try_from(w.numer()).ok()?;
                n.checked_mul(lcm / u64::try_from(w.denom()).ok()?)
            })
            .collect::<Option<Vec<u64>>>()?;
        Some((units, lcm))
    }
}

fn mismatches(u: &[u16], v: &[u16]) -> usize {
    u.iter().zip(v).filter(|(a, b)| a != b).count()
}

/// Maps sample points to atom labels.
enum Labeler {
    Line(Vec<(f64, f64, u16)>),
    Points(Vec<u16>),
    Generic(Partition),
}

impl Labeler {
    fn new(p: &Partition) -> Labeler {
        match p.atoms().first() {
            Some(MeasurableSet::Points(first)) => {
                let mut label = vec![u16::MAX; first.len()];
                for (a, atom) in p.atoms().iter().enumerate() {
                    for i in atom.as_points().expect("same backend").iter() {
                        label[i] = a as u16;
                    }
                }
                Labeler::Points(label)
            }
            Some(MeasurableSet::Region(r)) if r.dim() == 1 => {
                let mut v: Vec<(f64, f64, u16)> = p
                    .atoms()
                    .iter()
                    .enumerate()
                    .flat_map(|(a, atom)| {
                        atom.as_region()
                            .expect("same backend")
                            .intervals()
                            .map(move |(lo, hi)| (lo.to_f64(), hi.to_f64(), a as u16))
                    })
                    .collect();
                v.sort_by(|x, y| x.0.total_cmp(&y.0));
                Labeler::Line(v)
            }
            _ => Labeler::Generic(p.clone()),
        }
    }

    fn label(&self, x: &Point) -> u16 {
        match (self, x) {
            (Labeler::Points(l), Point::Index(i)) => l[*i],
            (Labeler::Line(v), Point::Coords(c)) => {
                let k = v.partition_point(|(lo, _, _)| *lo <= c[0]);
                match k.checked_sub(1).map(|k| v[k]) {
                    Some((_, hi, a)) if c[0] < hi => a,
                    _ => u16::MAX,
                }
            }
            (Labeler::Generic(p), _) => p.atom_of(x).map_or(u16::MAX, |a| a as u16),
            _ => u16::MAX,
        }
    }
}

/// `ε` as a rational and the largest mismatch count `k` with `k/|E| < ε`.
fn radius(eps: f64, len: usize) -> Result<(Rational, usize)> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput(format!("ε must lie in (0,1), got {eps}")));
    }
    let e = Rational::simplest_from_f64(eps).expect("finite");
    // k < ε·len  ⇔  k < ceil(ε·len), so k_max = ceil(ε·len) − 1
    let scaled = &e * &Rational::integer(len as i64);
    let ceil = -(-scaled).floor();
    let k = ceil.to_f64() as i64 - 1;
    Ok((e, k.max(0) as usize))
}

/// Cells within Hamming radius `k` (mismatch count `≤ k`) of every cell.
fn balls(table: &NameTable, k: usize) -> Vec<Vec<u32>> {
    let m = table.cell_count();
    let len = table.len;
    if k == 0 {
        return (0..m as u32).map(|c| vec![c]).collect();
    }
    let alphabet = table.names.iter().copied().max().map_or(1, |s| s as usize + 1);
    // neighbour enumeration cost Σ_{j≤k} C(len,j)(alphabet−1)^j per cell
    let mut enum_cost = 0f64;
    let mut term = 1f64;
    for j in 0..=k {
        if j > 0 {
            term *= (len - j + 1) as f64 / j as f64 * (alphabet - 1) as f64;
        }
        enum_cost += term;
    }
    if enum_cost * 4.0 < m as f64 {
        let index: HashMap<&[u16], u32> = (0..m).map(|c| (table.name(c), c as u32)).collect();
        (0..m)
            .into_par_iter()
            .map(|c| {
                let mut out = Vec::new();
                let mut buf = table.name(c).to_vec();
                enumerate_neighbours(&mut buf, 0, k, alphabet as u16, &index, &mut out);
                out.sort_unstable();
                out
            })
            .collect()
    } else if alphabet <= 2 {
        let words = len.div_ceil(64);
        let mut bits = vec![0u64; m * words];
        for c in 0..m {
            for (i, &s) in table.name(c).iter().enumerate() {
                if s == 1 {
                    bits[c * words + i / 64] |= 1 << (i % 64);
                }
            }
        }
        (0..m)
            .into_par_iter()
            .map(|c| {
                let row = &bits[c * words..(c + 1) * words];
                (0..m)
                    .filter(|&d| {
                        let other = &bits[d * words..(d + 1) * words];
                        let dist: u32 = row.iter().zip(other).map(|(a, b)| (a ^ b).count_ones()).sum();
                        dist as usize <= k
                    })
                    .map(|d| d as u32)
                    .collect()
            })
            .collect()
    } else {
        (0..m)
            .into_par_iter()
            .map(|c| {
                let u = table.name(c);
                (0..m).filter(|&d| mismatches(u, table.name(d)) <= k).map(|d| d as u32).collect()
            })
            .collect()
    }
}

fn enumerate_neighbours(
    buf: &mut [u16],
    from: usize,
    budget: usize,
    alphabet: u16,
    index: &HashMap<&[u16], u32>,
    out: &mut Vec<u32>,
) {
    if let Some(&c) = index.get(&*buf) {
        out.push(c);
    }
    if budget == 0 {
        return;
    }
    for i in from..buf.len() {
        let orig = buf[i];
        for s in 0..alphabet {
            if s != orig {
                buf[i] = s;
                enumerate_neighbours(buf, i + 1, budget - 1, alphabet, index, out);
            }
        }
        buf[i] = orig;
    }
}

/// Masses used by the solvers: integer units when exact, floats otherwise.
#[derive(Clone)]
enum Masses {
    Units { w: Vec<u64>, unit_den: u64, eps: Rational },
    Float { w: Vec<f64>, eps: f64 },
}

impl Masses {
    fn new(table: &NameTable, eps: &Rational, eps_f: f64) -> Masses {
        match table.integer_weights() {
            Some((w, unit_den)) => Masses::Units { w, unit_den, eps: eps.clone() },
            None => Masses::Float { w: table.weights.clone(), eps: eps_f },
        }
    }

    fn len(&self) -> usize {
        match self {
            Masses::Units { w, .. } => w.len(),
            Masses::Float { w, .. } => w.len(),
        }
    }

    /// Mass of a set of cells, in comparable units.
    fn mass(&self, cells: impl Iterator<Item = usize>) -> f64 {
        match self {
            Masses::Units { w, .. } => cells.map(|c| w[c]).sum::<u64>() as f64,
            Masses::Float { w, .. } => crate::measure_space::neumaier_sum(cells.map(|c| w[c])),
        }
    }

    fn weight(&self, c: usize) -> f64 {
        match self {
            Masses::Units { w, .. } => w[c] as f64,
            Masses::Float { w, .. } => w[c],
        }
    }

    /// `covered > 1 − ε`, exactly in unit mode. `covered` is in the units of [`Masses::mass`].
    fn enough(&self, covered: f64) -> bool {
        match self {
            Masses::Units { unit_den, eps, .. } => {
                // covered/unit_den > 1 − ε
                let lhs = Rational::from_i128(covered as i128, *unit_den as i128);
                lhs > &Rational::ONE - eps
            }
            Masses::Float { eps, .. } => covered > 1.0 - eps,
        }
    }

    fn to_probability(&self, covered: f64) -> (f64, Option<Rational>) {
        match self {
            Masses::Units { unit_den, .. } => {
                let r = Rational::from_i128(covered as i128, *unit_den as i128);
                (r.to_f64(), Some(r))
            }
            Masses::Float { .. } => (covered, None),
        }
    }
}

/// One covering computation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverEntry {
    /// Window cardinality `|E|`.
    pub n: usize,
    pub cover_size: usize,
    pub solver: Solver,
    pub covered_mass: f64,
    #[serde(skip)]
    pub covered_mass_exact: Option<Rational>,
    pub cells: usize,
    /// Chosen centers as cell indices of the table.
    #[serde(skip)]
    pub centers: Vec<usize>,
}

/// `C(E,ε)`.
pub fn covering_number(table: &NameTable, eps: f64, solver: Solver) -> Result<CoverEntry> {
    let (eps_q, k) = radius(eps, table.len)?;
    let masses = Masses::new(table, &eps_q, eps);
    if solver == Solver::Exact && table.cell_count() > EXACT_MAX_CELLS {
        return Err(Error::Capacity(format!(
            "exact solver handles at most {EXACT_MAX_CELLS} cells, table has {}",
            table.cell_count()
        )));
    }
    let balls = balls(table, k);
    let greedy = greedy_cover(&balls, &masses);
    let centers = match solver {
        Solver::Greedy => greedy,
        Solver::Exact => exact_cover(&balls, &masses, greedy.len()).unwrap_or(greedy),
    };
    let mut covered = vec![false; table.cell_count()];
    for &c in &centers {
        for &d in &balls[c] {
            covered[d as usize] = true;
        }
    }
    let mass = masses.mass((0..covered.len()).filter(|&c| covered[c]));
    if !masses.enough(mass) {
        return Err(Error::Postcondition(format!("cover of mass {mass} does not exceed 1 − ε")));
    }
    let (covered_mass, covered_mass_exact) = masses.to_probability(mass);
    Ok(CoverEntry {
        n: table.len,
        cover_size: centers.len(),
        solver,
        covered_mass,
        covered_mass_exact,
        cells: table.cell_count(),
        centers,
    })
}

/// Lazy greedy: repeatedly take the ball with the most uncovered mass,
/// ties to the lowest cell index (the lexicographically smallest name).
fn greedy_cover(balls: &[Vec<u32>], masses: &Masses) -> Vec<usize> {
    let m = masses.len();
    let mut covered = vec![false; m];
    let gain = |c: usize, covered: &[bool]| masses.mass(balls[c].iter().map(|&d| d as usize).filter(|&d| !covered[d]));
    let mut heap: BinaryHeap<(OrdF64, Reverse<usize>)> =
        (0..m).map(|c| (OrdF64(gain(c, &covered)), Reverse(c))).collect();
    let mut total = 0.0;
    let mut chosen = Vec::new();
    while !masses.enough(total) {
        let Some((OrdF64(stale), Reverse(c))) = heap.pop() else { break };
        let fresh = gain(c, &covered);
        if fresh == stale {
            if fresh <= 0.0 {
                break;
            }
            chosen.push(c);
            for &d in &balls[c] {
                covered[d as usize] = true;
            }
            total = masses.mass((0..m).filter(|&d| covered[d]));
        } else {
            heap.push((OrdF64(fresh), Reverse(c)));
        }
    }
    prune_redundant(balls, masses, chosen)
}

/// Drops centers, latest pick first, whose removal keeps the mass above `1 − ε`.
fn prune_redundant(balls: &[Vec<u32>], masses: &Masses, mut chosen: Vec<usize>) -> Vec<usize> {
    let m = masses.len();
    let mut multiplicity = vec![0u32; m];
    for &c in &chosen {
        for &d in &balls[c] {
            multiplicity[d as usize] += 1;
        }
    }
    let mut total = masses.mass((0..m).filter(|&d| multiplicity[d] > 0));
    let mut i = chosen.len();
    while i > 0 {
        i -= 1;
        let c = chosen[i];
        let sole = masses.mass(balls[c].iter().map(|&d| d as usize).filter(|&d| multiplicity[d] == 1));
        if masses.enough(total - sole) {
            for &d in &balls[c] {
                multiplicity[d as usize] -= 1;
            }
            total -= sole;
            chosen.remove(i);
        }
    }
    chosen
}

#[derive(Clone, Copy, PartialEq)]
struct OrdF64(f64);
impl Eq for OrdF64 {}
impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Smallest cover by depth-first search over center sets of increasing size,
/// pruned by `picks left × heaviest ball`. `None` if no cover smaller than
/// `upper` exists.
fn exact_cover(balls: &[Vec<u32>], masses: &Masses, upper: usize) -> Option<Vec<usize>> {
    let m = masses.len();
    let masks: Vec<u32> = balls.iter().map(|b| b.iter().fold(0u32, |acc, &d| acc | (1 << d))).collect();
    let mask_mass = |mask: u32| masses.mass((0..m).filter(|&c| mask & (1 << c) != 0));
    let heaviest = masks.iter().map(|&b| mask_mass(b)).fold(0.0, f64::max);

    #[allow(clippy::too_many_arguments)]
    fn search(
        start: usize,
        left: usize,
        mask: u32,
        chosen: &mut Vec<usize>,
        masks: &[u32],
        heaviest: f64,
        mask_mass: &dyn Fn(u32) -> f64,
        enough: &dyn Fn(f64) -> bool,
    ) -> bool {
        let have = mask_mass(mask);
        if enough(have) {
            return true;
        }
        if left == 0 || !enough(have + heaviest * left as f64) {
            return false;
        }
        for c in start..masks.len() {
            if masks[c] & !mask == 0 {
                continue;
            }
            chosen.push(c);
            if search(c + 1, left - 1, mask | masks[c], chosen, masks, heaviest, mask_mass, enough) {
                return true;
            }
            chosen.pop();
        }
        false
    }

    let enough = |x: f64| masses.enough(x);
    for size in 0..upper {
        let mut chosen = Vec::new();
        if search(0, size, 0, &mut chosen, &masks, heaviest, &mask_mass, &enough) {
            return Some(chosen);
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    BoundedPlateau,
    Growing,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::BoundedPlateau => "bounded_plateau",
            Verdict::Growing => "growing",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    /// Plateau if the last three values agree, growing if the last is at
    /// least twice the first, otherwise inconclusive.
    pub fn of_sizes(sizes: &[usize]) -> Verdict {
        let n = sizes.len();
        if n >= 3 && sizes[n - 1] == sizes[n - 2] && sizes[n - 2] == sizes[n - 3] {
            Verdict::BoundedPlateau
        } else if n >= 2 && sizes[n - 1] >= 2 * sizes[0] {
            Verdict::Growing
        } else {
            Verdict::Inconclusive
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComplexityProfile {
    pub epsilon: f64,
    pub entries: Vec<CoverEntry>,
    pub verdict: Verdict,
}

impl ComplexityProfile {
    pub fn from_entries(epsilon: f64, entries: Vec<CoverEntry>) -> ComplexityProfile {
        let sizes: Vec<usize> = entries.iter().map(|e| e.cover_size).collect();
        ComplexityProfile { epsilon, verdict: Verdict::of_sizes(&sizes), entries }
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.cover_size).collect()
    }
}

/// `n ↦ C({g⁻¹α : g ∈ F_n}, ε)`.
pub fn complexity_profile(
    alpha: &Partition,
    sys: &SystemAction,
    windows: &[Vec<GroupElement>],
    eps: f64,
    solver: Solver,
    mode: TableMode,
) -> Result<ComplexityProfile> {
    if windows.is_empty() {
        return Err(Error::InvalidInput("no windows".into()));
    }
    let mut entries = Vec::with_capacity(windows.len());
    for w in windows {
        let family = sys.orbit_partitions(alpha, w)?;
        let table = NameTable::build(&family, mode)?;
        entries.push(covering_number(&table, eps, solver)?);
    }
    Ok(ComplexityProfile::from_entries(eps, entries))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub original: usize,
    pub pulled_back: usize,
    pub holds: bool,
}

/// Compares exact `C(E,ε)` with exact `C(g⁻¹E,ε)`.
pub fn invariance_check(family: &[Partition], g: &[i64], sys: &SystemAction, eps: f64) -> Result<InvarianceReport> {
    let pulled = family.iter().map(|p| sys.pullback_partition(g, p)).collect::<Result<Vec<_>>>()?;
    let a = covering_number(&NameTable::build(family, TableMode::Cells)?, eps, Solver::Exact)?;
    let b = covering_number(&NameTable::build(&pulled, TableMode::Cells)?, eps, Solver::Exact)?;
    Ok(InvarianceReport { original: a.cover_size, pulled_back: b.cover_size, holds: a.cover_size == b.cover_size })
}

/// Disjoint blocks of total mass `> 1 − ε`, each of Hamming diameter `< ε`
/// in every tested window. Blocks are unions of cells of the join over all
/// windows.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockFamily {
    pub block_masses: Vec<f64>,
    pub covered_mass: f64,
    /// Centers as names over the union of the windows.
    #[serde(skip)]
    pub centers: Vec<Vec<u16>>,
    /// Per window: whether the `ε`-balls around the block centers cover mass `> 1 − ε`.
    pub cover_check: Vec<bool>,
}

/// No family of `attempted_blocks` blocks can work: in window
/// `window_index` every set of Hamming diameter `< ε` has mass at most
/// `max_ball_mass`, and `attempted_blocks · max_ball_mass ≤ 1 − ε`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FailureCertificate {
    pub window_index: usize,
    pub window_size: usize,
    pub attempted_blocks: usize,
    pub max_ball_mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockReport {
    Blocks(BlockFamily),
    Failure(FailureCertificate),
    /// The greedy construction needed more blocks than allowed but no
    /// counting certificate applies.
    Inconclusive {
        blocks_needed_over: usize,
    },
}

/// Finite-horizon search for mean-equicontinuity blocks.
///
/// Greedy centers are taken in the join over every tested window; a block
/// is the set of unassigned cells within Hamming distance `< ε/2` of its
/// center in every window, so its diameter is `< ε` by the triangle
/// inequality.
pub fn mean_equicontinuity_diagnostic(
    alpha: &Partition,
    sys: &SystemAction,
    windows: &[Vec<GroupElement>],
    eps: f64,
    max_blocks: usize,
) -> Result<BlockReport> {
    if windows.is_empty() {
        return Err(Error::InvalidInput("no windows".into()));
    }
    let eps_q = Rational::simplest_from_f64(eps)
        .filter(|_| eps > 0.0 && eps < 1.0)
        .ok_or_else(|| Error::InvalidInput(format!("ε must lie in (0,1), got {eps}")))?;
    let mut union: Vec<GroupElement> = windows.iter().flatten().cloned().collect();
    union.sort();
    union.dedup();
    let coords: Vec<Vec<usize>> =
        windows.iter().map(|w| w.iter().map(|g| union.binary_search(g).expect("in union")).collect()).collect();
    let family = sys.orbit_partitions(alpha, &union)?;
    let table = NameTable::build(&family, TableMode::Cells)?;
    let masses = Masses::new(&table, &eps_q, eps);
    let m = table.cell_count();
    let within = |u: &[u16], v: &[u16], scale: &Rational| {
        coords.iter().all(|cs| {
            let k = cs.iter().filter(|&&i| u[i] != v[i]).count();
            // k/|F| < scale
            Rational::new(k as i64, cs.len() as i64) < *scale
        })
    };
    let half = &eps_q / &Rational::integer(2);
    let near: Vec<Vec<u32>> = (0..m)
        .into_par_iter()
        .map(|c| (0..m).filter(|&d| within(table.name(c), table.name(d), &half)).map(|d| d as u32).collect())
        .collect();
    let mut assigned = vec![false; m];
    let mut centers = Vec::new();
    let mut block_masses = Vec::new();
    let mut total = 0.0;
    while !masses.enough(total) && centers.len() <= max_blocks {
        let best = (0..m)
            .map(|c| (OrdF64(masses.mass(near[c].iter().map(|&d| d as usize).filter(|&d| !assigned[d]))), Reverse(c)))
            .max()
            .expect("nonempty table");
        let c = best.1 .0;
        let mut block = 0.0;
        for &d in &near[c] {
            if !assigned[d as usize] {
                assigned[d as usize] = true;
                block += masses.weight(d as usize);
            }
        }
        total += block;
        centers.push(c);
        block_masses.push(masses.to_probability(block).0);
    }
    if masses.enough(total) && centers.len() <= max_blocks {
        let cover_check = coords
            .iter()
            .map(|cs| {
                let covered = (0..m).filter(|&d| {
                    centers.iter().any(|&c| {
                        let k = cs.iter().filter(|&&i| table.name(c)[i] != table.name(d)[i]).count();
                        Rational::new(k as i64, cs.len() as i64) < eps_q
                    })
                });
                masses.enough(masses.mass(covered))
            })
            .collect();
        return Ok(BlockReport::Blocks(BlockFamily {
            block_masses,
            covered_mass: masses.to_probability(total).0,
            centers: centers.iter().map(|&c| table.name(c).to_vec()).collect(),
            cover_check,
        }));
    }
    // Counting certificate: the heaviest set of diameter < ε in window F lies
    // in an ε-ball around one of its points.
    let mut best: Option<FailureCertificate> = None;
    for (wi, w) in windows.iter().enumerate() {
        let fam = sys.orbit_partitions(alpha, w)?;
        let t = NameTable::build(&fam, TableMode::Cells)?;
        let (_, k) = radius(eps, t.len)?;
        let wm = Masses::new(&t, &eps_q, eps);
        let heaviest = balls(&t, k).iter().map(|b| wm.mass(b.iter().map(|&d| d as usize))).fold(0.0, f64::max);
        let heaviest = wm.to_probability(heaviest).0;
        if best.as_ref().is_none_or(|b| heaviest < b.max_ball_mass) {
            best = Some(FailureCertificate {
                window_index: wi,
                window_size: w.len(),
                attempted_blocks: max_blocks,
                max_ball_mass: heaviest,
            });
        }
    }
    let cert = best.expect("windows nonempty");
    if max_blocks as f64 * cert.max_ball_mass <= 1.0 - eps {
        Ok(BlockReport::Failure(cert))
    } else {
        Ok(BlockReport::Inconclusive { blocks_needed_over: max_blocks })
    }
}
