//! Incremental common refinement of partitions.
//!
//! [`Refiner`] keeps the cells of `α_1 ∨ … ∨ α_k` and refines them by one more
//! partition per [`Refiner::push`]. On the interval backend the cells are
//! tracked over elementary intervals between consecutive endpoints, so a push
//! costs time linear in the number of elementary intervals.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::measure_space::{neumaier_sum, MeasurableSet, MeasureSpace, PointSet, SpaceKind};
use crate::partition::Partition;
use crate::rational::Rational;
use crate::region::{RegionSet, COMPONENT_CAP};

/// Maximum number of cells a join may have.
pub const CELL_CAP: usize = COMPONENT_CAP;
/// Maximum number of elementary intervals tracked on the interval backend.
const ELEMENTARY_CAP: usize = 1 << 22;

const UNLABELED: u16 = u16::MAX;

pub struct Refiner {
    space: MeasureSpace,
    state: State,
    cell_count: usize,
    /// For each pushed partition, `(parent cell, atom label)` of every cell.
    history: Option<Vec<Vec<(u32, u16)>>>,
    depth: usize,
}

enum State {
    Points { cell_of: Vec<u32> },
    Line { cuts: Vec<Rational>, cell_of: Vec<u32> },
    Boxes { cells: Vec<RegionSet> },
}

impl Refiner {
    pub fn new(space: &MeasureSpace, track_names: bool) -> Refiner {
        let state = match space.kind() {
            SpaceKind::WeightedPoints { weights, .. } => State::Points { cell_of: vec![0; weights.len()] },
            SpaceKind::Boxes { dim: 1 } => State::Line { cuts: vec![Rational::ZERO, Rational::ONE], cell_of: vec![0] },
            SpaceKind::Boxes { dim } => State::Boxes { cells: vec![RegionSet::full(*dim)] },
        };
        Refiner { space: space.clone(), state, cell_count: 1, history: track_names.then(Vec::new), depth: 0 }
    }

    pub fn from_partitions<'a>(
        space: &MeasureSpace,
        parts: impl IntoIterator<Item = &'a Partition>,
        track_names: bool,
    ) -> Result<Refiner> {
        let mut r = Refiner::new(space, track_names);
        for p in parts {
            r.push(p)?;
        }
        Ok(r)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn cell_count(&self) -> usize {
        self.cell_count
    }

    pub fn push(&mut self, p: &Partition) -> Result<()> {
        self.space.check_same(p.space())?;
        if p.len() >= UNLABELED as usize {
            return Err(Error::Capacity(format!("partition with {} atoms", p.len())));
        }
        let mut pairs: HashMap<(u32, u16), u32> = HashMap::new();
        let mut links: Vec<(u32, u16)> = Vec::new();
        let mut intern = |parent: u32, label: u16| -> u32 {
            *pairs.entry((parent, label)).or_insert_with(|| {
                links.push((parent, label));
                (links.len() - 1) as u32
            })
        };
        match &mut self.state {
            State::Points { cell_of } => {
                let mut label = vec![UNLABELED; cell_of.len()];
                for (a, atom) in p.atoms().iter().enumerate() {
                    let set = atom.as_points().expect("backend checked");
                    for i in set.iter() {
                        label[i] = a as u16;
                    }
                }
                for (i, c) in cell_of.iter_mut().enumerate() {
                    *c = intern(*c, label[i]);
                }
            }
            State::Line { cuts, cell_of } => {
                let mut pieces: Vec<(&Rational, &Rational, u16)> = Vec::new();
                for (a, atom) in p.atoms().iter().enumerate() {
                    let r = atom.as_region().expect("backend checked");
                    pieces.extend(r.intervals().map(|(lo, hi)| (lo, hi, a as u16)));
                }
                pieces.sort_by(|x, y| x.0.cmp(y.0));
                let mut new_cuts: Vec<Rational> = Vec::with_capacity(cuts.len() + 2 * pieces.len());
                {
                    let mut ends: Vec<&Rational> = Vec::with_capacity(2 * pieces.len());
                    for (lo, hi, _) in &pieces {
                        ends.push(lo);
                        ends.push(hi);
                    }
                    // pieces are disjoint and sorted, so their endpoints are sorted
                    let (mut i, mut j) = (0, 0);
                    while i < cuts.len() || j < ends.len() {
                        let take_old = j >= ends.len() || (i < cuts.len() && &cuts[i] <= ends[j]);
                        let v = if take_old {
                            i += 1;
                            &cuts[i - 1]
                        } else {
                            j += 1;
                            ends[j - 1]
                        };
                        if new_cuts.last() != Some(v) {
                            new_cuts.push(v.clone());
                        }
                    }
                }
                if new_cuts.len() > ELEMENTARY_CAP {
                    return Err(Error::Capacity(format!(
                        "join needs {} elementary intervals (cap {ELEMENTARY_CAP})",
                        new_cuts.len()
                    )));
                }
                let mut new_cell_of = Vec::with_capacity(new_cuts.len() - 1);
                let (mut old, mut piece) = (0usize, 0usize);
                for lo in &new_cuts[..new_cuts.len() - 1] {
                    while &cuts[old + 1] <= lo {
                        old += 1;
                    }
                    while piece < pieces.len() && pieces[piece].1 <= lo {
                        piece += 1;
                    }
                    let label = match pieces.get(piece) {
                        Some((plo, _, a)) if *plo <= lo => *a,
                        _ => UNLABELED,
                    };
                    new_cell_of.push(intern(cell_of[old], label));
                }
                *cuts = new_cuts;
                *cell_of = new_cell_of;
            }
            State::Boxes { cells } => {
                let mut next = Vec::new();
                for (c, cell) in cells.iter().enumerate() {
                    for (a, atom) in p.atoms().iter().enumerate() {
                        let piece = cell.intersection(atom.as_region().expect("backend checked"))?;
                        if !piece.is_empty() {
                            intern(c as u32, a as u16);
                            next.push(piece);
                        }
                    }
                    if next.len() > CELL_CAP {
                        break;
                    }
                }
                *cells = next;
            }
        }
        if links.len() > CELL_CAP {
            return Err(Error::Capacity(format!("join has more than {CELL_CAP} cells; use sample mode")));
        }
        self.cell_count = links.len();
        if let Some(h) = &mut self.history {
            h.push(links);
        }
        self.depth += 1;
        Ok(())
    }

    /// Cell masses as floats.
    pub fn weights(&self) -> Vec<f64> {
        match (&self.state, self.space.weights()) {
            (State::Points { cell_of }, Some(w)) => {
                let mut out = vec![0.0; self.cell_count];
                for (i, c) in cell_of.iter().enumerate() {
                    out[*c as usize] += w[i];
                }
                out
            }
            _ => self.weights_exact().expect("region backends are exact").iter().map(Rational::to_f64).collect(),
        }
    }

    /// Exact cell masses where the backend provides them.
    pub fn weights_exact(&self) -> Option<Vec<Rational>> {
        match &self.state {
            State::Points { cell_of } => {
                if !self.space.is_uniform() {
                    return None;
                }
                let n = cell_of.len() as i64;
                let mut counts = vec![0i64; self.cell_count];
                for c in cell_of {
                    counts[*c as usize] += 1;
                }
                Some(counts.into_iter().map(|k| Rational::new(k, n)).collect())
            }
            State::Line { cuts, cell_of } => {
                // Group lengths by cell; sum per denominator-friendly order.
                let mut out = vec![Rational::ZERO; self.cell_count];
                for (k, c) in cell_of.iter().enumerate() {
                    let len = &cuts[k + 1] - &cuts[k];
                    let slot = &mut out[*c as usize];
                    *slot = &*slot + &len;
                }
                Some(out)
            }
            State::Boxes { cells } => Some(cells.iter().map(RegionSet::measure).collect()),
        }
    }

    /// Name of every cell (the atom index chosen from each pushed partition),
    /// flattened with stride [`Refiner::depth`].
    pub fn names(&self) -> Option<Vec<u16>> {
        let history = self.history.as_ref()?;
        let depth = self.depth;
        let mut out = vec![0u16; self.cell_count * depth];
        for cell in 0..self.cell_count {
            let mut cur = cell as u32;
            for step in (0..depth).rev() {
                let (parent, label) = history[step][cur as usize];
                out[cell * depth + step] = label;
                cur = parent;
            }
        }
        Some(out)
    }

    /// The cells as measurable sets.
    pub fn cell_sets(&self) -> Result<Vec<MeasurableSet>> {
        match &self.state {
            State::Points { cell_of } => {
                let mut sets = vec![PointSet::empty(cell_of.len()); self.cell_count];
                for (i, c) in cell_of.iter().enumerate() {
                    sets[*c as usize].insert(i);
                }
                Ok(sets.into_iter().map(MeasurableSet::Points).collect())
            }
            State::Line { cuts, cell_of } => {
                let mut parts: Vec<Vec<(Rational, Rational)>> = vec![Vec::new(); self.cell_count];
                for (k, c) in cell_of.iter().enumerate() {
                    parts[*c as usize].push((cuts[k].clone(), cuts[k + 1].clone()));
                }
                parts.into_iter().map(|p| RegionSet::from_intervals(p).map(MeasurableSet::Region)).collect()
            }
            State::Boxes { cells } => Ok(cells.iter().cloned().map(MeasurableSet::Region).collect()),
        }
    }

    /// Entropy of the current join, in nats.
    pub fn entropy(&self) -> f64 {
        entropy_of_masses(&self.weights())
    }
}

/// `-Σ p log p` with `0 log 0 = 0`, compensated summation.
pub fn entropy_of_masses(masses: &[f64]) -> f64 {
    neumaier_sum(masses.iter().filter(|p| **p > 0.0).map(|&p| -p * p.ln())).max(0.0)
}
