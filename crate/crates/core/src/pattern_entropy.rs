//! Sequence entropy and the maximal pattern quantity
//! `P*(n) = sup_{α_1..α_n ∈ K} H(α_1 ∨ … ∨ α_n)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{GroupElement, SystemAction};
use crate::error::{Error, Result};
use crate::join::Refiner;
use crate::measure_space::MeasurableSet;
use crate::partition::{join_entropy, Partition};

/// Largest number of subsets the exhaustive strategy will evaluate.
pub const EXHAUSTIVE_BUDGET: u64 = 1 << 20;
/// `zero_trend` when the last rate is below this multiple of `log r`.
pub const ZERO_TREND_FACTOR: f64 = 0.15;
/// `positive_trend` needs the last two rates within this relative spread.
pub const STABLE_SPREAD: f64 = 0.10;
/// Slack for the subadditivity and Lipschitz inequalities.
pub const INEQUALITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SequenceEntropyPoint {
    pub n: usize,
    pub joint_entropy: f64,
    pub rate: f64,
}

/// `n ↦ H(α_1 ∨ … ∨ α_n)/n` for `n = 1..=n_max`. The last rate is a trend,
/// not a certified limit.
pub fn sequence_entropy_estimate(seq: &[Partition], n_max: usize) -> Result<Vec<SequenceEntropyPoint>> {
    if n_max == 0 || seq.len() < n_max {
        return Err(Error::InvalidInput(format!("need 1 ≤ n_max ≤ {} (sequence length), got {n_max}", seq.len())));
    }
    let mut refiner = Refiner::new(seq[0].space(), false);
    let mut out = Vec::with_capacity(n_max);
    for (i, p) in seq.iter().take(n_max).enumerate() {
        refiner.push(p)?;
        let h = refiner.entropy();
        out.push(SequenceEntropyPoint { n: i + 1, joint_entropy: h, rate: h / (i + 1) as f64 });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Exhaustive,
    Greedy,
    Beam { width: usize },
}

impl Strategy {
    pub fn bound_kind(self) -> BoundKind {
        match self {
            Strategy::Exhaustive => BoundKind::Exact,
            _ => BoundKind::LowerBound,
        }
    }

    pub fn label(self) -> String {
        match self {
            Strategy::Exhaustive => "exhaustive".into(),
            Strategy::Greedy => "greedy".into(),
            Strategy::Beam { width } => format!("beam({width})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Exact,
    LowerBound,
}

impl BoundKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundKind::Exact => "exact",
            BoundKind::LowerBound => "lower_bound",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PatternEntry {
    pub n: usize,
    pub p_star: f64,
    pub bound_kind: BoundKind,
    /// Indices into `K` of a selection attaining `p_star` (repeats omitted).
    pub selection: Vec<usize>,
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// `P*_K(n)` by the given strategy. Selections may repeat elements; since a
/// repeat never refines the join, the exhaustive search runs over subsets of
/// size `min(n, |K|)`.
pub fn max_pattern_profile(family: &[Partition], n: usize, strategy: Strategy) -> Result<PatternEntry> {
    if family.is_empty() || n == 0 {
        return Err(Error::InvalidInput("need a nonempty family and n ≥ 1".into()));
    }
    let space = family[0].space();
    let k = n.min(family.len());
    let entropy_of = |sel: &[usize]| join_entropy(space, sel.iter().map(|&i| &family[i]));
    let (p_star, selection) = match strategy {
        Strategy::Exhaustive => {
            let count = binomial(family.len() as u64, k as u64);
            if count > EXHAUSTIVE_BUDGET {
                return Err(Error::Capacity(format!(
                    "exhaustive search needs {count} joins (budget {EXHAUSTIVE_BUDGET}); use greedy or beam"
                )));
            }
            let subsets = combinations(family.len(), k);
            let values = subsets.par_iter().map(|s| entropy_of(s)).collect::<Result<Vec<f64>>>()?;
            // first maximum in lexicographic subset order
            let mut best = 0usize;
            for (i, v) in values.iter().enumerate() {
                if *v > values[best] {
                    best = i;
                }
            }
            (values[best], subsets[best].clone())
        }
        Strategy::Greedy => beam(family, k, 1, &entropy_of)?,
        Strategy::Beam { width } => beam(family, k, width.max(1), &entropy_of)?,
    };
    Ok(PatternEntry { n, p_star, bound_kind: strategy.bound_kind(), selection })
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else { break };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
    out
}

/// Keeps the `width` best partial selections, extending each by every unused
/// element. Ties go to the lexicographically smaller selection.
fn beam(
    family: &[Partition],
    k: usize,
    width: usize,
    entropy_of: &(dyn Fn(&[usize]) -> Result<f64> + Sync),
) -> Result<(f64, Vec<usize>)> {
    let mut frontier: Vec<(f64, Vec<usize>)> = vec![(0.0, Vec::new())];
    for _ in 0..k {
        let mut candidates: Vec<Vec<usize>> = Vec::new();
        for (_, sel) in &frontier {
            for i in 0..family.len() {
                if !sel.contains(&i) {
                    let mut next = sel.clone();
                    next.push(i);
                    next.sort_unstable();
                    candidates.push(next);
                }
            }
        }
        candidates.sort();
        candidates.dedup();
        let mut scored =
            candidates.into_par_iter().map(|s| entropy_of(&s).map(|h| (h, s))).collect::<Result<Vec<_>>>()?;
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        scored.truncate(width);
        frontier = scored;
    }
    Ok(frontier.swap_remove(0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternVerdict {
    ZeroTrend,
    PositiveTrend,
    Inconclusive,
}

impl PatternVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            PatternVerdict::ZeroTrend => "zero_trend",
            PatternVerdict::PositiveTrend => "positive_trend",
            PatternVerdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PatternEntropyEstimate {
    pub n_values: Vec<usize>,
    pub p_star: Vec<f64>,
    pub strategy: Strategy,
    pub bound_kind: BoundKind,
    /// `P*(n)/n` at the largest `n`.
    pub rate: f64,
    pub threshold: f64,
    pub verdict: PatternVerdict,
}

impl PatternEntropyEstimate {
    pub fn rates(&self) -> Vec<f64> {
        self.n_values.iter().zip(&self.p_star).map(|(n, p)| p / *n as f64).collect()
    }
}

/// `P*(n)/n` over the orbit family `{g⁻¹α : g ∈ S}`.
pub fn max_pattern_entropy_estimate(
    alpha: &Partition,
    sys: &SystemAction,
    elements: &[GroupElement],
    n_values: &[usize],
    strategy: Strategy,
) -> Result<PatternEntropyEstimate> {
    if n_values.is_empty() {
        return Err(Error::InvalidInput("no n values".into()));
    }
    let family = sys.orbit_partitions(alpha, elements)?;
    let p_star = n_values
        .iter()
        .map(|&n| max_pattern_profile(&family, n, strategy).map(|e| e.p_star))
        .collect::<Result<Vec<f64>>>()?;
    let rates: Vec<f64> = n_values.iter().zip(&p_star).map(|(n, p)| p / *n as f64).collect();
    let rate = *rates.last().expect("nonempty");
    let (threshold, verdict) = trend_verdict(&rates, alpha.len());
    Ok(PatternEntropyEstimate {
        n_values: n_values.to_vec(),
        p_star,
        strategy,
        bound_kind: strategy.bound_kind(),
        rate,
        threshold,
        verdict,
    })
}

/// Zero trend when the last rate is below `0.15·ln(max(r,2))`; positive when
/// the last two rates agree within 10%. Returns the threshold too.
pub fn trend_verdict(rates: &[f64], atoms: usize) -> (f64, PatternVerdict) {
    let threshold = ZERO_TREND_FACTOR * (atoms.max(2) as f64).ln();
    let Some(&rate) = rates.last() else {
        return (threshold, PatternVerdict::Inconclusive);
    };
    let verdict = if rate < threshold {
        PatternVerdict::ZeroTrend
    } else if rates.len() >= 2 && {
        let prev = rates[rates.len() - 2];
        (rate - prev).abs() <= STABLE_SPREAD * prev.max(rate)
    } {
        PatternVerdict::PositiveTrend
    } else {
        PatternVerdict::Inconclusive
    };
    (threshold, verdict)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeketeCertificate {
    /// `min_n P*(n)/n`, an upper bound on the limit.
    pub rate: f64,
    pub attained_at: usize,
}

/// Infimum of `P*(n)/n` over the computed values. Refuses lower-bound data.
pub fn fekete_rate(n_values: &[usize], p_star: &[f64], bound_kind: BoundKind) -> Result<FeketeCertificate> {
    if bound_kind != BoundKind::Exact {
        return Err(Error::Precondition(
            "Fekete's bound needs exact P* values; the infimum of lower bounds certifies nothing".into(),
        ));
    }
    if n_values.is_empty() || n_values.len() != p_star.len() || n_values.contains(&0) {
        return Err(Error::InvalidInput("need matching nonempty n and P* lists with n ≥ 1".into()));
    }
    let (i, rate) = n_values
        .iter()
        .zip(p_star)
        .map(|(n, p)| p / *n as f64)
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, r)| if r < best.1 { (i, r) } else { best });
    Ok(FeketeCertificate { rate, attained_at: n_values[i] })
}

/// `H(∨_{g∈S′} g⁻¹α)`.
pub fn orbit_join_entropy(alpha: &Partition, sys: &SystemAction, elements: &[GroupElement]) -> Result<f64> {
    let family = sys.orbit_partitions(alpha, elements)?;
    join_entropy(alpha.space(), &family)
}

fn two_set(set: &MeasurableSet, sys: &SystemAction) -> Result<Partition> {
    Partition::new(sys.space(), vec![set.clone(), set.complement()?])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubadditivityRow {
    pub window_size: usize,
    pub union_term: f64,
    pub a_term: f64,
    pub b_term: f64,
    pub holds: bool,
}

/// `H(∨ g⁻¹{A∪B, ·}) ≤ H(∨ g⁻¹{A, ·}) + H(∨ g⁻¹{B, ·})` for every window.
pub fn union_subadditivity_check(
    a: &MeasurableSet,
    b: &MeasurableSet,
    sys: &SystemAction,
    windows: &[Vec<GroupElement>],
) -> Result<Vec<SubadditivityRow>> {
    let pa = two_set(a, sys)?;
    let pb = two_set(b, sys)?;
    let pu = two_set(&a.union(b)?, sys)?;
    windows
        .iter()
        .map(|w| {
            let union_term = orbit_join_entropy(&pu, sys, w)?;
            let a_term = orbit_join_entropy(&pa, sys, w)?;
            let b_term = orbit_join_entropy(&pb, sys, w)?;
            Ok(SubadditivityRow {
                window_size: w.len(),
                union_term,
                a_term,
                b_term,
                holds: union_term <= a_term + b_term + INEQUALITY_TOL,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure_space::MeasureSpace;
    use crate::rational::Rational;

    fn half() -> Partition {
        Partition::from_cuts(&[Rational::new(1, 2)]).unwrap()
    }

    #[test]
    fn combinations_enumerate_in_order() {
        assert_eq!(combinations(4, 2), vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
        assert_eq!(binomial(12, 6), 924);
    }

    #[test]
    fn doubling_sequence_is_log_two() {
        let sys = SystemAction::doubling();
        let s: Vec<GroupElement> = (0..12).map(|i| vec![i]).collect();
        let seq = sys.orbit_partitions(&half(), &s).unwrap();
        for p in sequence_entropy_estimate(&seq, 12).unwrap() {
            assert!((p.rate - std::f64::consts::LN_2).abs() < 1e-12);
        }
    }

    #[test]
    fn singleton_and_trivial_families() {
        let e = max_pattern_profile(&[half()], 5, Strategy::Exhaustive).unwrap();
        assert!((e.p_star - std::f64::consts::LN_2).abs() < 1e-15);
        let t = Partition::trivial(&MeasureSpace::interval());
        assert_eq!(max_pattern_profile(&[t], 3, Strategy::Greedy).unwrap().p_star, 0.0);
    }

    #[test]
    fn fekete_examples() {
        let l = std::f64::consts::LN_2;
        let c = fekete_rate(&[1, 2, 3], &[l, 2.0 * l, 3.0 * l], BoundKind::Exact).unwrap();
        assert!((c.rate - l).abs() < 1e-15);
        let c = fekete_rate(&[1, 2, 3], &[1.0, 1.0, 1.0], BoundKind::Exact).unwrap();
        assert_eq!((c.rate, c.attained_at), (1.0 / 3.0, 3));
        assert!(fekete_rate(&[1], &[1.0], BoundKind::LowerBound).is_err());
    }
}
