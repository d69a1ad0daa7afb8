//! Square min-cost assignment.
//!
//! Shortest augmenting path Hungarian method with row/column potentials,
//! `O(n³)`. Generic over the cost type so interval partitions can be matched
//! in exact rational arithmetic.

use crate::rational::Rational;

pub trait Cost: Clone + PartialOrd {
    fn zero() -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
}

impl Cost for f64 {
    fn zero() -> f64 {
        0.0
    }
    fn plus(&self, other: &f64) -> f64 {
        self + other
    }
    fn minus(&self, other: &f64) -> f64 {
        self - other
    }
}

impl Cost for i64 {
    fn zero() -> i64 {
        0
    }
    fn plus(&self, other: &i64) -> i64 {
        self + other
    }
    fn minus(&self, other: &i64) -> i64 {
        self - other
    }
}

impl Cost for Rational {
    fn zero() -> Rational {
        Rational::ZERO
    }
    fn plus(&self, other: &Rational) -> Rational {
        self + other
    }
    fn minus(&self, other: &Rational) -> Rational {
        self - other
    }
}

/// Returns `(total, perm)` with `perm[i]` the column assigned to row `i`.
///
/// # Panics
/// If `cost` is not square.
pub fn min_cost_assignment<T: Cost>(cost: &[Vec<T>]) -> (T, Vec<usize>) {
    let n = cost.len();
    assert!(cost.iter().all(|row| row.len() == n), "cost matrix must be square");
    if n == 0 {
        return (T::zero(), Vec::new());
    }
    // 1-based internals; column 0 is the virtual start column.
    let mut u = vec![T::zero(); n + 1];
    let mut v = vec![T::zero(); n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0usize;
        let mut minv: Vec<Option<T>> = vec![None; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta: Option<T> = None;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1].minus(&u[i0]).minus(&v[j]);
                if minv[j].as_ref().is_none_or(|m| cur < *m) {
                    minv[j] = Some(cur);
                    way[j] = j0;
                }
                let mj = minv[j].as_ref().expect("set above");
                if delta.as_ref().is_none_or(|d| mj < d) {
                    delta = Some(mj.clone());
                    j1 = j;
                }
            }
            let delta = delta.expect("an unused column remains");
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] = u[row_of[j]].plus(&delta);
                    v[j] = v[j].minus(&delta);
                } else if let Some(m) = &mut minv[j] {
                    *m = m.minus(&delta);
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0usize; n];
    for j in 1..=n {
        perm[row_of[j] - 1] = j - 1;
    }
    let total = perm.iter().enumerate().fold(T::zero(), |acc, (i, &j)| acc.plus(&cost[i][j]));
    (total, perm)
}

/// Minimum over all `n!` permutations. Test oracle; intended for `n ≤ 8`.
pub fn brute_force_assignment<T: Cost>(cost: &[Vec<T>]) -> (T, Vec<usize>) {
    let n = cost.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let total = |p: &[usize]| p.iter().enumerate().fold(T::zero(), |acc, (i, &j)| acc.plus(&cost[i][j]));
    let mut best = (total(&perm), perm.clone());
    // Heap's algorithm
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            let t = total(&perm);
            if t < best.0 {
                best = (t, perm.clone());
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}
