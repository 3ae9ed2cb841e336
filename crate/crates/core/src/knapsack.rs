//! Fractional selection of sets of prescribed measure against a step graphon.
//!
//! A candidate side is an interval `[lo, hi]`; each grid cell meeting it can
//! contribute any amount between 0 and its overlap length. For a fixed
//! opposite side the objective `Σ s_p t_q w_pq` is linear in the amounts, so the
//! best choice of total mass `α` is a fractional knapsack: fill cells in order
//! of their profile value, with at most one cell taken partially.

use crate::error::{Error, Result};
use crate::graphon::StepGraphon;
use std::cmp::Ordering;

/// Overlaps shorter than this are dropped from a side.
const MIN_OVERLAP: f64 = 1e-15;

/// Cells meeting an interval, with the length of each overlap.
#[derive(Clone, Debug)]
pub(crate) struct Side {
    pub cells: Vec<usize>,
    pub caps: Vec<f64>,
}

impl Side {
    pub fn interval(n: usize, lo: f64, hi: f64) -> Side {
        let lo = lo.max(0.0);
        let hi = hi.min(1.0);
        let mut cells = Vec::new();
        let mut caps = Vec::new();
        if hi > lo {
            let nf = n as f64;
            let first = ((lo * nf).floor() as usize).min(n - 1);
            let last = ((hi * nf).ceil() as usize).clamp(first + 1, n);
            for i in first..last {
                let a = (i as f64 / nf).max(lo);
                let b = ((i + 1) as f64 / nf).min(hi);
                if b - a > MIN_OVERLAP {
                    cells.push(i);
                    caps.push(b - a);
                }
            }
        }
        Side { cells, caps }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn total(&self) -> f64 {
        self.caps.iter().sum()
    }

    /// Fill mass `budget` greedily in the given order of positions.
    fn fill(&self, order: impl Iterator<Item = usize>, budget: f64) -> Vec<f64> {
        let mut amounts = vec![0.0; self.len()];
        let mut left = budget;
        for p in order {
            if left <= 0.0 {
                break;
            }
            let take = self.caps[p].min(left);
            amounts[p] = take;
            left -= take;
        }
        amounts
    }

    /// Optimal amounts of total mass `budget` for a per-position `profile`:
    /// largest profile first when maximizing, smallest first otherwise, ties
    /// to the smaller cell index.
    pub fn knapsack(&self, profile: &[f64], budget: f64, maximize: bool) -> Vec<f64> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        let cmp = |&a: &usize, &b: &usize| {
            let o = profile[a].partial_cmp(&profile[b]).unwrap_or(Ordering::Equal);
            let o = if maximize { o.reverse() } else { o };
            o.then(a.cmp(&b))
        };
        // Only the first few positions are used; a partial selection avoids a full sort.
        let min_cap = self.caps.iter().copied().fold(f64::INFINITY, f64::min);
        let need = ((budget / min_cap).ceil() as usize + 2).min(order.len());
        if need < order.len() && need > 0 {
            order.select_nth_unstable_by(need - 1, cmp);
            order.truncate(need);
        }
        order.sort_by(cmp);
        self.fill(order.into_iter(), budget)
    }

    /// Amounts for the window of the given mass nearest to `anchor_high`
    /// (highest cells first) or to the low end.
    pub fn window(&self, budget: f64, from_high: bool) -> Vec<f64> {
        if from_high {
            self.fill((0..self.len()).rev(), budget)
        } else {
            self.fill(0..self.len(), budget)
        }
    }

    pub fn full(&self) -> Vec<f64> {
        self.caps.clone()
    }
}

/// `p_a = Σ_b amounts_b · w[a][b]` over the support of `amounts`.
pub(crate) fn profile(w: &StepGraphon, this: &Side, other: &Side, amounts: &[f64]) -> Vec<f64> {
    let support: Vec<(usize, f64)> = other
        .cells
        .iter()
        .zip(amounts)
        .filter(|(_, &a)| a > 0.0)
        .map(|(&c, &a)| (c, a))
        .collect();
    this.cells
        .iter()
        .map(|&i| {
            let row = w.row(i);
            support.iter().map(|&(j, a)| a * row[j]).sum()
        })
        .collect()
}

pub(crate) fn objective(w: &StepGraphon, s: &Side, sa: &[f64], t: &Side, ta: &[f64]) -> f64 {
    let p = profile(w, s, t, ta);
    p.iter().zip(sa).map(|(a, b)| a * b).sum()
}

/// Alternating best responses from a start on side `s`. Returns the best
/// objective seen (the start's own best response included).
pub(crate) fn alternate(
    w: &StepGraphon,
    s: &Side,
    t: &Side,
    budget: f64,
    maximize: bool,
    mut sa: Vec<f64>,
) -> f64 {
    let better = |a: f64, b: f64| if maximize { a > b } else { a < b };
    let mut best = if maximize {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    };
    for _ in 0..64 {
        let ta = t.knapsack(&profile(w, t, s, &sa), budget, maximize);
        let sa2 = s.knapsack(&profile(w, s, t, &ta), budget, maximize);
        let v = objective(w, s, &sa2, t, &ta);
        if !better(v, best) {
            break;
        }
        best = v;
        if sa2 == sa {
            break;
        }
        sa = sa2;
    }
    best
}

/// Value of a fixed start pair, then improved by alternation.
pub(crate) fn from_pair(
    w: &StepGraphon,
    s: &Side,
    t: &Side,
    budget: f64,
    maximize: bool,
    sa: Vec<f64>,
    ta: &[f64],
) -> f64 {
    let start = objective(w, s, &sa, t, ta);
    let run = alternate(w, s, t, budget, maximize, sa);
    if maximize {
        start.max(run)
    } else {
        start.min(run)
    }
}

/// Largest candidate count for which the exact search enumerates vertices.
pub(crate) const EXACT_SIDE_CAP: usize = 14;

/// Exact maximum of the bilinear objective: enumerate the vertices of the
/// smaller side's polytope (at most one fractional cell) and best-respond on
/// the other side.
pub(crate) fn exact_max(w: &StepGraphon, s: &Side, t: &Side, budget: f64) -> Result<f64> {
    let (a, b) = if s.len() <= t.len() { (s, t) } else { (t, s) };
    if a.len() > EXACT_SIDE_CAP {
        return Err(Error::CapExceeded {
            what: "exact window search candidate cells",
            size: a.len(),
            cap: EXACT_SIDE_CAP,
        });
    }
    let k = a.len();
    let eps = 1e-13;
    let mut best = f64::NEG_INFINITY;
    let mut eval = |amounts: &[f64]| {
        let bt = b.knapsack(&profile(w, b, a, amounts), budget, true);
        let v = objective(w, a, amounts, b, &bt);
        if v > best {
            best = v;
        }
    };
    for mask in 0u32..(1u32 << k) {
        let sum: f64 = (0..k).filter(|&p| mask >> p & 1 == 1).map(|p| a.caps[p]).sum();
        if sum > budget + eps {
            continue;
        }
        let mut amounts: Vec<f64> = (0..k)
            .map(|p| if mask >> p & 1 == 1 { a.caps[p] } else { 0.0 })
            .collect();
        if (sum - budget).abs() <= eps {
            eval(&amounts);
            continue;
        }
        let rest = budget - sum;
        for f in 0..k {
            if mask >> f & 1 == 0 && a.caps[f] > rest + eps {
                amounts[f] = rest;
                eval(&amounts);
                amounts[f] = 0.0;
            }
        }
    }
    Ok(best)
}
