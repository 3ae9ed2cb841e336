//! Two constructive lemmas used by the recovery argument.
//!
//! * [`split_with_small_remainder`]: cut a set `P` into `N = ⌈|P|/β⌉` parts, the
//!   first `N−1` consecutive with measure `β`, and a remainder whose integral is
//!   at most a `1/N` share of the total.
//! * [`pigeonhole_shrink`]: inside `S × S'` find `T × T'` with `|T| = |T'| = α|S|`
//!   whose average is at least the average over `S × S'`.

use crate::error::{Error, Result};
use crate::graphon::{CellSet, StepGraphon};
use serde::Serialize;

/// A finite union of disjoint intervals in `[0, 1]`, sorted.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct IntervalSet {
    intervals: Vec<(f64, f64)>,
}

impl IntervalSet {
    /// Validates and normalizes: empty pieces are dropped and touching ones merged.
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        intervals.retain(|&(a, b)| b > a);
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(a, b) in &intervals {
            if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
                return Err(Error::invalid(format!("interval ({a}, {b}) leaves [0,1]")));
            }
        }
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
        for (a, b) in intervals {
            match merged.last_mut() {
                Some(last) if a < last.1 => {
                    return Err(Error::invalid("intervals overlap"));
                }
                Some(last) if a == last.1 => last.1 = b,
                _ => merged.push((a, b)),
            }
        }
        Ok(IntervalSet { intervals: merged })
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![(a, b)])
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn inf(&self) -> Option<f64> {
        self.intervals.first().map(|i| i.0)
    }

    pub fn sup(&self) -> Option<f64> {
        self.intervals.last().map(|i| i.1)
    }

    /// Measure of the intersection with another set.
    pub fn overlap(&self, other: &IntervalSet) -> f64 {
        let mut acc = 0.0;
        for &(a, b) in &self.intervals {
            for &(c, d) in &other.intervals {
                acc += (b.min(d) - a.max(c)).max(0.0);
            }
        }
        acc
    }
}

/// A step function on `[0,1]`: `values[k]` on `[breaks[k], breaks[k+1])`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepFunction {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || breaks.len() != values.len() + 1 {
            return Err(Error::invalid("need one more break than values"));
        }
        if breaks[0] != 0.0 || *breaks.last().unwrap() != 1.0 {
            return Err(Error::invalid("breaks must start at 0 and end at 1"));
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("breaks must be strictly increasing"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("values must be finite"));
        }
        Ok(StepFunction { breaks, values })
    }

    /// Equal pieces, e.g. a row profile of a step graphon.
    pub fn uniform(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        let breaks = (0..=n).map(|k| k as f64 / n as f64).collect();
        Self::new(breaks, values)
    }

    /// `∫_a^b u`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let mut acc = 0.0;
        for (k, v) in self.values.iter().enumerate() {
            let lo = self.breaks[k].max(a);
            let hi = self.breaks[k + 1].min(b);
            if hi > lo {
                acc += v * (hi - lo);
            }
        }
        acc
    }

    pub fn integral_over(&self, set: &IntervalSet) -> f64 {
        set.intervals.iter().map(|&(a, b)| self.integral(a, b)).sum()
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SplitResult {
    pub parts: Vec<IntervalSet>,
    pub remainder_index: usize,
}

/// Parametrizes `P` by "measure so far": `s ∈ [0, |P|]`.
struct Arc<'a> {
    p: &'a IntervalSet,
    starts: Vec<f64>,
    total: f64,
}

impl<'a> Arc<'a> {
    fn new(p: &'a IntervalSet) -> Self {
        let mut starts = Vec::with_capacity(p.intervals.len());
        let mut acc = 0.0;
        for &(a, b) in &p.intervals {
            starts.push(acc);
            acc += b - a;
        }
        Arc {
            p,
            starts,
            total: acc,
        }
    }

    /// Points of `P` whose coordinate lies in `[s0, s1]`.
    fn slice(&self, s0: f64, s1: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for (k, &(a, b)) in self.p.intervals.iter().enumerate() {
            let c0 = self.starts[k];
            let c1 = c0 + (b - a);
            let lo = s0.max(c0);
            let hi = s1.min(c1);
            if hi > lo {
                let x0 = a + (lo - c0);
                let x1 = if hi >= c1 { b } else { a + (hi - c0) };
                out.push((x0, x1));
            }
        }
        out
    }

    /// `G(s) = ∫ u` over the part of `P` with coordinate below `s`.
    fn cumulative(&self, u: &StepFunction, s: f64) -> f64 {
        self.slice(0.0, s)
            .iter()
            .map(|&(a, b)| u.integral(a, b))
            .sum()
    }

    /// Coordinates where `G` changes slope.
    fn kinks(&self, u: &StepFunction) -> Vec<f64> {
        let mut out = vec![0.0];
        for (k, &(a, b)) in self.p.intervals.iter().enumerate() {
            let c0 = self.starts[k];
            out.push(c0);
            for &x in u.breaks() {
                if x > a && x < b {
                    out.push(c0 + (x - a));
                }
            }
        }
        out
    }
}

/// Partitions `P` into `N = ⌈|P|/β⌉` sets with `P_1 ≤ … ≤ P_{N−1}` each of
/// measure `β` and a remainder `P_N` with `|∫_{P_N} u| ≤ |∫_P u| / N`.
///
/// The remainder is a cyclic window of `P` of measure `δ = |P| − β(N−1)`. The
/// window integral `F(t)` is continuous and piecewise linear in the start `t`
/// with average `(δ/|P|) ∫_P u`, and `δ/|P| ≤ 1/N`, so some window qualifies.
/// All kinks of `F` are scanned, preferring windows toward the right end of
/// `P`; between kinks the crossing is found by solving the linear equation.
pub fn split_with_small_remainder(u: &StepFunction, p: &IntervalSet, beta: f64) -> Result<SplitResult> {
    let arc = Arc::new(p);
    let size = arc.total;
    if !(beta > 0.0 && beta < size) {
        return Err(Error::invalid(format!(
            "beta must lie in (0, |P|) = (0, {size}), got {beta}"
        )));
    }
    let total = u.integral_over(p);
    if total.abs() < 1e-14 {
        return Err(Error::precondition("the integral of u over P vanishes"));
    }
    let n = ((size / beta) - 1e-12).ceil().max(2.0) as usize;
    let delta = size - beta * (n - 1) as f64;
    let target = total.abs() / n as f64;

    let g = |s: f64| arc.cumulative(u, s);
    // Window [t, t+δ) taken cyclically.
    let window = |t: f64| {
        let end = t + delta;
        if end <= size {
            g(end) - g(t)
        } else {
            total - g(t) + g(end - size)
        }
    };

    let mut cand: Vec<f64> = Vec::new();
    for k in arc.kinks(u) {
        cand.push(k);
        cand.push((k - delta).rem_euclid(size));
    }
    cand.push(size - delta);
    cand.retain(|&t| (0.0..size).contains(&t));
    cand.sort_by(|a, b| b.total_cmp(a));
    cand.dedup_by(|a, b| (*a - *b).abs() < 1e-15);

    let vals: Vec<f64> = cand.iter().map(|&t| window(t)).collect();
    let ok = |v: f64| v.abs() <= target;
    let mut start = cand.iter().zip(&vals).find(|(_, &v)| ok(v)).map(|(&t, _)| t);
    if start.is_none() {
        // Adjacent kinks (cyclically) on opposite sides: F is linear in between.
        let m = cand.len();
        for q in 0..m {
            let (t0, t1) = (cand[(q + 1) % m], cand[q]);
            let (v0, v1) = (vals[(q + 1) % m], vals[q]);
            if v0.signum() != v1.signum() {
                let span = if t1 > t0 { t1 - t0 } else { t1 + size - t0 };
                let t = (t0 + span * v0 / (v0 - v1)).rem_euclid(size);
                if ok(window(t)) {
                    start = Some(t);
                    break;
                }
            }
        }
    }
    let t = start.ok_or_else(|| {
        Error::SearchExhausted("no remainder window met the integral bound".into())
    })?;

    let end = t + delta;
    let (rem_pieces, rest): (Vec<(f64, f64)>, Vec<(f64, f64)>) = if end <= size {
        let mut rest = arc.slice(0.0, t);
        rest.extend(arc.slice(end, size));
        (arc.slice(t, end), rest)
    } else {
        let mut rem = arc.slice(0.0, end - size);
        rem.extend(arc.slice(t, size));
        (rem, arc.slice(end - size, t))
    };

    // Chop the rest, left to right, into consecutive pieces of measure β.
    let rest_set = IntervalSet::new(rest)?;
    let rest_arc = Arc::new(&rest_set);
    let mut parts = Vec::with_capacity(n);
    for i in 0..n - 1 {
        let hi = if i == n - 2 {
            rest_arc.total
        } else {
            (i + 1) as f64 * beta
        };
        parts.push(IntervalSet::new(rest_arc.slice(i as f64 * beta, hi))?);
    }
    parts.push(IntervalSet::new(rem_pieces)?);
    let out = SplitResult {
        parts,
        remainder_index: n - 1,
    };
    verify_split(u, p, beta, &out).map_err(Error::Internal)?;
    Ok(out)
}

/// Checks the partition and conditions (i)–(iii); measures to `1e-12`,
/// the integral bound to `1e-9`.
pub fn verify_split(u: &StepFunction, p: &IntervalSet, beta: f64, r: &SplitResult) -> Result<(), String> {
    let size = p.measure();
    let n = ((size / beta) - 1e-12).ceil().max(2.0) as usize;
    if r.parts.len() != n || r.remainder_index != n - 1 {
        return Err(format!("expected {n} parts, got {}", r.parts.len()));
    }
    let mut covered = 0.0;
    for (i, part) in r.parts.iter().enumerate() {
        let inside = part.overlap(p);
        if (inside - part.measure()).abs() > 1e-12 {
            return Err(format!("part {i} leaves P"));
        }
        covered += part.measure();
        for other in &r.parts[i + 1..] {
            if part.overlap(other) > 1e-12 {
                return Err(format!("part {i} overlaps a later part"));
            }
        }
    }
    if (covered - size).abs() > 1e-12 {
        return Err(format!("parts cover {covered}, P has measure {size}"));
    }
    for (i, part) in r.parts[..n - 1].iter().enumerate() {
        if (part.measure() - beta).abs() > 1e-12 {
            return Err(format!("part {i} has measure {} instead of {beta}", part.measure()));
        }
    }
    for i in 0..n.saturating_sub(2) {
        let (a, b) = (&r.parts[i], &r.parts[i + 1]);
        if a.sup().unwrap_or(0.0) > b.inf().unwrap_or(1.0) + 1e-12 {
            return Err(format!("parts {i} and {} are out of order", i + 1));
        }
    }
    if r.parts[n - 1].measure() > beta + 1e-12 {
        return Err("remainder exceeds beta".into());
    }
    let total = u.integral_over(p).abs();
    let rem = u.integral_over(&r.parts[n - 1]).abs();
    if rem > total / n as f64 + 1e-9 {
        return Err(format!("remainder integral {rem} exceeds {}", total / n as f64));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ShrinkResult {
    pub t: CellSet,
    pub tp: CellSet,
    /// `∬_{T×T'} f / |T×T'|`.
    pub density: f64,
    /// `C / |S×S'|`, the guaranteed lower bound.
    pub bound: f64,
}

fn top(score: &[f64], pool: &[usize], l: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pool.len()).collect();
    idx.sort_by(|&a, &b| score[b].total_cmp(&score[a]).then(a.cmp(&b)));
    let mut out: Vec<usize> = idx[..l].iter().map(|&q| pool[q]).collect();
    out.sort_unstable();
    out
}

fn block_sum(f: &StepGraphon, s: &[usize], t: &[usize]) -> f64 {
    s.iter().map(|&i| t.iter().map(|&j| f.get(i, j)).sum::<f64>()).sum()
}

/// Best `J ⊆ S'` of size `l` for fixed rows `rows`.
fn best_cols(f: &StepGraphon, rows: &[usize], sp: &[usize], l: usize) -> Vec<usize> {
    let col: Vec<f64> = sp
        .iter()
        .map(|&j| rows.iter().map(|&i| f.get(i, j)).sum())
        .collect();
    top(&col, sp, l)
}

/// Largest chunk count handled by the exhaustive fallback.
pub const EXHAUSTIVE_CHUNKS: usize = 16;

/// Shrinks `S × S'` (cells of `f`'s grid) to `T × T'` with `|T| = |T'| = α|S|`
/// and average at least `C / |S×S'|`.
///
/// Columns are chosen first (top `l` column sums over `S`), then rows (top
/// `l` row sums over those columns); each step keeps at least an `l/k` share
/// of the mass, which is the averaging bound made constructive. The result is
/// verified, with an exhaustive search over row sets as fallback for up to
/// 16 chunks.
pub fn pigeonhole_shrink(
    f: &StepGraphon,
    s: &CellSet,
    sp: &CellSet,
    alpha: f64,
    c: f64,
) -> Result<ShrinkResult> {
    let n = f.n();
    if s.resolution() != n || sp.resolution() != n {
        return Err(Error::invalid("cell sets must use the graphon's grid"));
    }
    if s.len() != sp.len() || s.is_empty() {
        return Err(Error::invalid("S and S' must be nonempty with equal measure"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0,1), got {alpha}")));
    }
    if !(c > 0.0) {
        return Err(Error::invalid("C must be positive"));
    }
    let k = s.len();
    let lf = alpha * k as f64;
    let l = lf.round() as usize;
    if (lf - l as f64).abs() > 1e-9 || l == 0 {
        return Err(Error::invalid(format!(
            "alpha·|S| = {lf} cells is not a positive whole number of cells"
        )));
    }
    let cell = 1.0 / (n * n) as f64;
    let mass = block_sum(f, s.indices(), sp.indices()) * cell;
    if mass < c - 1e-12 {
        return Err(Error::precondition(format!(
            "∬_(S×S') f = {mass} is below C = {c}"
        )));
    }
    let area = |len: usize| (len * len) as f64 * cell;
    let bound = c / area(k);
    let density_of = |t: &[usize], tp: &[usize]| block_sum(f, t, tp) * cell / area(l);

    let rows_all = s.indices();
    let cols = best_cols(f, rows_all, sp.indices(), l);
    let row_score: Vec<f64> = rows_all
        .iter()
        .map(|&i| cols.iter().map(|&j| f.get(i, j)).sum())
        .collect();
    let rows = top(&row_score, rows_all, l);
    let mut density = density_of(&rows, &cols);
    let (mut t, mut tp) = (rows, cols);

    if density < bound - 1e-12 {
        if k > EXHAUSTIVE_CHUNKS {
            return Err(Error::Internal(format!(
                "greedy density {density} below bound {bound}"
            )));
        }
        for mask in 0u32..(1u32 << k) {
            if mask.count_ones() as usize != l {
                continue;
            }
            let rows: Vec<usize> = (0..k).filter(|&q| mask >> q & 1 == 1).map(|q| rows_all[q]).collect();
            let cols = best_cols(f, &rows, sp.indices(), l);
            let d = density_of(&rows, &cols);
            if d > density {
                density = d;
                t = rows;
                tp = cols;
            }
        }
        if density < bound - 1e-12 {
            return Err(Error::Internal(format!(
                "no {l}×{l} sub-block reaches density {bound}"
            )));
        }
    }
    Ok(ShrinkResult {
        t: CellSet::new(n, t)?,
        tp: CellSet::new(n, tp)?,
        density,
        bound,
    })
}
