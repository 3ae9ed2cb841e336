//! Black, white and grey regions and the strata `R_k`.
//!
//! For levels `k = 0..=mM` on the upper triangle `Δ = {x ≤ y}`:
//!
//! * `B_k`: `x = y`, or some `α × α` rectangle inside `UL(x,y) = [0,x]×[y,1]`
//!   has average `> k/m`;
//! * `V_k`: not in `B_k`, and some `S × T` inside `LR(x,y) = [x,y]² ∩ Δ` with
//!   `|S| = |T| = α` has average `≤ k/m`;
//! * `G_k = Δ ∖ (B_k ∪ V_k)`, `R_k = B_k ∩ V_{k+1}`, with `B_0 = V_{mM} = Δ` and
//!   `V_0 = B_{mM} = ∅`.
//!
//! Membership is decided at pixel centres of a `raster × raster` grid. The UL
//! test uses heuristic lower bounds on the supremum and the LR test heuristic
//! upper bounds on the infimum, so every pixel placed in `B_k` or `V_k` is
//! there for a certified rectangle.

use crate::error::{Error, Result};
use crate::graphon::{SearchMode, StepGraphon};
use crate::knapsack::{alternate, from_pair, Side};
use crate::robinson::{ul_sup, FEASIBILITY_GUARD};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;

/// Per-pixel classification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Label {
    /// Below the diagonal; not part of `Δ`.
    Outside,
    /// In `R_k` for the pixel's `k`.
    Stratum,
    /// In `G_k` for `k` from the pixel's `k` up to the first white level minus one.
    Grey,
}

/// A set of pixels stored as bits, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PixelSet {
    side: usize,
    bits: Vec<u64>,
}

impl PixelSet {
    pub fn new(side: usize) -> Self {
        PixelSet {
            side,
            bits: vec![0; (side * side).div_ceil(64)],
        }
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        let p = i * self.side + j;
        self.bits[p / 64] >> (p % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, on: bool) {
        let p = i * self.side + j;
        if on {
            self.bits[p / 64] |= 1 << (p % 64);
        } else {
            self.bits[p / 64] &= !(1 << (p % 64));
        }
    }

    pub fn count(&self) -> usize {
        self.bits.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&b| b == 0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum CurveKind {
    F,
    G,
}

/// A non-decreasing step boundary: height `z[i]` on `[x[i], x[i+1])`, with
/// vertical segments joining consecutive heights. The last step ends at 1.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundaryCurve {
    pub kind: CurveKind,
    pub level: usize,
    pub samples: Vec<(f64, f64)>,
}

impl BoundaryCurve {
    pub fn new(kind: CurveKind, level: usize, samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("a curve needs at least one sample"));
        }
        if samples.windows(2).any(|w| w[0].0 >= w[1].0 || w[0].1 > w[1].1) {
            return Err(Error::invalid(
                "curve samples need increasing x and non-decreasing z",
            ));
        }
        Ok(BoundaryCurve {
            kind,
            level,
            samples,
        })
    }

    /// Lowest and highest curve height over the vertical line at `x`.
    fn range_at(&self, x: f64) -> (f64, f64) {
        let s = &self.samples;
        let k = s.partition_point(|p| p.0 <= x);
        if k == 0 {
            return (s[0].1, s[0].1);
        }
        let here = s[k - 1];
        if here.0 == x && k >= 2 {
            // On a jump: the vertical segment spans both heights.
            (s[k - 2].1, here.1)
        } else {
            (here.1, here.1)
        }
    }
}

/// True iff the top-left corner `(x0, z1)` of the rectangle is strictly above
/// the curve and its bottom-right corner `(x1, z0)` strictly below it.
pub fn cell_crosses(x0: f64, x1: f64, z0: f64, z1: f64, curve: &BoundaryCurve) -> bool {
    if x1 <= x0 || z1 <= z0 {
        return false;
    }
    let (_, hi) = curve.range_at(x0);
    let (lo, _) = curve.range_at(x1);
    z1 > hi && z0 < lo
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RegionMap {
    pub m: usize,
    /// `M = max(1, ⌈‖w‖_∞⌉)`.
    #[serde(rename = "M")]
    pub big_m: usize,
    pub alpha: f64,
    pub raster: usize,
    pub labels: Vec<Label>,
    /// For strata the `k` of `R_k`; for grey pixels the lowest grey level.
    pub k_index: Vec<usize>,
    /// Largest `k` with the pixel in `B_k`.
    pub black_level: Vec<usize>,
    /// Smallest `k` with the pixel in `V_k`.
    pub white_level: Vec<usize>,
    /// Lower bound on `R_w^α` at each pixel centre (upper triangle).
    pub ul: Vec<f64>,
    /// Upper bound on the LR infimum at each pixel centre (upper triangle).
    pub lr: Vec<f64>,
    /// `R_k` for `k = 0..mM`.
    pub strata: Vec<PixelSet>,
    /// `G_k` for `k = 0..=mM` (the end levels are always empty).
    pub grey: Vec<PixelSet>,
}

impl RegionMap {
    pub fn levels(&self) -> usize {
        self.m * self.big_m
    }

    pub fn center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.raster as f64
    }

    pub fn in_black(&self, k: usize, i: usize, j: usize) -> bool {
        i <= j && (k == 0 || (k < self.levels() && self.black_level[i * self.raster + j] >= k))
    }

    pub fn in_white(&self, k: usize, i: usize, j: usize) -> bool {
        i <= j && k >= self.white_level[i * self.raster + j]
    }

    /// `f_k`: top edge of `B_k` in each pixel column (`k < mM`).
    pub fn f_curve(&self, k: usize) -> BoundaryCurve {
        let r = self.raster;
        let samples = (0..r)
            .map(|i| {
                let top = (i..r).rev().find(|&j| self.in_black(k, i, j)).unwrap_or(i);
                (i as f64 / r as f64, (top + 1) as f64 / r as f64)
            })
            .collect();
        BoundaryCurve::new(CurveKind::F, k, samples).expect("black columns are monotone")
    }

    /// `g_k`: bottom edge of `V_k` in each pixel column, 1 where the column has none.
    pub fn g_curve(&self, k: usize) -> BoundaryCurve {
        let r = self.raster;
        let samples = (0..r)
            .map(|i| {
                let z = (i..r)
                    .find(|&j| self.in_white(k, i, j))
                    .map_or(1.0, |j| j as f64 / r as f64);
                (i as f64 / r as f64, z)
            })
            .collect();
        BoundaryCurve::new(CurveKind::G, k, samples).expect("white columns are monotone")
    }
}

fn lr_starts(w: &StepGraphon, x: f64, y: f64, alpha: f64, q_shift: f64) -> f64 {
    let n = w.n();
    let mut best = f64::INFINITY;
    let mut consider = |tau: f64, s_win: Option<(f64, f64)>, t_win: Option<(f64, f64)>| {
        let s = Side::interval(n, x, tau);
        let t = Side::interval(n, tau, y);
        if s.total() < alpha - FEASIBILITY_GUARD || t.total() < alpha - FEASIBILITY_GUARD {
            return;
        }
        let pick = |side: &Side, win: Option<(f64, f64)>, from_high: bool| match win {
            Some((a, b)) => {
                let inner = Side::interval(n, a, b);
                let mut amounts = vec![0.0; side.len()];
                for (c, cap) in inner.cells.iter().zip(&inner.caps) {
                    if let Some(p) = side.cells.iter().position(|d| d == c) {
                        amounts[p] = cap.min(side.caps[p]);
                    }
                }
                amounts
            }
            None => side.window(alpha, from_high),
        };
        let sa = pick(&s, s_win, true);
        let ta = pick(&t, t_win, false);
        let v = from_pair(w, &s, &t, alpha, false, sa, &ta);
        let v2 = alternate(w, &t, &s, alpha, false, ta);
        best = best.min(v).min(v2);
    };
    // Adjacent windows around the midpoint and around each feasible end.
    consider(0.5 * (x + y), None, None);
    consider(x + alpha, None, None);
    consider(y - alpha, None, None);
    // Corner windows S = [x, x+α], T = [y−α, y].
    consider(x + alpha, Some((x, x + alpha)), Some((y - alpha, y)));
    // The window the UL search starts from at the pixel shifted by q pixels
    // right and down; this pairing is what bounds the grey squares.
    let xs = x + q_shift;
    let ys = y - q_shift;
    if xs <= ys {
        consider(xs, Some((xs - alpha, xs)), Some((ys, ys + alpha)));
    }
    best
}

/// Heuristic upper bound on `inf { avg_{S×T} w : S×T ⊆ LR(x,y), |S| = |T| = α }`;
/// `+∞` when `y − x < 2α`.
pub fn lr_inf(w: &StepGraphon, x: f64, y: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0,1), got {alpha}")));
    }
    if y - x < 2.0 * alpha - FEASIBILITY_GUARD {
        return Ok(f64::INFINITY);
    }
    Ok(lr_starts(w, x, y, alpha, alpha) / (alpha * alpha))
}

/// Rasterizes the regions for levels `k/m`.
pub fn compute_regions(w: &StepGraphon, m: usize, alpha: f64, raster: usize) -> Result<RegionMap> {
    if m == 0 {
        return Err(Error::invalid("m must be at least 1"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0,1), got {alpha}")));
    }
    if raster == 0 {
        return Err(Error::invalid("raster must be positive"));
    }
    if !w.is_nonnegative() {
        return Err(Error::precondition("region maps need a nonnegative graphon"));
    }
    let big_m = (w.sup_norm().ceil() as usize).max(1);
    let levels = m * big_m;
    let r = raster;
    let mf = m as f64;
    let center = |i: usize| (i as f64 + 0.5) / r as f64;
    // Shift between the paired UL and LR windows, a whole number of pixels.
    let q = (alpha * r as f64 - 1e-12).ceil() as usize;
    let q_shift = q as f64 / r as f64;

    let cells: Vec<(usize, usize)> = (0..r).flat_map(|i| (i..r).map(move |j| (i, j))).collect();
    let raw: Vec<(f64, f64)> = cells
        .par_iter()
        .map(|&(i, j)| {
            let (x, y) = (center(i), center(j));
            let ul = ul_sup(w, x, y, alpha, SearchMode::Heuristic)?;
            let lr = if y - x < 2.0 * alpha - FEASIBILITY_GUARD {
                f64::INFINITY
            } else {
                lr_starts(w, x, y, alpha, q_shift) / (alpha * alpha)
            };
            Ok((ul, lr))
        })
        .collect::<Result<_>>()?;

    let mut ul = vec![f64::NAN; r * r];
    let mut lr = vec![f64::NAN; r * r];
    for (&(i, j), &(a, b)) in cells.iter().zip(&raw) {
        ul[i * r + j] = a;
        lr[i * r + j] = b;
    }
    // Max-envelope (non-decreasing in i, non-increasing in j) keeps lower bounds valid.
    for i in 0..r {
        for j in (i..r).rev() {
            let mut v = ul[i * r + j];
            if i > 0 && i - 1 <= j {
                v = v.max(ul[(i - 1) * r + j]);
            }
            if j + 1 < r {
                v = v.max(ul[i * r + j + 1]);
            }
            ul[i * r + j] = v;
        }
    }
    // Min-envelope over smaller LR squares: i' >= i, j' <= j.
    for i in (0..r).rev() {
        for j in i..r {
            let mut v = lr[i * r + j];
            if i < j {
                v = v.min(lr[(i + 1) * r + j]);
            }
            if j > i {
                v = v.min(lr[i * r + j - 1]);
            }
            lr[i * r + j] = v;
        }
    }

    let mut labels = vec![Label::Outside; r * r];
    let mut k_index = vec![0usize; r * r];
    let mut black_level = vec![0usize; r * r];
    let mut white_level = vec![levels; r * r];
    let mut strata = vec![PixelSet::new(r); levels];
    let mut grey = vec![PixelSet::new(r); levels + 1];

    for i in 0..r {
        for j in i..r {
            let p = i * r + j;
            // kb: largest k < mM with ul > k/m (diagonal pixels: all of them).
            let kb = if i == j {
                levels - 1
            } else {
                let mut k = ((ul[p] * mf).ceil() as i64 - 1).clamp(0, levels as i64 - 1) as usize;
                while k + 1 < levels && ul[p] > (k + 1) as f64 / mf {
                    k += 1;
                }
                while k > 0 && ul[p] <= k as f64 / mf {
                    k -= 1;
                }
                k
            };
            // kv: smallest k > kb with lr <= k/m, else mM.
            let kv = if lr[p].is_finite() {
                let mut k = ((lr[p] * mf).ceil().max(0.0) as usize).clamp(kb + 1, levels);
                while k > kb + 1 && lr[p] <= (k - 1) as f64 / mf {
                    k -= 1;
                }
                while k < levels && lr[p] > k as f64 / mf {
                    k += 1;
                }
                k
            } else {
                levels
            };
            black_level[p] = kb;
            white_level[p] = kv;
            if kv == kb + 1 {
                labels[p] = Label::Stratum;
                k_index[p] = kb;
                strata[kb].set(i, j, true);
            } else {
                labels[p] = Label::Grey;
                k_index[p] = kb + 1;
                for g in grey.iter_mut().take(kv).skip(kb + 1) {
                    g.set(i, j, true);
                }
            }
        }
    }

    Ok(RegionMap {
        m,
        big_m,
        alpha,
        raster: r,
        labels,
        k_index,
        black_level,
        white_level,
        ul,
        lr,
        strata,
        grey,
    })
}

/// True iff the strata are pairwise disjoint, miss the grey pixels, and together
/// with the grey pixels cover `Δ` exactly.
/// One line per pixel of Δ: `i,j,x,y,label,k` with `(x, y)` the pixel centre.
pub fn regions_csv(rm: &RegionMap) -> String {
    let r = rm.raster;
    let mut out = String::with_capacity(r * r * 24 + 32);
    out.push_str("i,j,x,y,label,k\n");
    for i in 0..r {
        for j in i..r {
            let p = i * r + j;
            let label = match rm.labels[p] {
                Label::Outside => continue,
                Label::Stratum => "stratum",
                Label::Grey => "grey",
            };
            let _ = writeln!(out, "{i},{j},{},{},{label},{}", rm.center(i), rm.center(j), rm.k_index[p]);
        }
    }
    out
}

pub fn verify_partition(rm: &RegionMap) -> bool {
    let r = rm.raster;
    if rm.strata.len() != rm.levels() || rm.grey.len() != rm.levels() + 1 {
        return false;
    }
    for i in 0..r {
        for j in 0..r {
            let hits = rm.strata.iter().filter(|s| s.contains(i, j)).count();
            let greys = rm.grey.iter().filter(|g| g.contains(i, j)).count();
            if i > j {
                if hits + greys > 0 {
                    return false;
                }
                continue;
            }
            if hits > 1 || (hits == 1 && greys > 0) || hits + greys == 0 {
                return false;
            }
        }
    }
    true
}

/// Side, in measure units, of the largest axis-parallel square of `G_k` pixels.
pub fn largest_grey_square(rm: &RegionMap, k: usize) -> f64 {
    let Some(g) = rm.grey.get(k) else {
        return 0.0;
    };
    let r = rm.raster;
    let mut dp = vec![0usize; r * r];
    let mut best = 0;
    for i in 0..r {
        for j in 0..r {
            if !g.contains(i, j) {
                continue;
            }
            let v = if i == 0 || j == 0 {
                1
            } else {
                1 + dp[(i - 1) * r + j]
                    .min(dp[i * r + j - 1])
                    .min(dp[(i - 1) * r + j - 1])
            };
            dp[i * r + j] = v;
            best = best.max(v);
        }
    }
    best as f64 / r as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_one_example() {
        let w = StepGraphon::constant(4, 1.0).unwrap();
        let (alpha, r) = (0.25, 32);
        let rm = compute_regions(&w, 2, alpha, r).unwrap();
        assert_eq!(rm.big_m, 1);
        assert!(verify_partition(&rm));
        for i in 0..r {
            for j in i..r {
                let (x, y) = (rm.center(i), rm.center(j));
                let in_b1 = i == j || (x >= alpha && y <= 1.0 - alpha);
                assert_eq!(rm.in_black(1, i, j), in_b1, "({i},{j})");
                assert!(!rm.in_white(1, i, j));
                // Only R_1 strata, everything else grey.
                assert_eq!(rm.strata[1].contains(i, j), in_b1);
                assert_eq!(rm.grey[1].contains(i, j), !in_b1);
            }
        }
        assert!(rm.strata[0].is_empty());
        assert!(largest_grey_square(&rm, 1) <= alpha + 2.0 / r as f64);
    }

    #[test]
    fn zero_graphon_is_white() {
        let w = StepGraphon::zeros(5);
        let rm = compute_regions(&w, 3, 0.1, 40).unwrap();
        assert!(verify_partition(&rm));
        for i in 0..40 {
            for j in (i + 1)..40 {
                let feasible = rm.center(j) - rm.center(i) >= 0.2 - 1e-12;
                for k in 1..3 {
                    assert_eq!(rm.in_white(k, i, j), feasible, "({i},{j}) k={k}");
                }
            }
        }
    }

    #[test]
    fn corrupted_map_fails() {
        let w = StepGraphon::constant(4, 1.0).unwrap();
        let mut rm = compute_regions(&w, 2, 0.25, 16).unwrap();
        assert!(verify_partition(&rm));
        rm.strata[0].set(5, 9, true);
        assert!(!verify_partition(&rm));
    }

    #[test]
    fn crossing_predicate() {
        let jump = BoundaryCurve::new(CurveKind::F, 2, vec![(0.0, 0.3), (0.5, 0.7)]).unwrap();
        assert!(cell_crosses(0.4, 0.6, 0.4, 0.6, &jump));
        assert!(!cell_crosses(0.0, 0.2, 0.8, 0.9, &jump));
        assert!(!cell_crosses(0.5, 0.5, 0.5, 0.5, &jump));
        // corner exactly on the vertical segment is not strictly above
        assert!(!cell_crosses(0.5, 0.6, 0.4, 0.7, &jump));
    }

    #[test]
    fn curves_are_monotone() {
        let w = crate::synth::figure_two(10);
        let rm = compute_regions(&w, 4, 0.1, 48).unwrap();
        for k in 1..rm.levels() {
            let _ = rm.f_curve(k);
            let _ = rm.g_curve(k);
        }
    }
}
