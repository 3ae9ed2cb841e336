//! Cut norm `‖w‖_□ = sup_{S,T} |∬_{S×T} w|` with witness sets.
//!
//! For a step graphon the supremum is attained on unions of cells: the
//! objective is linear in the fraction of each cell that `S` (or `T`) contains,
//! so some extreme point, i.e. a 0/1 choice per cell, is optimal. Given `S`, the
//! best `T` for the positive sign is `{j : Σ_{i∈S} w_ij > 0}` and symmetrically
//! for the negative sign, so it is enough to enumerate `S`.

use crate::error::{Error, Result};
use crate::graphon::{rect_integral, CellSet, StepGraphon};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Default limit on `n` for exhaustive enumeration.
pub const EXACT_CAP: usize = 24;

/// Single-cell moves cost `O(n³)` per round; skip them on large grids.
const POLISH_CAP: usize = 64;

/// Low bits enumerated by Gray code inside one parallel chunk.
const CHUNK_BITS: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum CutNormMode {
    Exact,
    LocalSearch,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CutNormResult {
    pub value: f64,
    pub witness_s: CellSet,
    pub witness_t: CellSet,
    pub mode: CutNormMode,
    pub exact: bool,
}

impl CutNormResult {
    fn from_witnesses(w: &StepGraphon, s: Vec<usize>, t: Vec<usize>, mode: CutNormMode) -> Self {
        let value = rect_integral(w, &s, &t).abs();
        CutNormResult {
            value,
            witness_s: CellSet::from_sorted(w.n(), s),
            witness_t: CellSet::from_sorted(w.n(), t),
            mode,
            exact: mode == CutNormMode::Exact,
        }
    }
}

/// Settings for [`cut_norm`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct CutNormBudget {
    pub exact_cap: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for CutNormBudget {
    fn default() -> Self {
        CutNormBudget {
            exact_cap: EXACT_CAP,
            restarts: 50,
            seed: 0,
        }
    }
}

/// Exact solver when `n <= budget.exact_cap`, local search otherwise.
pub fn cut_norm(w: &StepGraphon, budget: &CutNormBudget) -> CutNormResult {
    if w.n() <= budget.exact_cap.min(EXACT_CAP) {
        cut_norm_exact(w).expect("size checked against cap")
    } else {
        cut_norm_local_search(w, budget.restarts.max(1), budget.seed)
    }
}

#[derive(Clone, Copy, Debug)]
struct Best {
    value: f64,
    mask: u32,
    positive: bool,
}

impl Best {
    const NONE: Best = Best {
        value: f64::NEG_INFINITY,
        mask: u32::MAX,
        positive: true,
    };

    /// Larger value wins; ties go to the smaller mask, then to the positive sign.
    fn better(self, other: Best) -> Best {
        use std::cmp::Ordering::*;
        match self.value.partial_cmp(&other.value).unwrap_or(Equal) {
            Greater => self,
            Less => other,
            Equal => match self.mask.cmp(&other.mask) {
                Less => self,
                Greater => other,
                Equal => {
                    if self.positive {
                        self
                    } else {
                        other
                    }
                }
            },
        }
    }
}

fn consider(best: &mut Best, cols: &[f64], mask: u32) {
    let (mut pos, mut neg) = (0.0, 0.0);
    for &c in cols {
        if c > 0.0 {
            pos += c;
        } else if c < 0.0 {
            neg -= c;
        }
    }
    *best = best.better(Best {
        value: pos,
        mask,
        positive: true,
    });
    *best = best.better(Best {
        value: neg,
        mask,
        positive: false,
    });
}

/// Exhaustive enumeration over all `2^n` cell subsets `S`.
pub fn cut_norm_exact(w: &StepGraphon) -> Result<CutNormResult> {
    let n = w.n();
    if n > EXACT_CAP {
        return Err(Error::CapExceeded {
            what: "exact cut norm cells",
            size: n,
            cap: EXACT_CAP,
        });
    }
    let low = n.min(CHUNK_BITS);
    let high = n - low;
    let best = (0u32..(1u32 << high))
        .into_par_iter()
        .map(|h| {
            let base = h << low;
            let mut cols = vec![0.0; n];
            for i in low..n {
                if base >> i & 1 == 1 {
                    for (c, v) in cols.iter_mut().zip(w.row(i)) {
                        *c += v;
                    }
                }
            }
            let mut best = Best::NONE;
            let mut mask = base;
            consider(&mut best, &cols, mask);
            for k in 1u32..(1u32 << low) {
                let bit = k.trailing_zeros() as usize;
                mask ^= 1 << bit;
                let row = w.row(bit);
                if mask >> bit & 1 == 1 {
                    for (c, v) in cols.iter_mut().zip(row) {
                        *c += v;
                    }
                } else {
                    for (c, v) in cols.iter_mut().zip(row) {
                        *c -= v;
                    }
                }
                consider(&mut best, &cols, mask);
            }
            best
        })
        .reduce(|| Best::NONE, Best::better);

    let s: Vec<usize> = (0..n).filter(|&i| best.mask >> i & 1 == 1).collect();
    let t = best_response(w, &s, best.positive);
    Ok(CutNormResult::from_witnesses(w, s, t, CutNormMode::Exact))
}

/// Cells whose column sum over `rows` has the requested strict sign.
fn best_response(w: &StepGraphon, rows: &[usize], positive: bool) -> Vec<usize> {
    let n = w.n();
    let mut cols = vec![0.0; n];
    for &i in rows {
        for (c, v) in cols.iter_mut().zip(w.row(i)) {
            *c += v;
        }
    }
    (0..n)
        .filter(|&j| if positive { cols[j] > 0.0 } else { cols[j] < 0.0 })
        .collect()
}

fn signed_value(w: &StepGraphon, s: &[usize], t: &[usize], positive: bool) -> f64 {
    let v = rect_integral(w, s, t);
    if positive {
        v
    } else {
        -v
    }
}

/// Alternates best responses `S → T → S …` until neither side changes.
fn alternate(w: &StepGraphon, mut s: Vec<usize>, positive: bool) -> (Vec<usize>, Vec<usize>, f64) {
    let mut t = best_response(w, &s, positive);
    let mut val = signed_value(w, &s, &t, positive);
    // The objective strictly increases along the iteration, so it terminates;
    // the bound guards against oscillation between rounding-level ties.
    for _ in 0..(4 * w.n() + 16) {
        let s2 = best_response(w, &t, positive);
        let t2 = best_response(w, &s2, positive);
        let v2 = signed_value(w, &s2, &t2, positive);
        if v2 <= val || (s2 == s && t2 == t) {
            break;
        }
        s = s2;
        t = t2;
        val = v2;
    }
    (s, t, val)
}

/// One-cell moves on `S` followed by re-solving `T`, until no move improves.
fn polish(w: &StepGraphon, s: Vec<usize>, positive: bool) -> (Vec<usize>, Vec<usize>, f64) {
    let n = w.n();
    let (mut s, mut t, mut val) = alternate(w, s, positive);
    loop {
        let mut improved = false;
        for i in 0..n {
            let mut cand = s.clone();
            match cand.binary_search(&i) {
                Ok(p) => {
                    cand.remove(p);
                }
                Err(p) => cand.insert(p, i),
            }
            let (cs, ct, cv) = alternate(w, cand, positive);
            if cv > val + 1e-15 * val.abs().max(1.0) {
                s = cs;
                t = ct;
                val = cv;
                improved = true;
            }
        }
        if !improved {
            return (s, t, val);
        }
    }
}

/// Randomized alternating maximization. Always a lower bound on the cut norm.
///
/// Besides `restarts` random starts, the full set and each single cell are
/// tried as starting `S`; every start is run for both signs and, up to
/// 64 cells, finished with single-cell moves.
pub fn cut_norm_local_search(w: &StepGraphon, restarts: usize, seed: u64) -> CutNormResult {
    let n = w.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<Vec<usize>> = Vec::with_capacity(restarts + n + 1);
    starts.push((0..n).collect());
    starts.extend((0..n).map(|i| vec![i]));
    for _ in 0..restarts {
        starts.push((0..n).filter(|_| rng.random::<bool>()).collect());
    }

    let runs: Vec<(Vec<usize>, Vec<usize>, f64)> = starts
        .into_par_iter()
        .flat_map_iter(|s| {
            if n <= POLISH_CAP {
                [polish(w, s.clone(), true), polish(w, s, false)]
            } else {
                [alternate(w, s.clone(), true), alternate(w, s, false)]
            }
        })
        .collect();

    let mut best: Option<(Vec<usize>, Vec<usize>, f64)> = None;
    for (s, t, v) in runs {
        let take = match &best {
            None => true,
            Some((bs, bt, bv)) => v > *bv || (v == *bv && (&s, &t) < (bs, bt)),
        };
        if take {
            best = Some((s, t, v));
        }
    }
    let (s, t, v) = best.expect("at least one start");
    if v <= 0.0 {
        return CutNormResult::from_witnesses(w, Vec::new(), Vec::new(), CutNormMode::LocalSearch);
    }
    CutNormResult::from_witnesses(w, s, t, CutNormMode::LocalSearch)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(w: &StepGraphon) -> f64 {
        let n = w.n();
        let mut best: f64 = 0.0;
        for s in 0u32..(1 << n) {
            for t in 0u32..(1 << n) {
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        if s >> i & 1 == 1 && t >> j & 1 == 1 {
                            acc += w.get(i, j);
                        }
                    }
                }
                best = best.max(acc.abs());
            }
        }
        best / (n * n) as f64
    }

    #[test]
    fn exact_examples() {
        let c = StepGraphon::constant(3, -0.4).unwrap();
        let r = cut_norm_exact(&c).unwrap();
        assert!((r.value - 0.4).abs() < 1e-15);
        assert_eq!(r.witness_s.indices(), &[0, 1, 2]);
        assert_eq!(r.witness_t.indices(), &[0, 1, 2]);

        let checker = StepGraphon::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let r = cut_norm_exact(&checker).unwrap();
        assert_eq!(r.value, 0.25);
        assert_eq!(r.witness_s.indices(), &[0]);
        assert_eq!(r.witness_t.indices(), &[0]);
        assert!(r.exact);

        let z = cut_norm_exact(&StepGraphon::zeros(4)).unwrap();
        assert_eq!(z.value, 0.0);
    }

    #[test]
    fn exact_matches_double_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=6 {
            for _ in 0..5 {
                let w = StepGraphon::from_upper(n, |_, _| rng.random_range(-1.0..1.0)).unwrap();
                let r = cut_norm_exact(&w).unwrap();
                assert!((r.value - brute(&w)).abs() < 1e-12, "n={n}");
            }
        }
    }

    #[test]
    fn chunked_enumeration_is_consistent() {
        // n above CHUNK_BITS exercises the parallel split.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = StepGraphon::from_upper(16, |_, _| rng.random_range(-1.0..1.0)).unwrap();
        let a = cut_norm_exact(&w).unwrap();
        let b = cut_norm_exact(&w).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.witness_s, b.witness_s);
        let ls = cut_norm_local_search(&w, 50, 1);
        assert!(ls.value <= a.value + 1e-12);
    }

    #[test]
    fn dispatcher_modes() {
        let small = StepGraphon::constant(4, 0.5).unwrap();
        assert_eq!(cut_norm(&small, &CutNormBudget::default()).mode, CutNormMode::Exact);
        let big = StepGraphon::constant(100, 0.5).unwrap();
        let r = cut_norm(&big, &CutNormBudget::default());
        assert_eq!(r.mode, CutNormMode::LocalSearch);
        assert!(!r.exact);
        assert!((r.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn local_search_trivial_cases() {
        let c = StepGraphon::constant(7, 2.0).unwrap();
        assert!((cut_norm_local_search(&c, 3, 9).value - 2.0).abs() < 1e-14);
        assert_eq!(cut_norm_local_search(&StepGraphon::zeros(5), 3, 9).value, 0.0);
    }
}
