//! The Robinson parameter Λ.
//!
//! ```text
//! Λ(w) = ½ sup_{A≤B≤C} [∬_{A×C} w − ∬_{B×C} w] + ½ sup_{X≤Y≤Z} [∬_{X×Z} w − ∬_{X×Y} w]
//! ```
//!
//! where the sets in a triple have equal measure and `A ≤ B` means every point
//! of `A` lies left of every point of `B`. Both suprema are restricted here to
//! unions of cells of the `r`-times refined grid, which gives a lower bound on
//! the continuum value that is exact for Robinson inputs (both are 0).
//!
//! The second supremum is the first one applied to the reversed graphon
//! `w(1−x, 1−y)`, which is how it is computed.

use crate::error::{Error, Result};
use crate::graphon::{CellSet, SearchMode, StepGraphon};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::cmp::Ordering;

/// Largest refined grid (`n·r`) accepted by [`lambda_exact`].
pub const EXACT_CAP: usize = 15;

/// Above this many refined cells the heuristic subsamples split points.
const SPLIT_BUDGET: usize = 24;

/// Λ estimate with the triples that attain it.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LambdaCertificate {
    pub value: f64,
    /// `½ ∬_{A×C} − ½ ∬_{B×C}` at the witness, floored at 0.
    pub row_term: f64,
    /// `½ ∬_{X×Z} − ½ ∬_{X×Y}` at the witness, floored at 0.
    pub col_term: f64,
    pub row_triple: (CellSet, CellSet, CellSet),
    pub col_triple: (CellSet, CellSet, CellSet),
    pub refinement: usize,
    pub mode: SearchMode,
}

impl LambdaCertificate {
    /// Recomputes the value from the witness triples on `w` (unrefined input).
    pub fn recompute(&self, w: &StepGraphon) -> Result<f64> {
        let u = w.refine(self.refinement)?;
        let nn = (u.n() * u.n()) as f64;
        let (a, b, c) = &self.row_triple;
        let (x, y, z) = &self.col_triple;
        let t1 = 0.5 * (block(&u, a.indices(), c.indices()) - block(&u, b.indices(), c.indices())) / nn;
        let t2 = 0.5 * (block(&u, x.indices(), z.indices()) - block(&u, x.indices(), y.indices())) / nn;
        Ok(t1 + t2)
    }
}

fn block(u: &StepGraphon, s: &[usize], t: &[usize]) -> f64 {
    s.iter().map(|&i| t.iter().map(|&j| u.get(i, j)).sum::<f64>()).sum()
}

/// `Σ_{A×C} u − Σ_{B×C} u` summed as paired differences `u[a_i][c] − u[b_i][c]`.
///
/// Pairing matters: for a Robinson `u` every paired difference is `≤ 0`, so
/// the sum is `≤ 0` in floating point as well.
fn triple_value(u: &StepGraphon, a: &[usize], b: &[usize], c: &[usize]) -> f64 {
    let mut acc = 0.0;
    for (&ai, &bi) in a.iter().zip(b) {
        let (ra, rb) = (u.row(ai), u.row(bi));
        for &cj in c {
            acc += ra[cj] - rb[cj];
        }
    }
    acc
}

#[derive(Clone, Debug)]
struct Triple {
    value: f64,
    seq: Vec<usize>,
}

impl Triple {
    fn empty() -> Self {
        Triple {
            value: 0.0,
            seq: Vec::new(),
        }
    }

    /// Larger value wins, ties go to the lexicographically smaller index sequence.
    fn cmp_key(&self, other: &Triple) -> Ordering {
        match self.value.partial_cmp(&other.value).unwrap_or(Ordering::Equal) {
            Ordering::Equal => other.seq.cmp(&self.seq),
            o => o,
        }
    }

    fn better(self, other: Triple) -> Triple {
        if other.cmp_key(&self) == Ordering::Greater {
            other
        } else {
            self
        }
    }

    fn parts(&self) -> (&[usize], &[usize], &[usize]) {
        let k = self.seq.len() / 3;
        (&self.seq[..k], &self.seq[k..2 * k], &self.seq[2 * k..])
    }
}

fn exact_term(u: &StepGraphon) -> Triple {
    let n = u.n();
    (1u32..(1u32 << n))
        .into_par_iter()
        .filter(|m| m.count_ones() % 3 == 0)
        .map(|m| {
            let seq: Vec<usize> = (0..n).filter(|&i| m >> i & 1 == 1).collect();
            let k = seq.len() / 3;
            let value = triple_value(u, &seq[..k], &seq[k..2 * k], &seq[2 * k..]);
            Triple { value, seq }
        })
        .reduce(Triple::empty, Triple::better)
}

fn reverse_seq(n: usize, t: &Triple) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    // A' ≤ B' ≤ C' on the reversed grid become Z ≥ Y ≥ X on the original.
    let (a, b, c) = t.parts();
    let rev = |s: &[usize]| {
        let mut v: Vec<usize> = s.iter().map(|&i| n - 1 - i).collect();
        v.sort_unstable();
        v
    };
    (rev(c), rev(b), rev(a))
}

fn certificate(
    u: &StepGraphon,
    row: Triple,
    col_rev: Triple,
    r: usize,
    mode: SearchMode,
) -> LambdaCertificate {
    let n = u.n();
    let nn = (n * n) as f64;
    let row = if row.value > 0.0 { row } else { Triple::empty() };
    let col_rev = if col_rev.value > 0.0 {
        col_rev
    } else {
        Triple::empty()
    };
    let (a, b, c) = row.parts();
    let (x, y, z) = reverse_seq(n, &col_rev);
    let set = |v: &[usize]| CellSet::from_sorted(n, v.to_vec());
    let row_term = 0.5 * row.value / nn;
    let col_term = 0.5 * col_rev.value / nn;
    LambdaCertificate {
        value: row_term + col_term,
        row_term,
        col_term,
        row_triple: (set(a), set(b), set(c)),
        col_triple: (set(&x), set(&y), set(&z)),
        refinement: r,
        mode,
    }
}

fn refined(w: &StepGraphon, r: usize) -> Result<StepGraphon> {
    if r == 0 {
        return Err(Error::invalid("refinement must be positive"));
    }
    w.refine(r)
}

/// Exhaustive maximization over all equal-size ordered cell triples of the
/// `n·r` grid. Requires `n·r <= 15`.
pub fn lambda_exact(w: &StepGraphon, r: usize) -> Result<LambdaCertificate> {
    let size = w.n().saturating_mul(r);
    if size > EXACT_CAP {
        return Err(Error::CapExceeded {
            what: "exact lambda refined cells",
            size,
            cap: EXACT_CAP,
        });
    }
    let u = refined(w, r)?;
    let row = exact_term(&u);
    let col = exact_term(&u.reversed());
    Ok(certificate(&u, row, col, r, SearchMode::Exact))
}

/// `k` indices from `range` with the largest (`top`) or smallest `score`,
/// ties resolved toward smaller indices. Returned sorted.
fn select(score: &[f64], range: std::ops::Range<usize>, k: usize, top: bool) -> Vec<usize> {
    let mut idx: Vec<usize> = range.collect();
    idx.sort_by(|&i, &j| {
        let o = score[i].partial_cmp(&score[j]).unwrap_or(Ordering::Equal);
        let o = if top { o.reverse() } else { o };
        o.then(i.cmp(&j))
    });
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

/// Coordinate ascent inside one stratum `A ⊆ [0,t1), B ⊆ [t1,t2), C ⊆ [t2,n)`.
fn ascend(u: &StepGraphon, t1: usize, t2: usize, k: usize, mut c: Vec<usize>) -> Triple {
    let n = u.n();
    let mut f = vec![0.0; n];
    let mut g = vec![0.0; n];
    let mut best = Triple {
        value: f64::NEG_INFINITY,
        seq: Vec::new(),
    };
    for _ in 0..(2 * n + 4) {
        for (x, fx) in f.iter_mut().enumerate().take(t2) {
            let row = u.row(x);
            *fx = c.iter().map(|&j| row[j]).sum();
        }
        let a = select(&f, 0..t1, k, true);
        let b = select(&f, t1..t2, k, false);
        for (y, gy) in g.iter_mut().enumerate().skip(t2) {
            *gy = a.iter().map(|&i| u.get(i, y)).sum::<f64>()
                - b.iter().map(|&i| u.get(i, y)).sum::<f64>();
        }
        let c2 = select(&g, t2..n, k, true);
        let value = triple_value(u, &a, &b, &c2);
        let seq: Vec<usize> = a.iter().chain(&b).chain(&c2).copied().collect();
        let cand = Triple { value, seq };
        let improved = cand.cmp_key(&best) == Ordering::Greater;
        if improved {
            best = cand;
        }
        if c2 == c || !improved {
            break;
        }
        c = c2;
    }
    best
}

fn split_points(n: usize) -> Vec<usize> {
    if n <= SPLIT_BUDGET {
        return (1..n).collect();
    }
    let mut pts: Vec<usize> = (0..SPLIT_BUDGET)
        .map(|q| 1 + q * (n - 2) / (SPLIT_BUDGET - 1))
        .collect();
    pts.dedup();
    pts
}

fn heuristic_term(u: &StepGraphon, restarts: usize, rng: &mut ChaCha8Rng) -> Triple {
    let n = u.n();
    let pts = split_points(n);
    let mut strata = Vec::new();
    for (p, &t1) in pts.iter().enumerate() {
        for &t2 in &pts[p + 1..] {
            let kmax = t1.min(t2 - t1).min(n - t2);
            for k in 1..=kmax {
                strata.push((t1, t2, k));
            }
        }
    }
    if strata.is_empty() {
        return Triple::empty();
    }
    // Deterministic starts: C next to B and C at the far end.
    let mut jobs: Vec<(usize, usize, usize, Vec<usize>)> = Vec::new();
    for &(t1, t2, k) in &strata {
        jobs.push((t1, t2, k, (t2..t2 + k).collect()));
        if n - k > t2 {
            jobs.push((t1, t2, k, (n - k..n).collect()));
        }
    }
    for _ in 0..restarts {
        let (t1, t2, k) = strata[rng.random_range(0..strata.len())];
        let mut c: Vec<usize> = sample(rng, n - t2, k).into_iter().map(|i| t2 + i).collect();
        c.sort_unstable();
        jobs.push((t1, t2, k, c));
    }
    jobs.into_par_iter()
        .map(|(t1, t2, k, c)| ascend(u, t1, t2, k, c))
        .reduce(Triple::empty, Triple::better)
}

/// Split sweep with alternating top-k / bottom-k selection.
///
/// Every stratum of split points and sizes is tried from two fixed starts,
/// and `restarts` further starts use random strata and random `C`. The score
/// is that of an actual triple, so the result never exceeds [`lambda_exact`].
pub fn lambda_heuristic(
    w: &StepGraphon,
    r: usize,
    restarts: usize,
    seed: u64,
) -> Result<LambdaCertificate> {
    let u = refined(w, r)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let row = heuristic_term(&u, restarts, &mut rng);
    let col = heuristic_term(&u.reversed(), restarts, &mut rng);
    Ok(certificate(&u, row, col, r, SearchMode::Heuristic))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn anti() -> StepGraphon {
        StepGraphon::from_rows(&[
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn anti_robinson_example() {
        let c = lambda_exact(&anti(), 1).unwrap();
        assert!((c.value - 1.0 / 9.0).abs() < 1e-15);
        let (a, b, cc) = &c.row_triple;
        assert_eq!((a.indices(), b.indices(), cc.indices()), (&[0][..], &[1][..], &[2][..]));
        let (x, y, z) = &c.col_triple;
        assert_eq!((x.indices(), y.indices(), z.indices()), (&[0][..], &[1][..], &[2][..]));
        assert!((c.recompute(&anti()).unwrap() - c.value).abs() < 1e-15);

        let h = lambda_heuristic(&anti(), 1, 5, 0).unwrap();
        assert!((h.value - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn robinson_and_constant_give_zero() {
        let c = StepGraphon::constant(5, 0.3).unwrap();
        assert_eq!(lambda_exact(&c, 2).unwrap().value, 0.0);
        let t = StepGraphon::from_upper(7, |i, j| 1.0 / (1.0 + (j - i) as f64)).unwrap();
        assert_eq!(lambda_exact(&t, 2).unwrap().value, 0.0);
        assert_eq!(lambda_heuristic(&t, 3, 10, 1).unwrap().value, 0.0);
        assert_eq!(lambda_heuristic(&StepGraphon::zeros(4), 1, 3, 0).unwrap().value, 0.0);
    }

    #[test]
    fn cap_is_enforced() {
        let w = StepGraphon::zeros(8);
        assert!(matches!(lambda_exact(&w, 2), Err(Error::CapExceeded { .. })));
        assert!(lambda_heuristic(&w, 4, 2, 0).is_ok());
    }

    #[test]
    fn triples_respect_order_and_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let w = StepGraphon::from_upper(6, |_, _| rng.random_range(-1.0..1.0)).unwrap();
            let c = lambda_exact(&w, 2).unwrap();
            for (a, b, cc) in [&c.row_triple, &c.col_triple] {
                assert!(a.len() == b.len() && b.len() == cc.len());
                if !a.is_empty() {
                    assert!(a.indices().last() < b.indices().first());
                    assert!(b.indices().last() < cc.indices().first());
                }
            }
            assert!((c.recompute(&w).unwrap() - c.value).abs() < 1e-12);
            let h = lambda_heuristic(&w, 2, 20, 4).unwrap();
            assert!(h.value <= c.value + 1e-12);
            assert!((h.recompute(&w).unwrap() - h.value).abs() < 1e-12);
        }
    }
}
