//! Independent brute-force oracles and instance generators shared by the
//! integration tests. Nothing here calls the solvers it is used to check.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robinson_core::synth::{cumulative_envelope, smooth_exp, toeplitz_decay};
use robinson_core::StepGraphon;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Symmetric matrix with entries uniform in `[lo, hi)`.
pub fn random_kernel(r: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> StepGraphon {
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = r.random_range(lo..hi);
            rows[i][j] = v;
            rows[j][i] = v;
        }
    }
    StepGraphon::from_rows(&rows).unwrap()
}

/// A Robinson graphon from one of several families, picked at random.
pub fn random_robinson(r: &mut ChaCha8Rng, n: usize) -> StepGraphon {
    let seed = r.random::<u64>();
    match r.random_range(0..4) {
        0 => toeplitz_decay(n, seed, r.random_range(0.2..2.0), r.random_range(0.0..1.0)),
        1 => cumulative_envelope(n, seed, r.random_range(0.1..3.0)),
        2 => smooth_exp(n, r.random_range(0.0..6.0)),
        _ => {
            // Piecewise constant with a few distinct levels, so ties are common.
            let levels: Vec<f64> = {
                let mut v: Vec<f64> = (0..3).map(|_| (r.random_range(0..5) as f64) * 0.25).collect();
                v.sort_by(|a, b| b.total_cmp(a));
                v
            };
            let cut1 = r.random_range(0..n);
            let cut2 = r.random_range(cut1..=n);
            StepGraphon::from_upper(n, |i, j| {
                let d = j - i;
                if d <= cut1 {
                    levels[0]
                } else if d <= cut2 {
                    levels[1]
                } else {
                    levels[2]
                }
            })
            .unwrap()
        }
    }
}

/// Checks `w[i][k] <= min(w[i][j], w[j][k])` for all `i < j < k` directly.
pub fn robinson_oracle(w: &StepGraphon, tol: f64) -> bool {
    let n = w.n();
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                if w.get(i, k) > w.get(i, j).min(w.get(j, k)) + tol {
                    return false;
                }
            }
        }
    }
    true
}

/// Λ on the `r`-refined grid by labelling every cell with one of
/// {none, first, second, third} and keeping ordered equal-size labellings.
pub fn lambda_oracle(w: &StepGraphon, r: usize) -> f64 {
    let u = w.refine(r).unwrap();
    let n = u.n();
    assert!(n <= 9, "oracle is exponential");
    let nn = (n * n) as f64;
    let mut best_row = 0.0f64;
    let mut best_col = 0.0f64;
    let total = 4usize.pow(n as u32);
    for code in 0..total {
        let mut sets: [Vec<usize>; 3] = [vec![], vec![], vec![]];
        let mut c = code;
        for cell in 0..n {
            let label = c % 4;
            c /= 4;
            if label > 0 {
                sets[label - 1].push(cell);
            }
        }
        let [a, b, cc] = &sets;
        if a.is_empty() || a.len() != b.len() || b.len() != cc.len() {
            continue;
        }
        if a.last() >= b.first() || b.last() >= cc.first() {
            continue;
        }
        let sum = |s: &[usize], t: &[usize]| -> f64 {
            s.iter().map(|&i| t.iter().map(|&j| u.get(i, j)).sum::<f64>()).sum()
        };
        // (A, B, C) for the first term; the same triple read as (X, Y, Z) for the second.
        best_row = best_row.max(0.5 * (sum(a, cc) - sum(b, cc)) / nn);
        best_col = best_col.max(0.5 * (sum(a, cc) - sum(a, b)) / nn);
    }
    best_row + best_col
}

/// Cut norm by enumerating both `S` and `T`.
pub fn cut_norm_oracle(w: &StepGraphon) -> f64 {
    let n = w.n();
    assert!(n <= 9, "oracle is exponential");
    let mut best = 0.0f64;
    for s in 0u32..(1 << n) {
        for t in 0u32..(1 << n) {
            let mut acc = 0.0;
            for i in 0..n {
                if s >> i & 1 == 1 {
                    for j in 0..n {
                        if t >> j & 1 == 1 {
                            acc += w.get(i, j);
                        }
                    }
                }
            }
            best = best.max(acc.abs());
        }
    }
    best / (n * n) as f64
}

pub fn subsets(pool: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(pool: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for p in start..pool.len() {
            cur.push(pool[p]);
            go(pool, k, p + 1, cur, out);
            cur.pop();
        }
    }
    go(pool, k, 0, &mut cur, &mut out);
    out
}

/// `R_w^α` at the centre of cell `(a, b)` for `α = k/n`. On the half-cell grid
/// the centre is a grid line and `α` is `2k` half cells, so the optimum of the
/// bilinear program sits on whole half cells: enumerate `S`, then take the best
/// `T` (the `2k` largest column sums).
pub fn ul_oracle_centre(w: &StepGraphon, a: usize, b: usize, k: usize) -> f64 {
    let n = w.n();
    let half = |i: usize, j: usize| w.get(i / 2, j / 2);
    let budget = 2 * k;
    let left: Vec<usize> = (0..2 * a + 1).collect();
    let right: Vec<usize> = (2 * b + 1..2 * n).collect();
    if left.len() < budget || right.len() < budget {
        return 0.0;
    }
    let mut best = f64::NEG_INFINITY;
    for s in subsets(&left, budget) {
        let mut cols: Vec<f64> = right.iter().map(|&j| s.iter().map(|&i| half(i, j)).sum()).collect();
        cols.sort_by(|x, y| y.total_cmp(x));
        best = best.max(cols[..budget].iter().sum::<f64>() / (budget * budget) as f64);
    }
    best
}

/// Average ranks, ties sharing their mean rank.
fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut out = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &p in &idx[i..=j] {
            out[p] = r;
        }
        i = j + 1;
    }
    out
}

pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let m = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / m, ry.iter().sum::<f64>() / m);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    cov / (vx * vy).sqrt()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
