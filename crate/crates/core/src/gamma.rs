//! The older deviation parameter Γ, kept for side-by-side comparison with Λ.
//!
//! ```text
//! Γ(w, A) = ∬_{y<z} [∫_{A∩[0,y]} w(x,z) − w(x,y) dx]₊ + ∬_{y<z} [∫_{A∩[z,1]} w(x,y) − w(x,z) dx]₊
//! Γ(w)    = sup_A Γ(w, A)
//! ```
//!
//! For `A` a union of cells of the refined grid, `y` in cell `j` and `z` in
//! cell `l > j`, the inner integral is affine in the position of `y` inside
//! its cell (first term) or of `z` inside its cell (second term), so each cell
//! pair contributes an exact integral of the positive part of an affine
//! function. Pairs with `j == l` contribute nothing.

use crate::error::{Error, Result};
use crate::graphon::{CellSet, SearchMode, StepGraphon};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub const EXACT_CAP: usize = 15;

const HEURISTIC_STARTS: usize = 20;

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GammaEstimate {
    pub value: f64,
    pub witness_a: CellSet,
    pub refinement: usize,
    pub mode: SearchMode,
}

/// `∫_0^h [a + (b−a) t/h]₊ dt` for the affine function with end values `a`, `b`.
pub(crate) fn positive_part_integral(a: f64, b: f64, h: f64) -> f64 {
    if a >= 0.0 && b >= 0.0 {
        0.5 * h * (a + b)
    } else if a <= 0.0 && b <= 0.0 {
        0.0
    } else if a > 0.0 {
        0.5 * h * a * a / (a - b)
    } else {
        0.5 * h * b * b / (b - a)
    }
}

/// `Γ(u, A)` for a membership vector on the grid of `u`.
pub fn gamma_of_set(u: &StepGraphon, member: &[bool]) -> f64 {
    let n = u.n();
    let h = 1.0 / n as f64;
    // below[l][j] = Σ_{i∈A, i<j} u[i][l];  above[l][j] = Σ_{i∈A, i>j} u[i][l]
    let mut below = vec![0.0; n * n];
    let mut above = vec![0.0; n * n];
    for l in 0..n {
        let mut acc = 0.0;
        for j in 0..n {
            below[l * n + j] = acc;
            if member[j] {
                acc += u.get(j, l);
            }
        }
        let mut acc = 0.0;
        for j in (0..n).rev() {
            above[l * n + j] = acc;
            if member[j] {
                acc += u.get(j, l);
            }
        }
    }
    let mut total = 0.0;
    for j in 0..n {
        for l in (j + 1)..n {
            // First term: x ∈ A ∩ [0, y], y = j/n + t.
            let c = h * (below[l * n + j] - below[j * n + j]);
            let d = if member[j] { u.get(j, l) - u.get(j, j) } else { 0.0 };
            total += h * positive_part_integral(c, c + d * h, h);
            // Second term: x ∈ A ∩ [z, 1], z = l/n + s; the partial cell has length h − s.
            let c = h * (above[j * n + l] - above[l * n + l]);
            let d = if member[l] { u.get(l, j) - u.get(l, l) } else { 0.0 };
            total += h * positive_part_integral(c + d * h, c, h);
        }
    }
    total
}

/// Γ restricted to unions of cells of the `n·r` grid.
///
/// Exact mode enumerates every `A` (requires `n·r <= 15`); heuristic mode
/// runs single-cell flips from 20 random starts drawn from `seed`.
pub fn gamma_estimate(w: &StepGraphon, r: usize, mode: SearchMode, seed: u64) -> Result<GammaEstimate> {
    if r == 0 {
        return Err(Error::invalid("refinement must be positive"));
    }
    let size = w.n().saturating_mul(r);
    if mode == SearchMode::Exact && size > EXACT_CAP {
        return Err(Error::CapExceeded {
            what: "exact gamma refined cells",
            size,
            cap: EXACT_CAP,
        });
    }
    let u = w.refine(r)?;
    let n = u.n();
    let to_mask = |m: &[bool]| -> Vec<usize> { (0..n).filter(|&i| m[i]).collect() };

    let (value, member) = match mode {
        SearchMode::Exact => {
            let (v, mask) = (0u32..(1u32 << n))
                .into_par_iter()
                .map(|mask| {
                    let member: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
                    (gamma_of_set(&u, &member), mask)
                })
                .reduce(
                    || (f64::NEG_INFINITY, u32::MAX),
                    |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
                );
            (v, (0..n).map(|i| mask >> i & 1 == 1).collect::<Vec<_>>())
        }
        SearchMode::Heuristic => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let starts: Vec<Vec<bool>> = (0..HEURISTIC_STARTS)
                .map(|_| (0..n).map(|_| rng.random::<bool>()).collect())
                .collect();
            starts
                .into_par_iter()
                .map(|mut m| {
                    let mut v = gamma_of_set(&u, &m);
                    loop {
                        let mut moved = false;
                        for i in 0..n {
                            m[i] = !m[i];
                            let cand = gamma_of_set(&u, &m);
                            if cand > v {
                                v = cand;
                                moved = true;
                            } else {
                                m[i] = !m[i];
                            }
                        }
                        if !moved {
                            break;
                        }
                    }
                    (v, m)
                })
                .reduce(
                    || (f64::NEG_INFINITY, vec![true; n]),
                    |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
                )
        }
    };
    Ok(GammaEstimate {
        value: value.max(0.0),
        witness_a: CellSet::from_sorted(n, to_mask(&member)),
        refinement: r,
        mode,
    })
}
