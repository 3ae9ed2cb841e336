//! The α-Robinson approximation
//!
//! ```text
//! R_w^α(x, y) = sup { avg_{S×T} w : S ⊆ [0,x], T ⊆ [y,1], |S| = |T| = α }      (x ≤ y)
//! ```
//!
//! with `sup ∅ = 0`. Enlarging `x` or shrinking `y` only adds candidate
//! rectangles, so `R_w^α` is non-decreasing in `x` and non-increasing in `y`
//! on the upper triangle, which is the Robinson property.

use crate::error::{Error, Result};
use crate::graphon::{IntegralTable, SearchMode, StepGraphon};
use crate::knapsack::{exact_max, from_pair, Side};
use rayon::prelude::*;
use serde::Serialize;

/// Slack in the feasibility tests `x >= α` and `y + α <= 1`.
pub const FEASIBILITY_GUARD: f64 = 1e-15;

/// Evaluation of `R_w^α` on a `grid_n × grid_n` grid.
///
/// Cell `(a, b)` holds the value at its centre. Sampling at the upper-left
/// corner instead would give a pointwise lower bound, but on coarse grids it
/// shifts the whole picture by one cell away from the diagonal; at the centre
/// `R_w^α` tends to `w` cell by cell as `α → 0` for Robinson `w`.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RobinsonApprox {
    pub alpha: f64,
    pub grid_n: usize,
    #[serde(serialize_with = "serialize_rows")]
    pub values: StepGraphon,
    pub mode: SearchMode,
    pub robinson_validated: bool,
}

fn serialize_rows<S: serde::Serializer>(g: &StepGraphon, s: S) -> Result<S::Ok, S::Error> {
    use serde::Serialize as _;
    g.rows().serialize(s)
}

impl RobinsonApprox {
    fn finish(alpha: f64, values: StepGraphon, mode: SearchMode) -> Self {
        let robinson_validated = values.is_robinson(1e-12).robinson;
        RobinsonApprox {
            alpha,
            grid_n: values.n(),
            values,
            mode,
            robinson_validated,
        }
    }

    /// Sample point used for grid cell `(a, b)`, `a <= b`.
    pub fn sample_point(grid_n: usize, a: usize, b: usize) -> (f64, f64) {
        let g = grid_n as f64;
        ((a as f64 + 0.5) / g, (b as f64 + 0.5) / g)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0,1), got {alpha}")));
    }
    Ok(())
}

fn feasible(x: f64, y: f64, alpha: f64) -> bool {
    x >= alpha - FEASIBILITY_GUARD && 1.0 - y >= alpha - FEASIBILITY_GUARD
}

/// `R_w^α(x, y)` for a single point.
///
/// Exact mode solves the bilinear program over the polytope vertices of the
/// side with fewer candidate cells (at most 14). Heuristic mode alternates
/// knapsack best responses from five fixed starts and is a lower bound; one
/// start is the window `[x−α, x] × [y, y+α]`, so the result is never below that
/// window's average.
pub fn ul_sup(w: &StepGraphon, x: f64, y: f64, alpha: f64, mode: SearchMode) -> Result<f64> {
    check_alpha(alpha)?;
    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) || x > y {
        return Err(Error::invalid(format!("need 0 <= x <= y <= 1, got ({x}, {y})")));
    }
    if !feasible(x, y, alpha) {
        return Ok(0.0);
    }
    let n = w.n();
    let s = Side::interval(n, 0.0, x);
    let t = Side::interval(n, y, 1.0);
    let a2 = alpha * alpha;
    match mode {
        SearchMode::Exact => Ok(exact_max(w, &s, &t, alpha)? / a2),
        SearchMode::Heuristic => Ok(ul_heuristic(w, &s, &t, alpha) / a2),
    }
}

fn ul_heuristic(w: &StepGraphon, s: &Side, t: &Side, alpha: f64) -> f64 {
    let near_s = s.window(alpha, true);
    let near_t = t.window(alpha, false);
    let starts = [
        from_pair(w, s, t, alpha, true, near_s.clone(), &near_t),
        from_pair(w, s, t, alpha, true, s.window(alpha, false), &near_t),
        from_pair(w, t, s, alpha, true, near_t.clone(), &near_s),
        from_pair(w, t, s, alpha, true, t.window(alpha, true), &near_s),
        {
            let uniform = t.full();
            let p = crate::knapsack::profile(w, s, t, &uniform);
            let sa = s.knapsack(&p, alpha, true);
            from_pair(w, s, t, alpha, true, sa, &near_t)
        },
    ];
    starts.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// Smallest function above `g` on the upper triangle that is non-decreasing in
/// the row index and non-increasing in the column index; mirrored below the
/// diagonal. The result is a Robinson matrix.
pub fn monotone_envelope(g: &StepGraphon) -> StepGraphon {
    let n = g.n();
    let mut env = vec![0.0; n * n];
    for a in 0..n {
        for b in (a..n).rev() {
            let mut v = g.get(a, b);
            if a > 0 {
                v = v.max(env[(a - 1) * n + b]);
            }
            if b + 1 < n {
                v = v.max(env[a * n + b + 1]);
            }
            env[a * n + b] = v;
        }
    }
    for a in 0..n {
        for b in 0..a {
            env[a * n + b] = env[b * n + a];
        }
    }
    StepGraphon::from_raw(n, env)
}

/// Evaluates `R_w^α` on a grid and restores exact monotonicity with
/// [`monotone_envelope`].
///
/// `alpha == 0` is allowed only for Robinson `w` and returns `w` itself.
pub fn robinson_approx(
    w: &StepGraphon,
    alpha: f64,
    grid_n: usize,
    mode: SearchMode,
) -> Result<RobinsonApprox> {
    if alpha == 0.0 {
        if let Some(wit) = w.is_robinson(1e-12).witness {
            return Err(Error::precondition(format!(
                "alpha = 0 requires a Robinson input; violation at {wit:?}"
            )));
        }
        // R^0 = w; honour a grid that refines w, otherwise keep w's own.
        let values = if grid_n > 0 && grid_n.is_multiple_of(w.n()) {
            w.refine(grid_n / w.n())?
        } else {
            w.clone()
        };
        return Ok(RobinsonApprox::finish(0.0, values, mode));
    }
    check_alpha(alpha)?;
    if grid_n == 0 {
        return Err(Error::invalid("grid size must be positive"));
    }
    let cells: Vec<(usize, usize)> = (0..grid_n)
        .flat_map(|a| (a..grid_n).map(move |b| (a, b)))
        .collect();
    let vals: Vec<f64> = cells
        .par_iter()
        .map(|&(a, b)| {
            let (x, y) = RobinsonApprox::sample_point(grid_n, a, b);
            ul_sup(w, x, y, alpha, mode)
        })
        .collect::<Result<_>>()?;
    let mut raw = vec![0.0; grid_n * grid_n];
    for (&(a, b), v) in cells.iter().zip(vals) {
        raw[a * grid_n + b] = v;
        raw[b * grid_n + a] = v;
    }
    let env = monotone_envelope(&StepGraphon::from_raw(grid_n, raw));
    let out = RobinsonApprox::finish(alpha, env, mode);
    if !out.robinson_validated {
        return Err(Error::Internal("envelope output failed the Robinson check".into()));
    }
    Ok(out)
}

/// Window averages `(1/α²) ∬_{[x−α,x]×[y,y+α]} w` at the same sample points as
/// [`robinson_approx`], zero where the window leaves the unit square.
///
/// For a Robinson `w` the window closest to the point is optimal, so this is
/// an independent closed form for `R_w^α`.
pub fn closed_form_robinson_ae(w: &StepGraphon, alpha: f64, grid_n: usize) -> Result<RobinsonApprox> {
    check_alpha(alpha)?;
    if grid_n == 0 {
        return Err(Error::invalid("grid size must be positive"));
    }
    if let Some(wit) = w.is_robinson(1e-9).witness {
        return Err(Error::precondition(format!(
            "closed form needs a Robinson input; violation at {wit:?}"
        )));
    }
    let table = IntegralTable::new(w);
    let mut raw = vec![0.0; grid_n * grid_n];
    for a in 0..grid_n {
        for b in a..grid_n {
            let (x, y) = RobinsonApprox::sample_point(grid_n, a, b);
            let v = if feasible(x, y, alpha) {
                table.rect((x - alpha).max(0.0), x, y, (y + alpha).min(1.0)) / (alpha * alpha)
            } else {
                0.0
            };
            raw[a * grid_n + b] = v;
            raw[b * grid_n + a] = v;
        }
    }
    Ok(RobinsonApprox::finish(
        alpha,
        StepGraphon::from_raw(grid_n, raw),
        SearchMode::Exact,
    ))
}
