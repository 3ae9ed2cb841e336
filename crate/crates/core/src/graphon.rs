//! Symmetric step graphons on a uniform grid.
//!
//! A [`StepGraphon`] with `n` cells is the function on `[0,1]²` that is constant
//! on every square `I_i × I_j`, `I_i = [i/n, (i+1)/n)`. All integrals below are
//! taken with respect to Lebesgue measure, so a cell has measure `1/n²`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Largest asymmetry that is silently repaired on ingestion.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Upper limit on the number of cells per axis produced by [`StepGraphon::refine`].
pub const MAX_CELLS: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepGraphon {
    n: usize,
    values: Vec<f64>,
}

impl StepGraphon {
    /// Builds a graphon from a row-major `n × n` array.
    ///
    /// Entries must be finite. Pairs differing by at most [`SYMMETRY_TOL`] are
    /// replaced by their midpoint; larger gaps are rejected.
    pub fn new(n: usize, mut values: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("graphon needs at least one cell"));
        }
        if values.len() != n * n {
            return Err(Error::invalid(format!(
                "expected {} values for n={n}, got {}",
                n * n,
                values.len()
            )));
        }
        for i in 0..n {
            for j in 0..n {
                if !values[i * n + j].is_finite() {
                    return Err(Error::NonFinite { i, j });
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let a = values[i * n + j];
                let b = values[j * n + i];
                let gap = (a - b).abs();
                if gap > SYMMETRY_TOL {
                    return Err(Error::Asymmetric {
                        i,
                        j,
                        gap,
                        tol: SYMMETRY_TOL,
                    });
                }
                if gap > 0.0 {
                    let mid = 0.5 * (a + b);
                    values[i * n + j] = mid;
                    values[j * n + i] = mid;
                }
            }
        }
        Ok(StepGraphon { n, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("matrix is not square"));
        }
        Self::new(n, rows.concat())
    }

    /// Builds a graphon from its upper triangle: `f(i, j)` is called for `i <= j`.
    pub fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Self::new(n, values)
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(n, vec![c; n * n])
    }

    pub fn zeros(n: usize) -> Self {
        StepGraphon {
            n,
            values: vec![0.0; n * n],
        }
    }

    /// Internal constructor for values already known to be finite and symmetric.
    pub(crate) fn from_raw(n: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), n * n);
        StepGraphon { n, values }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| f64::max(m, v.abs()))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    /// `∬ w` over the whole square.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() / (self.n * self.n) as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.n, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, c: f64) -> Self {
        StepGraphon::from_raw(self.n, self.values.iter().map(|v| c * v).collect())
    }

    pub fn add(&self, other: &StepGraphon) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &StepGraphon) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    fn zip(&self, other: &StepGraphon, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::invalid(format!(
                "grid mismatch: {} vs {} cells",
                self.n, other.n
            )));
        }
        Ok(StepGraphon::from_raw(
            self.n,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    /// The graphon `(x, y) ↦ w(1 - y, 1 - x)`, i.e. both axes reversed.
    pub fn reversed(&self) -> Self {
        let n = self.n;
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                values[i * n + j] = self.get(n - 1 - i, n - 1 - j);
            }
        }
        StepGraphon::from_raw(n, values)
    }

    /// Simultaneous relabelling: `out[i][j] = w[perm[i]][perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n;
        if perm.len() != n {
            return Err(Error::invalid("permutation length differs from n"));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::invalid("not a permutation"));
            }
        }
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                values[i * n + j] = self.get(perm[i], perm[j]);
            }
        }
        Ok(StepGraphon::from_raw(n, values))
    }

    /// `‖w‖_p`; pass `f64::INFINITY` for the sup norm.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::invalid(format!("p must be >= 1, got {p}")));
        }
        if p.is_infinite() {
            return Ok(self.sup_norm());
        }
        let cells = (self.n * self.n) as f64;
        if p == 1.0 {
            return Ok(self.values.iter().map(|v| v.abs()).sum::<f64>() / cells);
        }
        // Factor out the sup norm so large p does not overflow.
        let top = self.sup_norm();
        if top == 0.0 {
            return Ok(0.0);
        }
        let s: f64 = self.values.iter().map(|v| (v.abs() / top).powf(p)).sum();
        Ok(top * (s / cells).powf(1.0 / p))
    }

    /// Replicates every cell into an `r × r` block. The result equals `w` a.e.
    pub fn refine(&self, r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::invalid("refinement factor must be positive"));
        }
        if r == 1 {
            return Ok(self.clone());
        }
        let m = self
            .n
            .checked_mul(r)
            .filter(|&m| m <= MAX_CELLS)
            .ok_or(Error::CapExceeded {
                what: "refined grid",
                size: self.n.saturating_mul(r),
                cap: MAX_CELLS,
            })?;
        let mut values = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                values[i * m + j] = self.get(i / r, j / r);
            }
        }
        Ok(StepGraphon::from_raw(m, values))
    }

    /// The stepping operator `w ↦ w_P` for a partition of the cells into blocks
    /// of equal size. Each cell is replaced by the average over its block pair.
    pub fn step_to(&self, blocks: &[Vec<usize>]) -> Result<Self> {
        let n = self.n;
        let mut owner = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::invalid("empty block"));
            }
            if block.len() != blocks[0].len() {
                return Err(Error::invalid("blocks must have equal sizes"));
            }
            for &i in block {
                if i >= n {
                    return Err(Error::invalid(format!("cell index {i} out of range")));
                }
                if owner[i] != usize::MAX {
                    return Err(Error::invalid(format!("cell {i} appears in two blocks")));
                }
                owner[i] = b;
            }
        }
        if let Some(i) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(Error::invalid(format!("cell {i} is not covered")));
        }
        let k = blocks.len();
        let mut sums = vec![0.0; k * k];
        for i in 0..n {
            for j in 0..n {
                sums[owner[i] * k + owner[j]] += self.get(i, j);
            }
        }
        let size = (blocks[0].len() * blocks[0].len()) as f64;
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                values[i * n + j] = sums[owner[i] * k + owner[j]] / size;
            }
        }
        // Block sums are accumulated in the same order for (a,b) and (b,a) only up to
        // rounding, so re-symmetrize exactly.
        for i in 0..n {
            for j in (i + 1)..n {
                values[j * n + i] = values[i * n + j];
            }
        }
        Ok(StepGraphon::from_raw(n, values))
    }

    /// The `M`-cut-off: cells with value strictly above `M` are set to zero.
    pub fn cutoff(&self, threshold: f64) -> Result<CutoffResult> {
        if !(threshold > 0.0) {
            return Err(Error::invalid(format!(
                "cut-off threshold must be positive, got {threshold}"
            )));
        }
        let mut zeroed = 0usize;
        let values = self
            .values
            .iter()
            .map(|&v| {
                if v > threshold {
                    zeroed += 1;
                    0.0
                } else {
                    v
                }
            })
            .collect();
        Ok(CutoffResult {
            cutoff: StepGraphon::from_raw(self.n, values),
            exceed_measure: zeroed as f64 / (self.n * self.n) as f64,
            threshold,
        })
    }

    /// Checks `v[i][k] <= min(v[i][j], v[j][k]) + tol` for all `i <= j <= k`.
    ///
    /// Runs in `O(n²)` using running minima along rows and columns. When the check
    /// fails, the reported witness is the lexicographically first violating
    /// triple with pairwise distinct indices, or the first degenerate one
    /// (`j == i` or `j == k`) when no distinct triple violates.
    pub fn is_robinson(&self, tol: f64) -> RobinsonCheck {
        let n = self.n;
        let mut ok = true;
        'rows: for i in 0..n {
            // v[i][k] <= min_{i<=j<=k} v[i][j] + tol
            let mut run = f64::INFINITY;
            for k in i..n {
                run = run.min(self.get(i, k));
                if self.get(i, k) > run + tol {
                    ok = false;
                    break 'rows;
                }
            }
        }
        if ok {
            'cols: for k in 0..n {
                // v[i][k] <= min_{i<=j<=k} v[j][k] + tol
                let mut run = f64::INFINITY;
                for i in (0..=k).rev() {
                    run = run.min(self.get(i, k));
                    if self.get(i, k) > run + tol {
                        ok = false;
                        break 'cols;
                    }
                }
            }
        }
        if ok {
            return RobinsonCheck {
                robinson: true,
                witness: None,
            };
        }
        let violates = |i: usize, j: usize, k: usize| {
            self.get(i, k) > self.get(i, j).min(self.get(j, k)) + tol
        };
        let strict = (0..n).find_map(|i| {
            ((i + 1)..n).find_map(|j| ((j + 1)..n).find(|&k| violates(i, j, k)).map(|k| (i, j, k)))
        });
        let witness = strict.or_else(|| {
            (0..n).find_map(|i| {
                (i..n).find_map(|j| (j..n).find(|&k| violates(i, j, k)).map(|k| (i, j, k)))
            })
        });
        RobinsonCheck {
            robinson: false,
            witness,
        }
    }
}

/// Whether a search is exhaustive or a heuristic lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SearchMode {
    Exact,
    Heuristic,
}

/// Outcome of [`StepGraphon::is_robinson`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RobinsonCheck {
    pub robinson: bool,
    pub witness: Option<(usize, usize, usize)>,
}

/// The `M`-cut-off `w_M` together with the measure of the exceedance set `E_M`.
#[derive(Clone, Debug)]
pub struct CutoffResult {
    pub cutoff: StepGraphon,
    pub exceed_measure: f64,
    pub threshold: f64,
}

/// A union of cells of a uniform grid with `resolution` cells.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellSet {
    resolution: usize,
    indices: Vec<usize>,
}

impl CellSet {
    pub fn new(resolution: usize, indices: Vec<usize>) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::invalid("cell set resolution must be positive"));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("cell indices must be strictly increasing"));
        }
        if indices.last().is_some_and(|&i| i >= resolution) {
            return Err(Error::invalid("cell index out of range"));
        }
        Ok(CellSet {
            resolution,
            indices,
        })
    }

    pub fn empty(resolution: usize) -> Self {
        CellSet {
            resolution,
            indices: Vec::new(),
        }
    }

    pub fn full(resolution: usize) -> Self {
        CellSet {
            resolution,
            indices: (0..resolution).collect(),
        }
    }

    /// Cells whose bit is set in `mask` (bit `i` ↔ cell `i`).
    pub fn from_mask(resolution: usize, mask: u64) -> Self {
        CellSet {
            resolution,
            indices: (0..resolution.min(64))
                .filter(|&i| mask >> i & 1 == 1)
                .collect(),
        }
    }

    pub(crate) fn from_sorted(resolution: usize, indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        CellSet {
            resolution,
            indices,
        }
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.indices.len() as f64 / self.resolution as f64
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }
}

/// `∬_{S×T} w` for cell sets at the graphon's own resolution.
pub fn rect_integral(w: &StepGraphon, s: &[usize], t: &[usize]) -> f64 {
    let mut acc = 0.0;
    for &i in s {
        let row = w.row(i);
        for &j in t {
            acc += row[j];
        }
    }
    acc / (w.n() * w.n()) as f64
}

/// Exact integrals of a step graphon over arbitrary axis-parallel rectangles.
///
/// `F(x, y) = ∫_0^x ∫_0^y w` is the bilinear interpolation of the 2-D prefix sums
/// of the cell values, which makes every rectangle integral exact.
#[derive(Clone, Debug)]
pub struct IntegralTable {
    n: usize,
    prefix: Vec<f64>,
}

impl IntegralTable {
    pub fn new(w: &StepGraphon) -> Self {
        let n = w.n();
        let m = n + 1;
        let mut prefix = vec![0.0; m * m];
        for i in 0..n {
            for j in 0..n {
                prefix[(i + 1) * m + j + 1] =
                    w.get(i, j) + prefix[i * m + j + 1] + prefix[(i + 1) * m + j] - prefix[i * m + j];
            }
        }
        IntegralTable { n, prefix }
    }

    fn split(&self, x: f64) -> (usize, f64) {
        let t = (x.clamp(0.0, 1.0)) * self.n as f64;
        let i = (t.floor() as usize).min(self.n - 1);
        (i, t - i as f64)
    }

    /// `∫_0^x ∫_0^y w`.
    pub fn cumulative(&self, x: f64, y: f64) -> f64 {
        let m = self.n + 1;
        let (i, fx) = self.split(x);
        let (j, fy) = self.split(y);
        let p = |a: usize, b: usize| self.prefix[a * m + b];
        let p00 = p(i, j);
        let p10 = p(i + 1, j);
        let p01 = p(i, j + 1);
        let p11 = p(i + 1, j + 1);
        let v = p00 + fx * (p10 - p00) + fy * (p01 - p00) + fx * fy * (p11 - p10 - p01 + p00);
        v / (self.n * self.n) as f64
    }

    /// `∬_{[x0,x1]×[y0,y1]} w`.
    pub fn rect(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
        self.cumulative(x1, y1) - self.cumulative(x0, y1) - self.cumulative(x1, y0)
            + self.cumulative(x0, y0)
    }
}
