//! Generators: Robinson graphons, noise, scrambling and w-random graphs.
//!
//! All randomness comes from ChaCha8 streams keyed by the caller's seed, so a
//! given `(spec, seed)` always produces the same bytes.

use crate::cutnorm::{cut_norm, CutNormBudget, CutNormMode};
use crate::error::{Error, Result};
use crate::graphon::StepGraphon;
use crate::robinson::monotone_envelope;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

// Stream ids keep different uses of the same seed independent.
const STREAM_GENERATE: u64 = 1;
const STREAM_NOISE: u64 = 2;
const STREAM_SCRAMBLE: u64 = 3;
const STREAM_SAMPLE: u64 = 4;

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn one() -> f64 {
    1.0
}
fn default_decay() -> f64 {
    0.3
}
fn default_c() -> f64 {
    3.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum GeneratorSpec {
    /// `w_ij = h(|i−j|)` with `h(0) = height` and `h(d) = h(d−1)(1 − decay·U)`.
    #[serde(rename_all = "camelCase")]
    ToeplitzDecay {
        n: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default = "one")]
        height: f64,
        #[serde(default = "default_decay")]
        decay: f64,
    },
    /// Uniform `[0, scale)` entries pushed through the monotone envelope.
    #[serde(rename_all = "camelCase")]
    CumulativeEnvelope {
        n: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// `exp(−c|i−j|/n)`.
    SmoothExp {
        n: usize,
        #[serde(default = "default_c")]
        c: f64,
    },
    /// Cell averages of `x² + y²`.
    FigureOne { n: usize },
    /// Nonnegative test graphon with a few non-Robinson features, used for
    /// region pictures.
    FigureTwo { n: usize },
}

pub fn generate(spec: &GeneratorSpec) -> Result<StepGraphon> {
    let check = |n: usize| {
        if n == 0 {
            Err(Error::invalid("n must be positive"))
        } else {
            Ok(())
        }
    };
    match *spec {
        GeneratorSpec::ToeplitzDecay {
            n,
            seed,
            height,
            decay,
        } => {
            check(n)?;
            if !(0.0..=1.0).contains(&decay) || !(height >= 0.0) || !height.is_finite() {
                return Err(Error::invalid("need height >= 0 and decay in [0,1]"));
            }
            Ok(toeplitz_decay(n, seed, height, decay))
        }
        GeneratorSpec::CumulativeEnvelope { n, seed, scale } => {
            check(n)?;
            if !(scale >= 0.0) || !scale.is_finite() {
                return Err(Error::invalid("scale must be finite and nonnegative"));
            }
            Ok(cumulative_envelope(n, seed, scale))
        }
        GeneratorSpec::SmoothExp { n, c } => {
            check(n)?;
            if !(c >= 0.0) || !c.is_finite() {
                return Err(Error::invalid("c must be finite and nonnegative"));
            }
            Ok(smooth_exp(n, c))
        }
        GeneratorSpec::FigureOne { n } => {
            check(n)?;
            Ok(figure_one(n))
        }
        GeneratorSpec::FigureTwo { n } => {
            check(n)?;
            Ok(figure_two(n))
        }
    }
}

pub fn toeplitz_decay(n: usize, seed: u64, height: f64, decay: f64) -> StepGraphon {
    let mut r = rng(seed, STREAM_GENERATE);
    let mut h = vec![height; n];
    for d in 1..n {
        h[d] = h[d - 1] * (1.0 - decay * r.random::<f64>());
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            v[i * n + j] = h[i.abs_diff(j)];
        }
    }
    StepGraphon::from_raw(n, v)
}

pub fn cumulative_envelope(n: usize, seed: u64, scale: f64) -> StepGraphon {
    let mut r = rng(seed, STREAM_GENERATE);
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let x = scale * r.random::<f64>();
            v[i * n + j] = x;
            v[j * n + i] = x;
        }
    }
    monotone_envelope(&StepGraphon::from_raw(n, v))
}

pub fn smooth_exp(n: usize, c: f64) -> StepGraphon {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            v[i * n + j] = (-c * i.abs_diff(j) as f64 / n as f64).exp();
        }
    }
    StepGraphon::from_raw(n, v)
}

/// Mean of `x²` over cell `i` of `n`: `(b³ − a³) / (3(b − a))`.
fn mean_square(i: usize, n: usize) -> f64 {
    let a = i as f64 / n as f64;
    let b = (i + 1) as f64 / n as f64;
    (a * a + a * b + b * b) / 3.0
}

pub fn figure_one(n: usize) -> StepGraphon {
    let m: Vec<f64> = (0..n).map(|i| mean_square(i, n)).collect();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            v[i * n + j] = m[i] + m[j];
        }
    }
    StepGraphon::from_raw(n, v)
}

/// A decaying band with an off-diagonal bump and a shallow valley; values in `[0, 1.6]`.
pub fn figure_two(n: usize) -> StepGraphon {
    let nf = n as f64;
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let x = (i as f64 + 0.5) / nf;
            let y = (j as f64 + 0.5) / nf;
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            let band = 1.2 * (-3.0 * (hi - lo)).exp();
            let bump = 0.8 * (-((lo - 0.25).powi(2) + (hi - 0.8).powi(2)) / 0.01).exp();
            let valley = 0.3 * (-((lo - 0.6).powi(2) + (hi - 0.65).powi(2)) / 0.005).exp();
            v[i * n + j] = (band + bump - valley).clamp(0.0, 1.6);
        }
    }
    StepGraphon::from_raw(n, v)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "camelCase", deny_unknown_fields)]
pub enum NoiseModel {
    /// iid `Uniform(−ε, ε)` on every cell pair.
    UniformBounded { epsilon: f64 },
    /// `+height` on each cell pair with probability `density`.
    SparseSpikes { height: f64, density: f64 },
    /// `±ε` with probability `density` each cell pair.
    SignFlip { epsilon: f64, density: f64 },
}

/// A noise model plus its seed, written flat: `{"model": "signFlip", "epsilon": 0.1, "density": 0.5, "seed": 3}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "FlatNoiseSpec")]
pub struct NoiseSpec {
    #[serde(flatten)]
    pub model: NoiseModel,
    pub seed: u64,
}

// serde cannot combine `flatten` with `deny_unknown_fields`, so reading goes
// through a copy of the model enum that carries the seed in every variant.
#[derive(Deserialize)]
#[serde(tag = "model", rename_all = "camelCase", deny_unknown_fields)]
enum FlatNoiseSpec {
    UniformBounded {
        epsilon: f64,
        #[serde(default)]
        seed: u64,
    },
    SparseSpikes {
        height: f64,
        density: f64,
        #[serde(default)]
        seed: u64,
    },
    SignFlip {
        epsilon: f64,
        density: f64,
        #[serde(default)]
        seed: u64,
    },
}

impl From<FlatNoiseSpec> for NoiseSpec {
    fn from(f: FlatNoiseSpec) -> Self {
        let (model, seed) = match f {
            FlatNoiseSpec::UniformBounded { epsilon, seed } => (NoiseModel::UniformBounded { epsilon }, seed),
            FlatNoiseSpec::SparseSpikes {
                height,
                density,
                seed,
            } => (NoiseModel::SparseSpikes { height, density }, seed),
            FlatNoiseSpec::SignFlip {
                epsilon,
                density,
                seed,
            } => (NoiseModel::SignFlip { epsilon, density }, seed),
        };
        NoiseSpec { model, seed }
    }
}

/// Norms of the noise term `noisy − original`.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NoiseReport {
    pub cut_norm: f64,
    pub cut_norm_mode: CutNormMode,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

#[derive(Clone, Debug)]
pub struct Noisy {
    pub graphon: StepGraphon,
    pub noise: StepGraphon,
    pub report: NoiseReport,
}

pub fn noise_report(noise: &StepGraphon) -> NoiseReport {
    let cn = cut_norm(noise, &CutNormBudget::default());
    NoiseReport {
        cut_norm: cn.value,
        cut_norm_mode: cn.mode,
        l1: noise.lp_norm(1.0).expect("p valid"),
        l2: noise.lp_norm(2.0).expect("p valid"),
        linf: noise.sup_norm(),
    }
}

/// Draws the symmetric noise matrix alone.
pub fn noise_matrix(n: usize, spec: &NoiseSpec) -> Result<StepGraphon> {
    let prob = |d: f64| {
        if (0.0..=1.0).contains(&d) {
            Ok(())
        } else {
            Err(Error::invalid(format!("density must lie in [0,1], got {d}")))
        }
    };
    let nonneg = |e: f64, what: &str| {
        if e >= 0.0 && e.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid(format!("{what} must be finite and nonnegative")))
        }
    };
    match spec.model {
        NoiseModel::UniformBounded { epsilon } => nonneg(epsilon, "epsilon")?,
        NoiseModel::SparseSpikes { height, density } => {
            nonneg(height, "spike height")?;
            prob(density)?
        }
        NoiseModel::SignFlip { epsilon, density } => {
            nonneg(epsilon, "epsilon")?;
            prob(density)?
        }
    }
    let mut r = rng(spec.seed, STREAM_NOISE);
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let x = match spec.model {
                NoiseModel::UniformBounded { epsilon } => {
                    if epsilon == 0.0 {
                        0.0
                    } else {
                        r.random_range(-epsilon..epsilon)
                    }
                }
                NoiseModel::SparseSpikes { height, density } => {
                    if r.random::<f64>() < density {
                        height
                    } else {
                        0.0
                    }
                }
                NoiseModel::SignFlip { epsilon, density } => {
                    let hit = r.random::<f64>() < density;
                    let up = r.random::<bool>();
                    match (hit, up) {
                        (false, _) => 0.0,
                        (true, true) => epsilon,
                        (true, false) => -epsilon,
                    }
                }
            };
            v[i * n + j] = x;
            v[j * n + i] = x;
        }
    }
    Ok(StepGraphon::from_raw(n, v))
}

pub fn add_noise(w: &StepGraphon, spec: &NoiseSpec) -> Result<Noisy> {
    let raw = noise_matrix(w.n(), spec)?;
    let graphon = w.add(&raw)?;
    // Report the noise actually present after rounding.
    let noise = graphon.sub(w)?;
    let report = noise_report(&noise);
    Ok(Noisy {
        graphon,
        noise,
        report,
    })
}

/// Random simultaneous relabelling; returns `(w∘π, π)` with `out[i][j] = w[π(i)][π(j)]`.
pub fn permute_scramble(w: &StepGraphon, seed: u64) -> (StepGraphon, Vec<usize>) {
    let mut perm: Vec<usize> = (0..w.n()).collect();
    perm.shuffle(&mut rng(seed, STREAM_SCRAMBLE));
    let out = w.permuted(&perm).expect("shuffle yields a permutation");
    (out, perm)
}

pub fn inverse_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    inv
}

/// A w-random graph on `vertices` vertices: positions uniform in `[0,1]`,
/// edges independent with probability `w` at the pair of positions, no loops.
pub fn sample_w_random_graph(w: &StepGraphon, vertices: usize, seed: u64) -> Result<Vec<Vec<bool>>> {
    if w.min() < 0.0 || w.max() > 1.0 {
        return Err(Error::invalid("edge probabilities must lie in [0,1]"));
    }
    let n = w.n();
    let mut r = rng(seed, STREAM_SAMPLE);
    let cell: Vec<usize> = (0..vertices).map(|_| r.random_range(0..n)).collect();
    let mut adj = vec![vec![false; vertices]; vertices];
    for a in 0..vertices {
        for b in (a + 1)..vertices {
            let p = w.get(cell[a], cell[b]);
            let e = r.random::<f64>() < p;
            adj[a][b] = e;
            adj[b][a] = e;
        }
    }
    Ok(adj)
}
