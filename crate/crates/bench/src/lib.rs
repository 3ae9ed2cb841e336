//! Fixed benchmark inputs. Criterion benchmarks live in `benches/`.

use robinson_core::synth::{noise_matrix, toeplitz_decay, NoiseModel, NoiseSpec};
use robinson_core::StepGraphon;

/// Toeplitz Robinson graphon plus sparse positive spikes, deterministic in `(n, seed)`.
pub fn noisy_toeplitz(n: usize, seed: u64) -> StepGraphon {
    let spikes = noise_matrix(
        n,
        &NoiseSpec {
            model: NoiseModel::SparseSpikes { height: 0.5, density: 0.2 },
            seed,
        },
    )
    .expect("valid spec");
    toeplitz_decay(n, seed, 1.0, 0.3).add(&spikes).expect("same size")
}

/// Zero-mean symmetric kernel with entries in `[-1, 1]`.
pub fn signed_kernel(n: usize, seed: u64) -> StepGraphon {
    noise_matrix(
        n,
        &NoiseSpec {
            model: NoiseModel::UniformBounded { epsilon: 1.0 },
            seed,
        },
    )
    .expect("valid spec")
}
