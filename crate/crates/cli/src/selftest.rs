//! Quick invariant suites against brute-force oracles on tiny instances.
//!
//! These mirror a slice of the library's test suite so an installed binary
//! can check itself without the source tree.

use robinson_core::combinatorics::{split_with_small_remainder, verify_split, IntervalSet, StepFunction};
use robinson_core::io::{format_graphon, parse_graphon};
use robinson_core::synth::{cumulative_envelope, noise_matrix, smooth_exp, toeplitz_decay, NoiseModel, NoiseSpec};
use robinson_core::{
    closed_form_robinson_ae, compute_regions, cut_norm_exact, cut_norm_local_search, lambda_exact, recover,
    robinson_approx, theoretical_bound, verify_partition, RecoveryConfig, SearchMode, StepGraphon,
};
use std::path::Path;

pub struct Row {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

pub fn run(seed: u64) -> Vec<Row> {
    vec![
        recognition(seed),
        cut_norm_oracle(seed),
        continuity(seed),
        approximation(seed),
        closed_form(seed),
        regions(seed),
        split(seed),
        recovery(seed),
        round_trip(seed),
    ]
}

/// Symmetric matrix with entries in `[base − 1, base + 1]`.
fn kernel(n: usize, seed: u64, base: f64) -> StepGraphon {
    let noise = noise_matrix(
        n,
        &NoiseSpec {
            model: NoiseModel::UniformBounded { epsilon: 1.0 },
            seed,
        },
    )
    .expect("valid noise spec");
    noise.map(|v| v + base).expect("finite")
}

fn robinson(n: usize, seed: u64) -> StepGraphon {
    match seed % 3 {
        0 => toeplitz_decay(n, seed, 1.0, 0.4),
        1 => cumulative_envelope(n, seed, 2.0),
        _ => smooth_exp(n, (seed % 7) as f64),
    }
}

/// Cut norm by listing every `S` and `T`.
fn brute_cut_norm(w: &StepGraphon) -> f64 {
    let n = w.n();
    let mut best = 0.0f64;
    for s in 0u32..1 << n {
        for t in 0u32..1 << n {
            let mut acc = 0.0;
            for i in (0..n).filter(|i| s >> i & 1 == 1) {
                for j in (0..n).filter(|j| t >> j & 1 == 1) {
                    acc += w.get(i, j);
                }
            }
            best = best.max(acc.abs());
        }
    }
    best / (n * n) as f64
}

fn row(name: &'static str, failures: Vec<String>, ok_detail: String) -> Row {
    Row {
        name,
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            ok_detail
        } else {
            format!("{} failure(s), first: {}", failures.len(), failures[0])
        },
    }
}

fn recognition(seed: u64) -> Row {
    let mut bad = Vec::new();
    for k in 0..30 {
        let n = 2 + (k % 9) as usize;
        let w = robinson(n, seed + k);
        match lambda_exact(&w, 1) {
            Ok(c) if c.value == 0.0 => {}
            other => bad.push(format!("robinson n={n}: {:?}", other.map(|c| c.value))),
        }
        // Lift the corner above its neighbours.
        let mut rows = w.rows();
        let lift = rows[0][1].max(rows[1][n - 1]) + 0.25;
        rows[0][n - 1] = lift;
        rows[n - 1][0] = lift;
        if n >= 3 {
            let planted = StepGraphon::from_rows(&rows).expect("symmetric");
            let v = lambda_exact(&planted, 1).map(|c| c.value).unwrap_or(-1.0);
            if v < 0.25 / (n * n) as f64 - 1e-12 {
                bad.push(format!("planted n={n}: {v}"));
            }
        }
    }
    row("recognition", bad, "30 Robinson + 23 planted".into())
}

fn cut_norm_oracle(seed: u64) -> Row {
    let mut bad = Vec::new();
    for k in 0..20 {
        let n = 1 + (k % 6) as usize;
        let w = kernel(n, seed + 100 + k, 0.0);
        let exact = cut_norm_exact(&w).map(|r| r.value).unwrap_or(f64::NAN);
        let brute = brute_cut_norm(&w);
        let ls = cut_norm_local_search(&w, 10, k).value;
        if (exact - brute).abs() > 1e-12 || ls > exact + 1e-12 {
            bad.push(format!("n={n}: exact {exact}, brute {brute}, local {ls}"));
        }
    }
    row("cut norm vs brute force", bad, "20 instances, n ≤ 6".into())
}

fn continuity(seed: u64) -> Row {
    let mut bad = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for k in 0..40 {
        let n = 2 + (k % 6) as usize;
        let w = kernel(n, seed + 200 + k, 1.0);
        let u = kernel(n, seed + 300 + k, 1.0);
        let (lw, lu) = (lambda_exact(&w, 1), lambda_exact(&u, 1));
        let d = cut_norm_exact(&w.sub(&u).expect("same n")).map(|r| r.value);
        match (lw, lu, d) {
            (Ok(a), Ok(b), Ok(d)) => {
                let slack = (a.value - b.value).abs() - 2.0 * d;
                worst = worst.max(slack);
                if slack > 1e-9 {
                    bad.push(format!("n={n}: slack {slack:e}"));
                }
            }
            _ => bad.push(format!("n={n}: solver error")),
        }
    }
    row("Λ continuity", bad, format!("40 pairs, worst slack {worst:.2e}"))
}

fn approximation(seed: u64) -> Row {
    let mut bad = Vec::new();
    for k in 0..20 {
        let n = 2 + (k % 7) as usize;
        let w = kernel(n, seed + 400 + k, 1.0);
        let alpha = 1.0 / n as f64;
        let ex = robinson_approx(&w, alpha, n, SearchMode::Exact);
        let he = robinson_approx(&w, alpha, n, SearchMode::Heuristic);
        match (ex, he) {
            (Ok(ex), Ok(he)) => {
                if !ex.robinson_validated || !he.robinson_validated {
                    bad.push(format!("n={n}: output not Robinson"));
                }
                let above = (0..n * n).any(|p| he.values.values()[p] > ex.values.values()[p] + 1e-12);
                if above {
                    bad.push(format!("n={n}: heuristic above exact"));
                }
            }
            _ => bad.push(format!("n={n}: solver error")),
        }
    }
    row("approximation validity", bad, "20 instances, heuristic ≤ exact".into())
}

fn closed_form(seed: u64) -> Row {
    let mut bad = Vec::new();
    let mut gap = 0.0f64;
    for k in 0..20 {
        let n = 3 + (k % 6) as usize;
        let w = robinson(n, seed + 500 + k);
        let alpha = (1 + k as usize % 2) as f64 / n as f64;
        match (
            robinson_approx(&w, alpha, n, SearchMode::Exact),
            closed_form_robinson_ae(&w, alpha, n),
        ) {
            (Ok(a), Ok(c)) => {
                let g = a.values.sub(&c.values).expect("same n").sup_norm();
                gap = gap.max(g);
                if g > 1e-9 {
                    bad.push(format!("n={n}: gap {g:e}"));
                }
            }
            _ => bad.push(format!("n={n}: solver error")),
        }
    }
    row("closed form on Robinson inputs", bad, format!("20 instances, gap {gap:.1e}"))
}

fn regions(seed: u64) -> Row {
    let mut bad = Vec::new();
    for k in 0..6 {
        let n = 3 + (k % 4) as usize;
        let w = kernel(n, seed + 600 + k, 1.0).map(f64::abs).expect("finite");
        match compute_regions(&w, 1 + (k % 4) as usize, 0.1, 64) {
            Ok(rm) if verify_partition(&rm) => {}
            Ok(_) => bad.push(format!("n={n}: not a partition")),
            Err(e) => bad.push(format!("n={n}: {e}")),
        }
    }
    row("region partition", bad, "6 maps at raster 64".into())
}

fn split(seed: u64) -> Row {
    let mut bad = Vec::new();
    for k in 0..50u64 {
        let n = 2 + (k % 8) as usize;
        let values = kernel(n, seed + 700 + k, 0.0).row(0).to_vec();
        let u = StepFunction::uniform(values).expect("finite");
        let p = IntervalSet::new(vec![(0.05, 0.4), (0.5, 0.95)]).expect("disjoint");
        let beta = 0.07 + 0.01 * (k % 10) as f64;
        match split_with_small_remainder(&u, &p, beta) {
            Ok(r) => {
                if let Err(e) = verify_split(&u, &p, beta, &r) {
                    bad.push(format!("β={beta}: {e}"));
                }
            }
            Err(e) => bad.push(format!("β={beta}: {e}")),
        }
    }
    row("split with small remainder", bad, "50 instances".into())
}

fn recovery(seed: u64) -> Row {
    let mut bad = Vec::new();
    for k in 0..4 {
        let truth = toeplitz_decay(6, seed + 800 + k, 1.0, 0.3);
        let w = truth
            .add(&kernel(6, seed + 900 + k, 0.0).scale(0.05))
            .expect("same n")
            .map(|v| v.max(0.0))
            .expect("finite");
        match recover(&w, 6.0, &RecoveryConfig::default()) {
            Ok((approx, report)) => {
                let bound = theoretical_bound(6.0, report.lambda_w, None).unwrap_or(f64::NAN);
                if (bound - report.theoretical_bound).abs() > 1e-12 || !approx.robinson_validated {
                    bad.push(format!("seed {k}: report not recomputable"));
                }
            }
            Err(e) => bad.push(format!("seed {k}: {e}")),
        }
    }
    row("recovery report", bad, "4 runs, bound recomputed".into())
}

fn round_trip(seed: u64) -> Row {
    let mut bad = Vec::new();
    for k in 0..10 {
        let w = kernel(1 + k as usize, seed + 1000 + k, 0.3).scale(1.0 / 3.0);
        match parse_graphon(&format_graphon(&w), Path::new("<selftest>")) {
            Ok(back) if back == w => {}
            Ok(_) => bad.push(format!("n={}: values changed", w.n())),
            Err(e) => bad.push(e.to_string()),
        }
    }
    row("matrix format round trip", bad, "10 matrices, bit-exact".into())
}
