//! Property tests over small random step graphons.

mod common;

use common::{cut_norm_oracle, lambda_oracle, robinson_oracle};
use proptest::prelude::*;
use robinson_core::io::{format_graphon, parse_graphon};
use robinson_core::synth::permute_scramble;
use robinson_core::*;
use std::path::Path;

/// Symmetric `n × n` matrix, `n ∈ [lo, hi]`, entries in `[a, b]`.
fn graphon(lo: usize, hi: usize, a: f64, b: f64) -> impl Strategy<Value = StepGraphon> {
    (lo..=hi).prop_flat_map(move |n| {
        prop::collection::vec(a..=b, n * (n + 1) / 2).prop_map(move |upper| {
            let mut it = upper.into_iter();
            StepGraphon::from_upper(n, |_, _| it.next().unwrap()).unwrap()
        })
    })
}

fn pair(lo: usize, hi: usize) -> impl Strategy<Value = (StepGraphon, StepGraphon)> {
    (lo..=hi).prop_flat_map(|n| (graphon(n, n, 0.0, 1.0), graphon(n, n, 0.0, 1.0)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cut_norm_matches_oracle_and_is_symmetric(w in graphon(1, 6, -1.0, 1.0)) {
        let exact = cut_norm_exact(&w).unwrap().value;
        prop_assert!((exact - cut_norm_oracle(&w)).abs() < 1e-12);
        prop_assert!((cut_norm_exact(&w.scale(-1.0)).unwrap().value - exact).abs() < 1e-12);
        prop_assert!((cut_norm_exact(&w.reversed()).unwrap().value - exact).abs() < 1e-12);
    }

    #[test]
    fn cut_norm_ignores_refinement(w in graphon(1, 5, -1.0, 1.0)) {
        let a = cut_norm_exact(&w).unwrap().value;
        let b = cut_norm_exact(&w.refine(2).unwrap()).unwrap().value;
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn local_search_is_a_lower_bound(w in graphon(1, 12, -1.0, 1.0), seed in any::<u64>()) {
        let ls = cut_norm_local_search(&w, 5, seed);
        let exact = cut_norm_exact(&w).unwrap().value;
        prop_assert!(ls.value <= exact * (1.0 + 1e-12) + 1e-15);
        // The reported value is the witness rectangle's integral.
        let rect = graphon_rect(&w, ls.witness_s.indices(), ls.witness_t.indices());
        prop_assert!((rect.abs() - ls.value).abs() < 1e-12);
    }

    #[test]
    fn lambda_matches_oracle(w in graphon(1, 7, 0.0, 1.0)) {
        let v = lambda_exact(&w, 1).unwrap();
        prop_assert!((v.value - lambda_oracle(&w, 1)).abs() < 1e-12);
        prop_assert!((v.recompute(&w).unwrap() - v.value).abs() < 1e-12);
    }

    #[test]
    fn lambda_heuristic_never_exceeds_exact(w in graphon(1, 7, 0.0, 1.0), seed in any::<u64>()) {
        let h = lambda_heuristic(&w, 2, 5, seed).unwrap().value;
        let e = lambda_exact(&w, 2).unwrap().value;
        prop_assert!(h <= e + 1e-12);
    }

    #[test]
    fn lambda_is_reversal_invariant(w in graphon(1, 7, 0.0, 1.0)) {
        let a = lambda_exact(&w, 1).unwrap().value;
        let b = lambda_exact(&w.reversed(), 1).unwrap().value;
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn envelope_is_robinson_dominating_and_idempotent(w in graphon(1, 10, -1.0, 1.0)) {
        let e = monotone_envelope(&w);
        prop_assert!(robinson_oracle(&e, 0.0));
        prop_assert!(e.values().iter().zip(w.values()).all(|(a, b)| a >= b));
        prop_assert_eq!(monotone_envelope(&e), e);
    }

    #[test]
    fn robinson_check_agrees_with_oracle(w in graphon(1, 7, 0.0, 1.0)) {
        let check = w.is_robinson(0.0);
        prop_assert_eq!(check.robinson, robinson_oracle(&w, 0.0));
        // Violations touching a diagonal cell only show once cells are split.
        prop_assert_eq!(lambda_exact(&w, 2).unwrap().value == 0.0, check.robinson);
    }

    #[test]
    fn approx_heuristic_below_exact(w in graphon(2, 7, 0.0, 1.0), k in 1usize..3) {
        let alpha = k as f64 / (2 * w.n()) as f64;
        let ex = robinson_approx(&w, alpha, w.n(), SearchMode::Exact).unwrap();
        let he = robinson_approx(&w, alpha, w.n(), SearchMode::Heuristic).unwrap();
        prop_assert!(ex.robinson_validated && he.robinson_validated);
        prop_assert!(he.values.values().iter().zip(ex.values.values()).all(|(h, e)| *h <= e + 1e-12));
    }

    #[test]
    fn approx_lipschitz_bound((w, u) in pair(2, 6)) {
        let alpha = 1.0 / w.n() as f64;
        let rw = robinson_approx(&w, alpha, w.n(), SearchMode::Exact).unwrap();
        let ru = robinson_approx(&u, alpha, u.n(), SearchMode::Exact).unwrap();
        let gap = rw.values.sub(&ru.values).unwrap().sup_norm();
        let d = cut_norm_exact(&w.sub(&u).unwrap()).unwrap().value;
        prop_assert!(gap <= d / (alpha * alpha) + 1e-9);
    }

    #[test]
    fn scramble_round_trips(w in graphon(1, 12, 0.0, 1.0), seed in any::<u64>()) {
        let (s, perm) = permute_scramble(&w, seed);
        let back = s.permuted(&synth::inverse_permutation(&perm)).unwrap();
        prop_assert_eq!(back, w);
    }

    #[test]
    fn matrix_format_round_trips(w in graphon(1, 9, -1e6, 1e6)) {
        let back = parse_graphon(&format_graphon(&w), Path::new("mem")).unwrap();
        prop_assert_eq!(back, w);
    }

    #[test]
    fn recovery_report_is_recomputable(w in graphon(3, 7, 0.0, 1.0)) {
        let (approx, rep) = recover(&w, 7.0, &RecoveryConfig::default()).unwrap();
        prop_assert!(approx.robinson_validated);
        let bound = theoretical_bound(7.0, rep.lambda_w, None).unwrap();
        prop_assert!((bound - rep.theoretical_bound).abs() <= 1e-12);
        if let Some(m) = rep.big_m {
            prop_assert!((m - 2.0 * rep.lambda_w.powf(-1.0 / 6.0)).abs() <= 1e-12 * m);
        }
        prop_assert_eq!(rep.case_taken == CaseTaken::AlphaZero, rep.lambda_w == 0.0 && w.is_robinson(1e-12).robinson);
        let json = serde_json::to_string(&rep).unwrap();
        prop_assert!(json.contains("\"caseTaken\""));
    }

    #[test]
    fn regions_nest_and_partition(w in graphon(2, 6, 0.0, 2.0), m in 1usize..4) {
        let rm = compute_regions(&w, m, 0.1, 32).unwrap();
        prop_assert!(verify_partition(&rm));
        // Higher levels sit inside lower ones: black sets shrink with k.
        for k in 1..rm.levels() {
            for i in 0..rm.raster {
                for j in i..rm.raster {
                    prop_assert!(!rm.in_black(k, i, j) || rm.in_black(k - 1, i, j));
                }
            }
        }
    }
}

fn graphon_rect(w: &StepGraphon, s: &[usize], t: &[usize]) -> f64 {
    let n = w.n();
    s.iter().map(|&i| t.iter().map(|&j| w.get(i, j)).sum::<f64>()).sum::<f64>() / (n * n) as f64
}
