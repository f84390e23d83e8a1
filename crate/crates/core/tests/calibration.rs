use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use restphase_core::calibration::{threshold_sweep, LabeledTransition, TAU_STEPS};

/// Independent per-threshold evaluation.
fn brute_force(labeled: &[LabeledTransition]) -> Vec<(f64, usize, usize, usize, usize, f64)> {
    (1..=100)
        .map(|k| {
            let tau = k as f64 / 100.0;
            let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
            for l in labeled {
                if !l.in_valid_window {
                    continue;
                }
                match (l.motion_value < tau, l.is_rest) {
                    (true, true) => tp += 1,
                    (true, false) => fp += 1,
                    (false, false) => tn += 1,
                    (false, true) => fn_ += 1,
                }
            }
            let tpr = tp as f64 / (tp + fn_) as f64;
            let tnr = tn as f64 / (tn + fp) as f64;
            (tau, tp, fp, tn, fn_, (tpr + tnr) / 2.0)
        })
        .collect()
}

fn random_labels(seed: u64, n: usize) -> Vec<LabeledTransition> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<LabeledTransition> = (0..n)
        .map(|_| {
            let is_rest = rng.random_bool(0.4);
            let center = if is_rest { 0.15 } else { 0.45 };
            LabeledTransition {
                motion_value: (center + rng.random_range(-0.3..0.3f64)).max(0.0),
                is_rest,
                in_valid_window: rng.random_bool(0.85),
            }
        })
        .collect();
    // guarantee both classes in the window
    out.push(LabeledTransition { motion_value: 0.1, is_rest: true, in_valid_window: true });
    out.push(LabeledTransition { motion_value: 0.9, is_rest: false, in_valid_window: true });
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sweep_rows_equal_brute_force(seed in any::<u64>(), n in 2usize..300) {
        let labels = random_labels(seed, n);
        let sweep = threshold_sweep(&labels).unwrap();
        let oracle = brute_force(&labels);
        prop_assert_eq!(sweep.rows.len(), TAU_STEPS);
        for (row, o) in sweep.rows.iter().zip(&oracle) {
            prop_assert_eq!((row.tau, row.counts.tp, row.counts.fp, row.counts.tn, row.counts.fn_), (o.0, o.1, o.2, o.3, o.4));
            prop_assert_eq!(row.balanced_accuracy, o.5);
        }
        let best = oracle.iter().map(|o| o.5).fold(f64::NEG_INFINITY, f64::max);
        let first = oracle.iter().find(|o| o.5 == best).unwrap();
        prop_assert_eq!(sweep.best_tau, first.0);
        prop_assert!((0.0..=1.0).contains(&sweep.auc));
    }
}

#[test]
fn separable_labels_give_unit_auc() {
    let labels: Vec<_> = (0..50)
        .map(|i| LabeledTransition {
            motion_value: if i % 3 == 0 { 0.05 } else { 0.9 },
            is_rest: i % 3 == 0,
            in_valid_window: true,
        })
        .collect();
    let s = threshold_sweep(&labels).unwrap();
    assert_eq!(s.auc, 1.0);
    assert_eq!(s.best().balanced_accuracy, 1.0);
}

#[test]
fn shuffled_labels_give_chance_auc() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let values: Vec<f64> = (0..400).map(|_| rng.random_range(0.0..1.0)).collect();
    let mut rest: Vec<bool> = (0..400).map(|i| i < 160).collect();
    let mut aucs = Vec::new();
    for _ in 0..100 {
        rest.shuffle(&mut rng);
        let labels: Vec<_> = values
            .iter()
            .zip(&rest)
            .map(|(&v, &r)| LabeledTransition {
                motion_value: v,
                is_rest: r,
                in_valid_window: true,
            })
            .collect();
        aucs.push(threshold_sweep(&labels).unwrap().auc);
    }
    let mean = aucs.iter().sum::<f64>() / aucs.len() as f64;
    assert!((mean - 0.5).abs() <= 0.05, "mean auc {mean}");
}
