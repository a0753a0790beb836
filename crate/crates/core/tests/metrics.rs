mod oracles;

use proptest::prelude::*;
use stackliver::evaluation::{basic_metrics, cohen_kappa, confusion, roc_auc, stratified_kfold, ConfusionMatrix};
use stackliver::numerics::Rng;

/// Random labelled scores with both classes present and ties injected by
/// rounding some scores onto a coarse grid.
fn random_case(rng: &mut Rng) -> (Vec<u8>, Vec<f64>) {
    let n = 2 + rng.below(499);
    let mut y: Vec<u8> = (0..n).map(|_| rng.below(2) as u8).collect();
    y[0] = 0;
    y[1] = 1;
    let coarse = rng.next_f64() < 0.5;
    let s = (0..n)
        .map(|_| {
            let v = rng.normal();
            if coarse {
                (v * 4.0).round() / 4.0
            } else {
                v
            }
        })
        .collect();
    (y, s)
}

#[test]
fn auc_matches_all_pairs_oracle() {
    let mut rng = Rng::new(11);
    for _ in 0..1000 {
        let (y, s) = random_case(&mut rng);
        let got = roc_auc(&y, &s).unwrap();
        let want = oracles::auc_all_pairs(&y, &s);
        assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
    }
}

fn random_cm(rng: &mut Rng) -> ConfusionMatrix {
    let mut cell = || if rng.below(10) == 0 { 0 } else { rng.below(200) as u64 };
    let mut cm = ConfusionMatrix {
        tn: cell(),
        fp: cell(),
        fn_: cell(),
        tp: cell(),
    };
    if cm.total() == 0 {
        cm.tp = 1;
    }
    cm
}

#[test]
fn kappa_and_prf_match_formula_oracles() {
    let mut rng = Rng::new(12);
    for _ in 0..1000 {
        let cm = random_cm(&mut rng);
        let k = cohen_kappa(&cm).unwrap();
        let want = oracles::kappa_2x2(cm.tn, cm.fp, cm.fn_, cm.tp);
        assert!((k.kappa - want).abs() <= 1e-12, "{cm:?}: {} vs {want}", k.kappa);

        let m = basic_metrics(&cm).unwrap();
        let acc = (cm.tn + cm.tp) as f64 / cm.total() as f64;
        assert!((m.accuracy - acc).abs() <= 1e-12);
        let pos = oracles::prf(cm.tp, cm.fp, cm.fn_);
        let neg = oracles::prf(cm.tn, cm.fn_, cm.fp);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12;
        for (got, want) in [(&m.positive, pos), (&m.negative, neg)] {
            assert!(close(got.precision, want.0), "{cm:?}");
            assert!(close(got.recall, want.1), "{cm:?}");
            assert!(close(got.f1, want.2), "{cm:?}");
        }
        let macro_ = [(pos.0 + neg.0) / 2.0, (pos.1 + neg.1) / 2.0, (pos.2 + neg.2) / 2.0];
        assert!(close(m.macro_avg.precision, macro_[0]));
        assert!(close(m.macro_avg.recall, macro_[1]));
        assert!(close(m.macro_avg.f1, macro_[2]));
        let n = cm.total() as f64;
        let (w1, w0) = ((cm.tp + cm.fn_) as f64 / n, (cm.tn + cm.fp) as f64 / n);
        assert!(close(m.weighted.precision, w1 * pos.0 + w0 * neg.0));
        assert!(close(m.weighted.recall, w1 * pos.1 + w0 * neg.1));
        assert!(close(m.weighted.f1, w1 * pos.2 + w0 * neg.2));
    }
}

fn labelled_scores() -> impl Strategy<Value = (Vec<u8>, Vec<f64>)> {
    (2usize..200).prop_flat_map(|n| {
        (
            proptest::collection::vec(0u8..2, n),
            proptest::collection::vec(-50i32..50, n),
        )
            .prop_map(|(mut y, s)| {
                y[0] = 0;
                y[1] = 1;
                (y, s.into_iter().map(|v| f64::from(v) / 10.0).collect())
            })
    })
}

proptest! {
    #[test]
    fn auc_invariant_under_monotone_transform((y, s) in labelled_scores(), a in 0.1f64..5.0, b in -3.0f64..3.0) {
        let base = roc_auc(&y, &s).unwrap();
        let t: Vec<f64> = s.iter().map(|v| (a * v + b).tanh() * 0.5 + (a * v).exp().ln_1p()).collect();
        prop_assert!((roc_auc(&y, &t).unwrap() - base).abs() <= 1e-12);
        let neg: Vec<f64> = s.iter().map(|v| -v).collect();
        prop_assert!((roc_auc(&y, &neg).unwrap() - (1.0 - base)).abs() <= 1e-12);
    }

    #[test]
    fn metric_ranges_and_weighted_bounds(tn in 0u64..300, fp in 0u64..300, fn_ in 0u64..300, tp in 1u64..300) {
        let cm = ConfusionMatrix { tn, fp, fn_, tp };
        let m = basic_metrics(&cm).unwrap();
        let k = cohen_kappa(&cm).unwrap().kappa;
        prop_assert!((-1.0..=1.0).contains(&k));
        for c in [&m.positive, &m.negative] {
            for v in [c.precision, c.recall, c.f1] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
        let between = |w: f64, a: f64, b: f64| w >= a.min(b) - 1e-12 && w <= a.max(b) + 1e-12;
        prop_assert!(between(m.weighted.precision, m.positive.precision, m.negative.precision));
        prop_assert!(between(m.weighted.recall, m.positive.recall, m.negative.recall));
        prop_assert!(between(m.weighted.f1, m.positive.f1, m.negative.f1));
    }

    #[test]
    fn confusion_counts_every_sample(pairs in proptest::collection::vec((0u8..2, 0u8..2), 1..300)) {
        let (t, p): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
        let cm = confusion(&t, &p).unwrap();
        prop_assert_eq!(cm.total() as usize, t.len());
    }

    #[test]
    fn kfold_is_a_partition(y in proptest::collection::vec(0u8..2, 10..200), k in 2usize..6, seed in any::<u64>()) {
        let mut y = y;
        for i in 0..k {
            y[i] = 0;
            y[k + i] = 1;
        }
        let folds = stratified_kfold(&y, k, seed).unwrap();
        prop_assert_eq!(folds.len(), k);
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        prop_assert_eq!(all, (0..y.len()).collect::<Vec<_>>());
    }
}
