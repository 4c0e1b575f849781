mod common;

use common::*;
use histofeat::classifiers::{ClassifierSpec, Matrix, Variant};
use histofeat::evaluation::{compute_metrics, confusion, cross_validate, ConfusionMatrix};
use histofeat::ingestion::{stratified_folds, FoldPlan, Label};
use histofeat::Error;
use histofeat::rng::SplitMix64;

#[test]
fn metrics_match_oracle_on_exhaustive_grid() {
    let mut checked = 0;
    for tp in 0..=10 {
        for fp in 0..=10 {
            for fn_ in 0..=10 {
                for tn in 0..=10 {
                    let cm = ConfusionMatrix::new(tp, fp, fn_, tn);
                    if cm.total() == 0 {
                        assert!(compute_metrics(&cm).is_err());
                        continue;
                    }
                    let got = compute_metrics(&cm).unwrap();
                    let want = metrics_oracle(&cm);
                    for (g, w) in got.values().iter().zip(want) {
                        assert!((g - w).abs() <= 1e-12, "{cm:?}: {g} vs {w}");
                    }
                    assert!((-1.0..=1.0).contains(&got.mcc));
                    assert!((got.bacc - (got.r + got.s) / 2.0).abs() <= 1e-12);
                    checked += 1;
                }
            }
        }
    }
    assert_eq!(checked, 14_640);
}

#[test]
fn swapping_the_positive_class() {
    for tp in 0..=6 {
        for fp in 0..=6 {
            for fn_ in 0..=6 {
                for tn in 0..=6 {
                    let cm = ConfusionMatrix::new(tp, fp, fn_, tn);
                    if cm.total() == 0 {
                        continue;
                    }
                    let a = compute_metrics(&cm).unwrap();
                    let b = compute_metrics(&cm.swapped()).unwrap();
                    assert_eq!(a.a, b.a);
                    assert!((a.mcc - b.mcc).abs() < 1e-12);
                    assert_eq!((a.r, a.s), (b.s, b.r));
                }
            }
        }
    }
}

#[test]
fn confusion_matches_per_sample_tally() {
    use Label::{Abnormal as A, Normal as N};
    let t = [N, N, A, A, N, A, N, N, A, A];
    let p = [N, A, A, N, N, A, A, N, N, A];
    let cm = confusion(&t, &p, N).unwrap();
    let mut tally = [0u64; 4];
    for (a, b) in t.iter().zip(&p) {
        let k = match (*a == N, *b == N) {
            (true, true) => 0,
            (false, true) => 1,
            (true, false) => 2,
            (false, false) => 3,
        };
        tally[k] += 1;
    }
    assert_eq!([cm.tp, cm.fp, cm.fn_, cm.tn], tally);
}

#[test]
fn separable_copies_score_perfectly() {
    let labels: Vec<Label> = (0..50)
        .map(|i| if i < 25 { Label::Normal } else { Label::Abnormal })
        .collect();
    let rows: Vec<[f64; 2]> = labels
        .iter()
        .map(|&l| if l == Label::Normal { [1.0, 1.0] } else { [-1.0, -1.0] })
        .collect();
    let x = Matrix::from_rows(&rows).unwrap();
    let plan = stratified_folds(&labels, 5, 0).unwrap();
    for v in Variant::ALL {
        let r = cross_validate("copies", &x, &labels, &ClassifierSpec::new(v), &plan, Label::Normal).unwrap();
        assert_eq!(r.metrics.a, 1.0, "{v}");
    }
}

#[test]
fn pooled_counts_equal_concatenated_predictions() {
    let (x, y) = blobs(100, 1.0, 44);
    let plan = stratified_folds(&y, 5, 44).unwrap();
    for v in Variant::ALL {
        let r = cross_validate("b", &x, &y, &ClassifierSpec::new(v), &plan, Label::Abnormal).unwrap();
        let sum = r.folds.iter().fold(ConfusionMatrix::default(), |a, &b| a + b);
        assert_eq!(sum, r.pooled);
        assert_eq!(confusion(&y, &r.predictions, Label::Abnormal).unwrap(), r.pooled);
        assert_eq!(r.pooled.total(), 100);
    }
}

#[test]
fn single_class_training_fold_is_an_error() {
    use Label::{Abnormal as A, Normal as N};
    let y = [N, N, N, N, A, A];
    let x = Matrix::from_rows(&(0..6).map(|i| [i as f64]).collect::<Vec<_>>()).unwrap();
    // both abnormal samples held out together: fold 0 trains on normals only
    let plan = FoldPlan::from_assignment(2, 0, vec![1, 1, 0, 0, 0, 0]).unwrap();
    let err = cross_validate("x", &x, &y, &ClassifierSpec::new(Variant::Dt), &plan, N).unwrap_err();
    assert!(matches!(err, Error::Training(_)), "{err}");
    assert!(FoldPlan::from_assignment(2, 0, vec![0, 2]).is_err());
}

#[test]
fn random_labels_give_null_mcc() {
    for v in Variant::ALL {
        let mut mean = 0.0;
        for seed in 0..20u64 {
            let mut rng = SplitMix64::new(1000 + seed);
            let n = 1000;
            let rows: Vec<[f64; 4]> = (0..n)
                .map(|_| [rng.next_f64(), rng.next_f64(), rng.next_f64(), rng.next_f64()])
                .collect();
            let y: Vec<Label> = (0..n)
                .map(|_| if rng.below(2) == 0 { Label::Normal } else { Label::Abnormal })
                .collect();
            let x = Matrix::from_rows(&rows).unwrap();
            let plan = stratified_folds(&y, 5, seed).unwrap();
            let mut spec = ClassifierSpec::new(v).with_seed(seed);
            spec.trees = 30;
            let r = cross_validate("noise", &x, &y, &spec, &plan, Label::Normal).unwrap();
            mean += r.metrics.mcc / 20.0;
            assert!(r.metrics.mcc.abs() <= 0.15, "{v} seed {seed}: MCC {}", r.metrics.mcc);
        }
        assert!(mean.abs() <= 0.15, "{v}: mean MCC {mean}");
    }
}
