mod common;

use common::eer_sweep;
use intel_align::calibration::{far, frr, split, split_mask};
use intel_align::classifier::{accuracy, baseline_rs, classify, rs_expected_accuracy};
use intel_align::{calibrate_threshold, Label, PairScore, RateMode};
use proptest::prelude::*;

fn labeled_scores() -> impl Strategy<Value = Vec<PairScore>> {
    // a coarse grid forces ties between scores and across classes
    let score = prop_oneof![0.0f64..2.0, (0u8..12).prop_map(|k| k as f64 / 4.0)];
    prop::collection::vec((score, any::<bool>()), 2..=50)
        .prop_filter("both classes", |v| {
            v.iter().any(|p| p.1) && v.iter().any(|p| !p.1)
        })
        .prop_map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(i, (s, pos))| {
                    let label = if pos {
                        Label::Intelligible
                    } else {
                        Label::NonIntelligible
                    };
                    PairScore::new("s", format!("L{i}"), s, label)
                })
                .collect()
        })
}

fn mode() -> impl Strategy<Value = RateMode> {
    prop_oneof![Just(RateMode::Paper), Just(RateMode::ClassConditional)]
}

fn preds(scores: &[PairScore], tau: f64) -> Vec<(Label, Label)> {
    classify(scores, tau)
        .unwrap()
        .into_iter()
        .map(|(s, p)| (p, s.label))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn calibration_matches_exhaustive_sweep(scores in labeled_scores(), m in mode()) {
        let r = calibrate_threshold(&scores, m).unwrap();
        let (tau, fa, fr) = eer_sweep(&scores, m);
        prop_assert_eq!(r.threshold, tau);
        prop_assert_eq!((r.far, r.frr), (fa, fr));
        prop_assert_eq!(r.eer, (fa + fr) / 2.0);
        prop_assert_eq!(r.far, far(&preds(&scores, r.threshold), m).unwrap());
        prop_assert_eq!(r.frr, frr(&preds(&scores, r.threshold), m).unwrap());
    }

    #[test]
    fn error_rates_monotone_in_threshold(scores in labeled_scores(), m in mode()) {
        let mut taus: Vec<f64> = scores.iter().map(|s| s.score).collect();
        taus.extend([-1.0, 3.0]);
        taus.sort_by(f64::total_cmp);
        let mut last = (0.0, 1.0);
        for tau in taus {
            let p = preds(&scores, tau);
            let (a, r) = (far(&p, m).unwrap(), frr(&p, m).unwrap());
            prop_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&r));
            if m == RateMode::Paper {
                prop_assert!(a + r <= 1.0 + 1e-15);
            }
            prop_assert!(a >= last.0 && r <= last.1);
            last = (a, r);
        }
    }

    #[test]
    fn split_is_a_partition(n in 1usize..400, f in 0.01f64..0.99, seed: u64, stratified: bool) {
        let labels: Vec<Label> = (0..n)
            .map(|i| if i % 7 == 0 { Label::NonIntelligible } else { Label::Intelligible })
            .collect();
        let mask = split_mask(&labels, f, seed, stratified).unwrap();
        prop_assert_eq!(mask.iter().filter(|&&m| m).count(), (f * n as f64).round() as usize);
        prop_assert_eq!(&mask, &split_mask(&labels, f, seed, stratified).unwrap());
        if stratified {
            let cal_neg = labels.iter().zip(&mask).filter(|(l, &m)| m && **l == Label::NonIntelligible).count() as f64;
            let neg = labels.iter().filter(|l| **l == Label::NonIntelligible).count() as f64;
            let want = neg * mask.iter().filter(|&&m| m).count() as f64 / n as f64;
            prop_assert!((cal_neg - want).abs() <= 1.0);
        }
    }

    #[test]
    fn degenerate_thresholds_give_class_fractions(scores in labeled_scores()) {
        let n = scores.len() as f64;
        let pos = scores.iter().filter(|s| s.label.is_intelligible()).count() as f64;
        prop_assert!((accuracy(&preds(&scores, -1.0)).unwrap() - 100.0 * (n - pos) / n).abs() < 1e-9);
        prop_assert!((accuracy(&preds(&scores, 10.0)).unwrap() - 100.0 * pos / n).abs() < 1e-9);
    }
}

#[test]
fn split_counts() {
    let scores: Vec<PairScore> = (0..100)
        .map(|i| {
            PairScore::new(
                "s",
                format!("{i}"),
                0.1,
                if i < 80 {
                    Label::Intelligible
                } else {
                    Label::NonIntelligible
                },
            )
        })
        .collect();
    let (cal, test) = split(&scores, 0.05, 3, false).unwrap();
    assert_eq!((cal.len(), test.len()), (5, 95));
    let (cal, _) = split(&scores, 0.05, 3, true).unwrap();
    let pos = cal.iter().filter(|s| s.label.is_intelligible()).count();
    assert_eq!((pos, cal.len() - pos), (4, 1));
    assert!(split(&scores, 0.0, 3, false).is_err());
    assert!(split(&scores, 1.0, 3, false).is_err());
    assert!(split(&[], 0.5, 3, false).is_err());
}

#[test]
fn random_baseline_mean_tracks_expectation() {
    let test: Vec<PairScore> = (0..1000)
        .map(|i| {
            PairScore::new(
                "s",
                format!("{i}"),
                0.0,
                if i % 10 < 7 {
                    Label::Intelligible
                } else {
                    Label::NonIntelligible
                },
            )
        })
        .collect();
    let p = 0.8;
    let mean = (0..1000u64)
        .map(|seed| baseline_rs(&test, p, seed).unwrap())
        .sum::<f64>()
        / 1000.0;
    let expected = rs_expected_accuracy(p, 0.7);
    assert!((mean - expected).abs() < 1.0, "{mean} vs {expected}");
}

#[test]
fn confusion_monotone_in_threshold() {
    use intel_align::classifier::Confusion;
    let scores: Vec<PairScore> = (0..60)
        .map(|i| {
            let label = if (i * 13) % 5 == 0 {
                Label::NonIntelligible
            } else {
                Label::Intelligible
            };
            PairScore::new("s", format!("{i}"), ((i * 29) % 31) as f64 / 10.0, label)
        })
        .collect();
    let mut last: Option<Confusion> = None;
    for k in 0..40 {
        let c = Confusion::from_predictions(&preds(&scores, k as f64 / 10.0));
        assert_eq!(c.total(), scores.len());
        if let Some(prev) = last {
            assert!(c.tp >= prev.tp && c.tn <= prev.tn);
        }
        last = Some(c);
    }
}
