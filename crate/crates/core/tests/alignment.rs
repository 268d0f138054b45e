mod common;

use common::{brute_force_dtw, rel_close};
use intel_align::distance::{mae, mse};
use intel_align::dtw::dtw_learner_first;
use intel_align::{dtw, dtw_cost, score_pair, DistanceKind, FeatureSequence, Normalization};
use proptest::prelude::*;

fn seq(max_frames: usize, dim: usize) -> impl Strategy<Value = FeatureSequence> {
    (1..=max_frames).prop_flat_map(move |frames| {
        prop::collection::vec(-3.0f32..3.0, frames * dim)
            .prop_map(move |data| FeatureSequence::new(frames, dim, data).unwrap())
    })
}

fn pair(max_frames: usize) -> impl Strategy<Value = (FeatureSequence, FeatureSequence)> {
    (1usize..=4).prop_flat_map(move |dim| (seq(max_frames, dim), seq(max_frames, dim)))
}

fn kind() -> impl Strategy<Value = DistanceKind> {
    prop::sample::select(DistanceKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn matches_path_enumeration((t, l) in pair(7), k in kind()) {
        let r = dtw(&t, &l, k).unwrap();
        let oracle = brute_force_dtw(&t, &l, k);
        prop_assert!(rel_close(r.accumulated_cost, oracle, 1e-12), "{} vs {}", r.accumulated_cost, oracle);
    }

    #[test]
    fn path_is_valid_and_sums_to_cost((t, l) in pair(20), k in kind()) {
        let r = dtw(&t, &l, k).unwrap();
        r.validate_path(Some((t.frames(), l.frames()))).unwrap();
        let mut prefix = 0.0;
        for &(x, y) in &r.path {
            let next = prefix + k.eval(t.frame(x - 1), l.frame(y - 1)).unwrap();
            prop_assert!(next >= prefix);
            prefix = next;
        }
        prop_assert!(rel_close(prefix, r.accumulated_cost, 1e-9));
        prop_assert!(rel_close(r.normalized_distance * r.path.len() as f64, r.accumulated_cost, 1e-9));
    }

    #[test]
    fn symmetric_under_swap((t, l) in pair(20), k in kind()) {
        let forward = dtw(&t, &l, k).unwrap();
        let mirrored = dtw_learner_first(&l, &t, k).unwrap();
        prop_assert_eq!(forward.accumulated_cost, mirrored.accumulated_cost);
        let transposed: Vec<_> = mirrored.path.iter().map(|&(a, b)| (b, a)).collect();
        prop_assert_eq!(&transposed, &forward.path);
        prop_assert!(rel_close(dtw(&l, &t, k).unwrap().accumulated_cost, forward.accumulated_cost, 1e-12));
    }

    #[test]
    fn rolling_cost_equals_full((t, l) in pair(30), k in kind()) {
        let full = dtw(&t, &l, k).unwrap();
        let (cost, len) = dtw_cost(&t, &l, k).unwrap();
        prop_assert_eq!(cost, full.accumulated_cost);
        prop_assert_eq!(len, full.path.len());
        prop_assert_eq!(score_pair(&t, &l, k, Normalization::Path).unwrap(), full.normalized_distance);
    }

    #[test]
    fn raw_never_below_normalized((t, l) in pair(15), k in kind()) {
        let raw = score_pair(&t, &l, k, Normalization::Raw).unwrap();
        let norm = score_pair(&t, &l, k, Normalization::Path).unwrap();
        prop_assert!(raw >= norm);
    }

    #[test]
    fn self_alignment_is_free(t in seq(25, 3), k in kind()) {
        let r = dtw(&t, &t, k).unwrap();
        prop_assert_eq!(r.accumulated_cost, 0.0);
        prop_assert_eq!(r.path, (1..=t.frames()).map(|i| (i, i)).collect::<Vec<_>>());
    }
}

#[test]
fn worked_examples() {
    let t = FeatureSequence::from_rows(&[[0.0], [2.0], [4.0]]).unwrap();
    let l = FeatureSequence::from_rows(&[[0.0], [2.0], [2.0], [4.0]]).unwrap();
    let r = dtw(&t, &l, DistanceKind::Mae).unwrap();
    assert_eq!(r.accumulated_cost, 0.0);
    assert_eq!(r.path, vec![(1, 1), (2, 2), (2, 3), (3, 4)]);
    assert_eq!(brute_force_dtw(&t, &l, DistanceKind::Mae), 0.0);

    let t = FeatureSequence::from_rows(&[[0.0], [1.0]]).unwrap();
    let l = FeatureSequence::from_rows(&[[5.0], [6.0]]).unwrap();
    assert_eq!(brute_force_dtw(&t, &l, DistanceKind::Mae), 10.0);
    let r = dtw(&t, &l, DistanceKind::Mae).unwrap();
    assert_eq!((r.accumulated_cost, r.normalized_distance), (10.0, 5.0));
}

#[test]
fn dimension_mismatch_rejected() {
    let a = FeatureSequence::new(2, 3, vec![0.0; 6]).unwrap();
    let b = FeatureSequence::new(2, 2, vec![0.0; 4]).unwrap();
    assert!(matches!(
        dtw(&a, &b, DistanceKind::Cd),
        Err(intel_align::Error::DimensionMismatch { .. })
    ));
    assert!(dtw_cost(&a, &b, DistanceKind::Cd).is_err());
}

#[test]
fn wide_vectors_match_naive_loops() {
    use rand::Rng;
    let mut rng = intel_align::rng::seeded(768);
    for _ in 0..20 {
        let a: Vec<f64> = (0..768).map(|_| rng.random_range(-5.0..5.0)).collect();
        let b: Vec<f64> = (0..768).map(|_| rng.random_range(-5.0..5.0)).collect();
        let mut abs = 0.0;
        let mut sq = 0.0;
        for i in 0..768 {
            abs += (a[i] - b[i]).abs();
            sq += (a[i] - b[i]) * (a[i] - b[i]);
        }
        assert!(rel_close(mae(&a, &b).unwrap(), abs / 768.0, 1e-12));
        assert!(rel_close(mse(&a, &b).unwrap(), sq / 768.0, 1e-12));
    }
}
