//! Aligning one learner utterance to its teacher and inspecting the path.

use intel_align::dtw::{dtw_learner_first, Normalization};
use intel_align::{dtw, score_pair, DistanceKind, FeatureSequence, PathTrace};

fn main() -> intel_align::Result<()> {
    let teacher = FeatureSequence::from_rows(&[[0.0], [2.0], [4.0]])?;
    let learner = FeatureSequence::from_rows(&[[0.0], [2.0], [2.0], [4.0]])?;

    let r = dtw(&teacher, &learner, DistanceKind::Mae)?;
    println!("repeated frame: cost {} path {:?}", r.accumulated_cost, r.path);

    let t = FeatureSequence::from_rows(&[[0.0], [1.0]])?;
    let l = FeatureSequence::from_rows(&[[5.0], [6.0]])?;
    for norm in [Normalization::Raw, Normalization::Path] {
        println!(
            "[0,1] vs [5,6], {norm}: {}",
            score_pair(&t, &l, DistanceKind::Mae, norm)?
        );
    }

    // swapping the arguments transposes the path when the tie-break is mirrored
    let back = dtw_learner_first(&learner, &teacher, DistanceKind::Mae)?;
    let transposed: Vec<_> = back.path.iter().map(|&(y, x)| (x, y)).collect();
    assert_eq!(transposed, r.path);
    println!(
        "reverse alignment cost {} (same), path transposes",
        back.accumulated_cost
    );

    let trace = PathTrace::from(&r);
    println!("{}", serde_json::to_string(&trace).unwrap());
    Ok(())
}
