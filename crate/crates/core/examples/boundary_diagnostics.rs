//! Phone-boundary intersections against the DTW path, plus score histograms.

use intel_align::analysis::{
    boundary_intersections, on_path_fraction, phone_length_scatter, score_distributions,
};
use intel_align::pipeline::score_manifest;
use intel_align::synth::{apply_warp, generate, warp_boundaries};
use intel_align::{dtw, DistanceKind, Normalization, SynthSpec};

fn main() -> intel_align::Result<()> {
    let dir = std::env::temp_dir().join("intel_align_boundary_diagnostics");
    let spec = SynthSpec {
        n_stimuli: 20,
        learners_per_stimulus: 4,
        dim: 16,
        ..SynthSpec::default()
    };
    let (manifest, corpus) = generate(&spec, &dir)?;

    let s = &corpus.stimuli[0];
    // stretch the second phone by repeating each of its frames
    let ends: Vec<usize> = s.boundaries.iter().map(|b| b.end_frame).collect();
    let map: Vec<usize> = (0..s.teacher.frames())
        .flat_map(|f| {
            let in_second = f >= ends[0] && f < ends[1];
            std::iter::repeat_n(f, if in_second { 2 } else { 1 })
        })
        .collect();
    let stretched = apply_warp(&s.teacher, &map);
    let r = dtw(&s.teacher, &stretched, DistanceKind::Cd)?;
    let hits = boundary_intersections(&r, &s.boundaries, &warp_boundaries(&s.boundaries, &map))?;
    println!(
        "{}: stretched phone, {:.0}% of boundaries on path",
        s.stimulus_id,
        100.0 * on_path_fraction(&hits)
    );

    for l in corpus
        .learners
        .iter()
        .filter(|l| l.spoken_stimulus != l.stimulus_id)
        .take(3)
    {
        let t = corpus
            .stimuli
            .iter()
            .find(|s| s.stimulus_id == l.stimulus_id)
            .unwrap();
        let r = dtw(&t.teacher, &l.sequence, DistanceKind::Cd)?;
        let hits = boundary_intersections(&r, &t.boundaries, &l.boundaries)?;
        println!(
            "{} {} (spoke {}): {:.0}% on path, mean miss {:.1} frames",
            l.stimulus_id,
            l.learner_id,
            l.spoken_stimulus,
            100.0 * on_path_fraction(&hits),
            hits.iter().map(|h| h.min_path_distance).sum::<f64>() / hits.len() as f64
        );
    }

    let scores: Vec<_> = score_manifest(&manifest, &[DistanceKind::Cd], Normalization::Path, 4)?
        .into_iter()
        .map(|r| r.expect("scored").remove(0))
        .collect();
    let hist = score_distributions(&scores, 20)?;
    println!(
        "\nhistogram overlap coefficient: {:.3}",
        hist.overlap_coefficient()
    );
    for (len, (i, n)) in phone_length_scatter(&scores).class_means_by_length() {
        println!("{len:>2} phones: intelligible {i:.3?}  non-intelligible {n:.3?}");
    }
    Ok(())
}
