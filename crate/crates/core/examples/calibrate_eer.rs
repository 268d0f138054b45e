//! Picking τ at the equal error rate and classifying held-out scores.

use intel_align::calibration::split;
use intel_align::classifier::{accuracy, baseline_mcv, rs_expected_accuracy};
use intel_align::{calibrate_threshold, classify, Label, PairScore, RateMode};

fn main() -> intel_align::Result<()> {
    let overlapping = [
        PairScore::new("s1", "a", 0.1, Label::Intelligible),
        PairScore::new("s1", "b", 0.6, Label::Intelligible),
        PairScore::new("s2", "a", 0.4, Label::NonIntelligible),
        PairScore::new("s2", "b", 0.9, Label::NonIntelligible),
    ];
    for mode in [RateMode::ClassConditional, RateMode::Paper] {
        let c = calibrate_threshold(&overlapping, mode)?;
        println!(
            "{mode:>17}: tau={} FAR={} FRR={} EER={}",
            c.threshold, c.far, c.frr, c.eer
        );
    }

    // intelligible near 0.2, non-intelligible near 0.7, every tenth pair pulled to the middle
    let scores: Vec<PairScore> = (0..200)
        .map(|i| {
            let label = if i % 8 == 0 {
                Label::NonIntelligible
            } else {
                Label::Intelligible
            };
            let base = if label.is_intelligible() { 0.2 } else { 0.7 };
            let jitter = ((i * 37) % 17) as f64 / 100.0 - 0.08;
            let score = if i % 10 == 3 {
                0.45 + jitter / 2.0
            } else {
                base + jitter
            };
            PairScore::new(format!("s{}", i / 4), format!("L{}", i % 4), score, label)
        })
        .collect();
    let (cal, test) = split(&scores, 0.2, 5, true)?;
    let c = calibrate_threshold(&cal, RateMode::ClassConditional)?;
    let preds: Vec<(Label, Label)> = classify(&test, c.threshold)?
        .into_iter()
        .map(|(s, p)| (p, s.label))
        .collect();
    println!(
        "\n{} calibration / {} test; tau = {:.4}; accuracy {:.2}%; MCV {:.2}%; RS expected {:.2}%",
        cal.len(),
        test.len(),
        c.threshold,
        accuracy(&preds)?,
        baseline_mcv(&test, Label::Intelligible)?,
        rs_expected_accuracy(0.875, 0.875)
    );
    Ok(())
}
