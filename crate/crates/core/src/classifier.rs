//! Threshold classification, accuracy reporting and the MCV / RS baselines.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::calibration::{extended_f64, PairScore, Prediction};
use crate::distance::DistanceKind;
use crate::error::{Error, Result};
use crate::feature_io::{Label, PHONEME_CATEGORIES};
use crate::rng;

pub const MCV: &str = "mcv";
pub const RS: &str = "rs";
pub const RS_EXPECTED: &str = "rs_expected";

/// `score < τ` ⇒ intelligible.
#[inline]
pub fn predict(score: f64, threshold: f64) -> Label {
    if score < threshold {
        Label::Intelligible
    } else {
        Label::NonIntelligible
    }
}

/// Applies τ to every score, preserving order.
pub fn classify(scores: &[PairScore], threshold: f64) -> Result<Vec<(PairScore, Label)>> {
    if threshold.is_nan() {
        return Err(Error::InvalidArgument("threshold is NaN".into()));
    }
    Ok(scores
        .iter()
        .map(|s| (s.clone(), predict(s.score, threshold)))
        .collect())
}

/// Percentage of predictions equal to the actual label.
pub fn accuracy(predictions: &[Prediction]) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::EmptyInput);
    }
    let correct = predictions.iter().filter(|(p, a)| p == a).count();
    Ok(100.0 * correct as f64 / predictions.len() as f64)
}

fn as_predictions(classified: &[(PairScore, Label)]) -> Vec<Prediction> {
    classified.iter().map(|(s, p)| (*p, s.label)).collect()
}

/// Accuracy over each category's members. A pair counts toward every
/// category it carries; empty categories are omitted.
pub fn per_category_accuracy(classified: &[(PairScore, Label)]) -> BTreeMap<String, f64> {
    let mut tally: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for (s, p) in classified {
        for c in &s.phoneme_categories {
            let e = tally.entry(c.as_str()).or_default();
            e.0 += usize::from(*p == s.label);
            e.1 += 1;
        }
    }
    tally
        .into_iter()
        .map(|(c, (ok, n))| (c.to_string(), 100.0 * ok as f64 / n as f64))
        .collect()
}

/// Accuracy of predicting `majority` for every item.
pub fn baseline_mcv(test: &[PairScore], majority: Label) -> Result<f64> {
    let preds: Vec<Prediction> = test.iter().map(|s| (majority, s.label)).collect();
    accuracy(&preds)
}

/// One Bernoulli(`p_intelligible`) draw per item, in order.
pub fn random_predictions(n: usize, p_intelligible: f64, seed: u64) -> Result<Vec<Label>> {
    if !(0.0..=1.0).contains(&p_intelligible) {
        return Err(Error::InvalidArgument(format!(
            "p_intelligible must be in [0, 1], got {p_intelligible}"
        )));
    }
    let mut rng = rng::seeded(seed);
    Ok((0..n)
        .map(|_| {
            if rng.random::<f64>() < p_intelligible {
                Label::Intelligible
            } else {
                Label::NonIntelligible
            }
        })
        .collect())
}

/// Realized accuracy of random selection with `P(intelligible) = p`.
pub fn baseline_rs(test: &[PairScore], p_intelligible: f64, seed: u64) -> Result<f64> {
    let draws = random_predictions(test.len(), p_intelligible, seed)?;
    let preds: Vec<Prediction> = draws.into_iter().zip(test.iter().map(|s| s.label)).collect();
    accuracy(&preds)
}

/// Expected RS accuracy (percent) when the test set's intelligible fraction is `q`.
pub fn rs_expected_accuracy(p: f64, q: f64) -> f64 {
    100.0 * (p * q + (1.0 - p) * (1.0 - q))
}

/// Majority label of a set; ties go to intelligible.
pub fn majority_label(scores: &[PairScore]) -> Label {
    let pos = scores.iter().filter(|s| s.label.is_intelligible()).count();
    if 2 * pos >= scores.len() {
        Label::Intelligible
    } else {
        Label::NonIntelligible
    }
}

pub fn intelligible_fraction(scores: &[PairScore]) -> f64 {
    if scores.is_empty() {
        return 0.0;
    }
    scores.iter().filter(|s| s.label.is_intelligible()).count() as f64 / scores.len() as f64
}

/// Confusion counts with intelligible as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn from_predictions(preds: &[Prediction]) -> Self {
        let mut c = Confusion::default();
        for &(p, a) in preds {
            match (p, a) {
                (Label::Intelligible, Label::Intelligible) => c.tp += 1,
                (Label::NonIntelligible, Label::NonIntelligible) => c.tn += 1,
                (Label::Intelligible, Label::NonIntelligible) => c.fp += 1,
                (Label::NonIntelligible, Label::Intelligible) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }
}

/// Test-set results for one distance measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub distance: DistanceKind,
    #[serde(with = "extended_f64")]
    pub threshold: f64,
    pub n_test: usize,
    pub overall_accuracy: f64,
    pub confusion: Confusion,
    pub per_category_accuracy: BTreeMap<String, f64>,
    /// `mcv`, `rs` (one seeded realization) and `rs_expected`.
    pub baselines: BTreeMap<String, f64>,
    /// Per-category `mcv` and `rs` accuracy on the same realization.
    pub per_category_baselines: BTreeMap<String, BTreeMap<String, f64>>,
    pub majority: Label,
    pub p_intelligible: f64,
    pub rs_seed: u64,
}

/// Classifies `test` with `threshold` and evaluates both baselines. The MCV
/// majority and the RS probability come from the calibration subset.
pub fn build_report(
    distance: DistanceKind,
    threshold: f64,
    calibration: &[PairScore],
    test: &[PairScore],
    rs_seed: u64,
) -> Result<ClassificationReport> {
    if test.is_empty() {
        return Err(Error::EmptyInput);
    }
    let classified = classify(test, threshold)?;
    let preds = as_predictions(&classified);
    let majority = majority_label(calibration);
    let p = if calibration.is_empty() {
        intelligible_fraction(test)
    } else {
        intelligible_fraction(calibration)
    };
    let draws = random_predictions(test.len(), p, rs_seed)?;

    let mut baselines = BTreeMap::new();
    baselines.insert(MCV.to_string(), baseline_mcv(test, majority)?);
    let rs_preds: Vec<Prediction> = draws.iter().copied().zip(test.iter().map(|s| s.label)).collect();
    baselines.insert(RS.to_string(), accuracy(&rs_preds)?);
    baselines.insert(
        RS_EXPECTED.to_string(),
        rs_expected_accuracy(p, intelligible_fraction(test)),
    );

    let mcv_classified: Vec<(PairScore, Label)> = test.iter().map(|s| (s.clone(), majority)).collect();
    let rs_classified: Vec<(PairScore, Label)> = test.iter().cloned().zip(draws).collect();
    let mut per_category_baselines: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for (name, table) in [
        (MCV, per_category_accuracy(&mcv_classified)),
        (RS, per_category_accuracy(&rs_classified)),
    ] {
        for (cat, acc) in table {
            per_category_baselines
                .entry(cat)
                .or_default()
                .insert(name.to_string(), acc);
        }
    }

    Ok(ClassificationReport {
        distance,
        threshold,
        n_test: test.len(),
        overall_accuracy: accuracy(&preds)?,
        confusion: Confusion::from_predictions(&preds),
        per_category_accuracy: per_category_accuracy(&classified),
        baselines,
        per_category_baselines,
        majority,
        p_intelligible: p,
        rs_seed,
    })
}

fn cell(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into())
}

/// Plain-text overall and per-category tables, one column per distance
/// followed by MCV and RS.
pub fn render_tables(reports: &[ClassificationReport]) -> String {
    let mut sorted: Vec<&ClassificationReport> = reports.iter().collect();
    sorted.sort_by_key(|r| DistanceKind::ALL.iter().position(|k| *k == r.distance));
    let base = sorted.first();
    let mut heads: Vec<String> = sorted
        .iter()
        .map(|r| r.distance.as_str().to_uppercase())
        .collect();
    heads.push("MCV".into());
    heads.push("RS".into());

    let mut out = String::new();
    let _ = writeln!(out, "Overall classification accuracy (%)");
    let line = |out: &mut String, first: &str, cells: &[String]| {
        let _ = write!(out, "{first:<20}");
        for c in cells {
            let _ = write!(out, " {c:>8}");
        }
        out.push('\n');
    };
    line(&mut out, "", &heads);
    let mut row: Vec<String> = sorted.iter().map(|r| cell(Some(r.overall_accuracy))).collect();
    row.push(cell(base.and_then(|b| b.baselines.get(MCV).copied())));
    row.push(cell(base.and_then(|b| b.baselines.get(RS).copied())));
    line(&mut out, "all", &row);
    if let Some(b) = base {
        let _ = writeln!(
            out,
            "RS expected accuracy {:.2} (p = {:.4}, seed {}); n_test = {}",
            b.baselines.get(RS_EXPECTED).copied().unwrap_or(f64::NAN),
            b.p_intelligible,
            b.rs_seed,
            b.n_test
        );
    }

    let _ = writeln!(out, "\nPer phoneme category accuracy (%)");
    let mut cat_heads = vec!["category".to_string()];
    cat_heads.extend(heads.iter().cloned());
    let _ = write!(out, "{:<20}", cat_heads[0]);
    for h in &cat_heads[1..] {
        let _ = write!(out, " {h:>8}");
    }
    out.push('\n');
    for cat in PHONEME_CATEGORIES {
        if sorted.iter().all(|r| !r.per_category_accuracy.contains_key(cat)) {
            continue;
        }
        let mut row: Vec<String> = sorted
            .iter()
            .map(|r| cell(r.per_category_accuracy.get(cat).copied()))
            .collect();
        let bl = base.and_then(|b| b.per_category_baselines.get(cat));
        row.push(cell(bl.and_then(|m| m.get(MCV).copied())));
        row.push(cell(bl.and_then(|m| m.get(RS).copied())));
        line(&mut out, cat, &row);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Intelligible as I, NonIntelligible as N};

    fn ps(score: f64, label: Label, cats: &[&str]) -> PairScore {
        PairScore::new("s", "l", score, label).with_categories(cats.iter().copied())
    }

    #[test]
    fn rule_boundary() {
        let r = classify(&[ps(0.2, I, &[]), ps(0.5, I, &[])], 0.5).unwrap();
        assert_eq!(r[0].1, I);
        assert_eq!(r[1].1, N);
        assert!(classify(&[], f64::NAN).is_err());
    }

    #[test]
    fn accuracy_counts() {
        assert_eq!(accuracy(&[(I, I), (N, N)]).unwrap(), 100.0);
        assert_eq!(accuracy(&[(I, N), (N, I)]).unwrap(), 0.0);
        let mut p = vec![(I, I); 89];
        p.extend(vec![(I, N); 11]);
        assert_eq!(accuracy(&p).unwrap(), 89.0);
        assert!(accuracy(&[]).is_err());
    }

    #[test]
    fn categories_overlap() {
        // Hand-counted: Vowels has 3 members with 2 correct, Stops 2 members with 1 correct.
        let classified = vec![
            (ps(0.1, I, &["Vowels", "Stops"]), I),
            (ps(0.9, N, &["Vowels"]), N),
            (ps(0.2, I, &["Vowels"]), N),
            (ps(0.8, N, &["Stops"]), I),
        ];
        let m = per_category_accuracy(&classified);
        assert_eq!(m.len(), 2);
        assert!((m["Vowels"] - 200.0 / 3.0).abs() < 1e-12);
        assert_eq!(m["Stops"], 50.0);
    }

    #[test]
    fn mcv_values() {
        let mut t: Vec<PairScore> = (0..60).map(|_| ps(0.0, I, &[])).collect();
        t.extend((0..40).map(|_| ps(0.0, N, &[])));
        assert_eq!(baseline_mcv(&t, I).unwrap(), 60.0);
        assert_eq!(baseline_mcv(&t[..60], I).unwrap(), 100.0);
        assert!(baseline_mcv(&[], I).is_err());
    }

    #[test]
    fn rs_values() {
        let all_pos: Vec<PairScore> = (0..50).map(|_| ps(0.0, I, &[])).collect();
        assert_eq!(baseline_rs(&all_pos, 1.0, 9).unwrap(), 100.0);
        assert!(baseline_rs(&all_pos, 1.5, 9).is_err());
        assert_eq!(
            baseline_rs(&all_pos, 0.3, 4).unwrap(),
            baseline_rs(&all_pos, 0.3, 4).unwrap()
        );
        assert!((rs_expected_accuracy(0.8808, 0.8808) - 79.001728).abs() < 1e-9);
        assert_eq!(rs_expected_accuracy(0.5, 0.9), 50.0);
    }

    #[test]
    fn report_invariants_and_table() {
        let test: Vec<PairScore> = (0..20)
            .map(|i| {
                let label = if i % 5 == 0 { N } else { I };
                let score = if label == I { 0.1 } else { 0.9 } + i as f64 * 1e-3;
                ps(score, label, &[PHONEME_CATEGORIES[i % 3]])
            })
            .collect();
        let r = build_report(DistanceKind::Cd, 0.5, &test[..5], &test, 3).unwrap();
        assert_eq!(r.overall_accuracy, 100.0);
        assert_eq!(r.confusion.total(), r.n_test);
        let c = r.confusion;
        assert!((r.overall_accuracy - 100.0 * (c.tp + c.tn) as f64 / r.n_test as f64).abs() < 1e-9);
        let text = render_tables(&[r]);
        assert!(text.contains("CD") && text.contains("MCV") && text.contains("RS"));
        assert!(text.contains("Fricatives"));
    }
}
