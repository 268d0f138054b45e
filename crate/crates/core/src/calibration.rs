//! Calibration split and EER threshold selection.
//!
//! Decision rule everywhere: `score < τ` ⇒ intelligible (accepted). A score
//! equal to τ is rejected.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::distance::DistanceKind;
use crate::dtw::Normalization;
use crate::error::{Error, Result};
use crate::feature_io::Label;
use crate::rng;

/// One scored learner utterance.
#[derive(Debug, Clone, PartialEq)]
pub struct PairScore {
    pub stimulus_id: String,
    pub learner_id: String,
    pub score: f64,
    pub label: Label,
    pub phoneme_categories: BTreeSet<String>,
    pub phone_count: Option<usize>,
}

impl PairScore {
    pub fn new(
        stimulus_id: impl Into<String>,
        learner_id: impl Into<String>,
        score: f64,
        label: Label,
    ) -> Self {
        Self {
            stimulus_id: stimulus_id.into(),
            learner_id: learner_id.into(),
            score,
            label,
            phoneme_categories: BTreeSet::new(),
            phone_count: None,
        }
    }

    pub fn with_categories<I, S>(mut self, categories: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.phoneme_categories = categories.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_phone_count(mut self, count: usize) -> Self {
        self.phone_count = Some(count);
        self
    }

    fn validate(&self) -> Result<()> {
        if !self.score.is_finite() || self.score < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "score for ({}, {}) must be finite and non-negative, got {}",
                self.stimulus_id, self.learner_id, self.score
            )));
        }
        Ok(())
    }
}

/// Denominator convention for FAR and FRR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMode {
    /// Both error counts divided by the total number of attempts.
    Paper,
    /// FAR over actual non-intelligible items, FRR over actual intelligible.
    #[default]
    ClassConditional,
}

impl RateMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RateMode::Paper => "paper",
            RateMode::ClassConditional => "class_conditional",
        }
    }
}

impl fmt::Display for RateMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RateMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(RateMode::Paper),
            "class" | "class_conditional" => Ok(RateMode::ClassConditional),
            other => Err(Error::InvalidArgument(format!(
                "unknown rate mode {other:?} (expected paper or class)"
            ))),
        }
    }
}

/// Serde helper for thresholds, which may be ±∞.
pub(crate) mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else if *v < 0.0 {
            s.serialize_str("-inf")
        } else {
            s.serialize_str("nan")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(serde::de::Error::custom(format!("bad threshold {other:?}"))),
            },
        }
    }
}

/// Threshold chosen on the calibration subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    #[serde(with = "extended_f64")]
    pub threshold: f64,
    pub far: f64,
    pub frr: f64,
    pub eer: f64,
    pub rate_mode: RateMode,
    pub calibration_size: usize,
    pub seed: u64,
}

/// `(predicted, actual)`.
pub type Prediction = (Label, Label);

fn rate(count: usize, denom: usize) -> f64 {
    count as f64 / denom as f64
}

/// False acceptance rate: non-intelligible items predicted intelligible.
pub fn far(predictions: &[Prediction], mode: RateMode) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::EmptyInput);
    }
    let fa = predictions
        .iter()
        .filter(|(p, a)| *p == Label::Intelligible && *a == Label::NonIntelligible)
        .count();
    let denom = match mode {
        RateMode::Paper => predictions.len(),
        RateMode::ClassConditional => {
            let n = predictions
                .iter()
                .filter(|(_, a)| *a == Label::NonIntelligible)
                .count();
            if n == 0 {
                return Err(Error::InvalidArgument(
                    "class-conditional FAR needs at least one non-intelligible item".into(),
                ));
            }
            n
        }
    };
    Ok(rate(fa, denom))
}

/// False rejection rate: intelligible items predicted non-intelligible.
pub fn frr(predictions: &[Prediction], mode: RateMode) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::EmptyInput);
    }
    let fr = predictions
        .iter()
        .filter(|(p, a)| *p == Label::NonIntelligible && *a == Label::Intelligible)
        .count();
    let denom = match mode {
        RateMode::Paper => predictions.len(),
        RateMode::ClassConditional => {
            let n = predictions
                .iter()
                .filter(|(_, a)| *a == Label::Intelligible)
                .count();
            if n == 0 {
                return Err(Error::InvalidArgument(
                    "class-conditional FRR needs at least one intelligible item".into(),
                ));
            }
            n
        }
    };
    Ok(rate(fr, denom))
}

/// Picks τ among −∞, +∞ and the midpoints between consecutive distinct
/// scores, minimizing |FAR − FRR|, then FAR + FRR, then τ.
pub fn calibrate_threshold(calibration: &[PairScore], mode: RateMode) -> Result<CalibrationResult> {
    for s in calibration {
        s.validate()?;
    }
    let n_pos = calibration.iter().filter(|s| s.label.is_intelligible()).count();
    let n_neg = calibration.len() - n_pos;
    if n_pos == 0 {
        return Err(Error::SingleClass("non_intelligible only"));
    }
    if n_neg == 0 {
        return Err(Error::SingleClass("intelligible only"));
    }
    let (far_denom, frr_denom) = match mode {
        RateMode::Paper => (calibration.len(), calibration.len()),
        RateMode::ClassConditional => (n_neg, n_pos),
    };

    let mut sorted: Vec<(f64, Label)> = calibration.iter().map(|s| (s.score, s.label)).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Sweep τ upward: at each candidate, everything strictly below it is accepted.
    let mut fa = 0usize;
    let mut fr = n_pos;
    // Rates share the denominator far_denom·frr_denom, so candidates are
    // compared on exact integer numerators.
    let key = |fa: usize, fr: usize| {
        let (a, r) = ((fa * frr_denom) as u128, (fr * far_denom) as u128);
        (a.abs_diff(r), a + r)
    };
    let mut best: Option<(f64, usize, usize)> = None;
    let mut consider = |tau: f64, fa: usize, fr: usize| {
        if best.is_none_or(|(_, bfa, bfr)| key(fa, fr) < key(bfa, bfr)) {
            best = Some((tau, fa, fr));
        }
    };

    consider(f64::NEG_INFINITY, fa, fr);
    let mut i = 0;
    while i < sorted.len() {
        let value = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == value {
            match sorted[i].1 {
                Label::Intelligible => fr -= 1,
                Label::NonIntelligible => fa += 1,
            }
            i += 1;
        }
        let tau = if i < sorted.len() {
            (value + sorted[i].0) / 2.0
        } else {
            f64::INFINITY
        };
        consider(tau, fa, fr);
    }

    let (threshold, fa, fr) = best.expect("at least two candidates");
    let (far, frr) = (rate(fa, far_denom), rate(fr, frr_denom));
    Ok(CalibrationResult {
        threshold,
        far,
        frr,
        eer: (far + frr) / 2.0,
        rate_mode: mode,
        calibration_size: calibration.len(),
        seed: 0,
    })
}

/// Calibration membership mask: `true` marks a calibration item.
///
/// The calibration subset has exactly `round(fraction · n)` items. With
/// `stratified`, per-class counts follow largest-remainder apportionment.
pub fn split_mask(
    labels: &[Label],
    calibration_fraction: f64,
    seed: u64,
    stratified: bool,
) -> Result<Vec<bool>> {
    if labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(calibration_fraction > 0.0 && calibration_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "calibration fraction must be in (0, 1), got {calibration_fraction}"
        )));
    }
    let total = (calibration_fraction * labels.len() as f64).round() as usize;
    let mut rng = rng::seeded(seed);
    let mut mask = vec![false; labels.len()];

    if !stratified {
        let mut idx: Vec<usize> = (0..labels.len()).collect();
        idx.shuffle(&mut rng);
        for &i in &idx[..total] {
            mask[i] = true;
        }
        return Ok(mask);
    }

    let classes = [Label::Intelligible, Label::NonIntelligible];
    let members: Vec<Vec<usize>> = classes
        .iter()
        .map(|c| (0..labels.len()).filter(|&i| labels[i] == *c).collect())
        .collect();
    let quotas: Vec<f64> = members
        .iter()
        .map(|m| calibration_fraction * m.len() as f64)
        .collect();
    let mut alloc: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut order: Vec<usize> = (0..classes.len()).collect();
    order.sort_by(|&a, &b| {
        let (fa, fb) = (quotas[a] - quotas[a].floor(), quotas[b] - quotas[b].floor());
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let mut remaining = total.saturating_sub(alloc.iter().sum());
    for &c in &order {
        if remaining == 0 {
            break;
        }
        if alloc[c] < members[c].len() {
            alloc[c] += 1;
            remaining -= 1;
        }
    }
    for (c, group) in members.iter().enumerate() {
        let mut group = group.clone();
        group.shuffle(&mut rng);
        for &i in &group[..alloc[c]] {
            mask[i] = true;
        }
    }
    Ok(mask)
}

/// Partitions scores into `(calibration, test)`, each in input order.
pub fn split(
    scores: &[PairScore],
    calibration_fraction: f64,
    seed: u64,
    stratified: bool,
) -> Result<(Vec<PairScore>, Vec<PairScore>)> {
    let labels: Vec<Label> = scores.iter().map(|s| s.label).collect();
    let mask = split_mask(&labels, calibration_fraction, seed, stratified)?;
    let (mut cal, mut test) = (Vec::new(), Vec::new());
    for (s, m) in scores.iter().zip(mask) {
        if m {
            cal.push(s.clone());
        } else {
            test.push(s.clone());
        }
    }
    Ok((cal, test))
}

/// Metadata line preceding the CSV header of a scores file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoresHeader {
    pub corpus_hash: String,
    pub distance: DistanceKind,
    pub normalization: Normalization,
}

const SCORES_PREAMBLE: &str = "# intel-align scores v1";
const SCORES_COLUMNS: [&str; 6] = [
    "stimulus_id",
    "learner_id",
    "score",
    "label",
    "phoneme_categories",
    "phone_count",
];

/// Renders a scores file: one comment line with the header, a CSV header,
/// then one row per pair. Floats use shortest round-trip formatting.
pub fn render_scores(header: &ScoresHeader, scores: &[PairScore]) -> String {
    let mut out = format!(
        "{SCORES_PREAMBLE} corpus_hash={} distance={} normalization={}\n",
        header.corpus_hash, header.distance, header.normalization
    );
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SCORES_COLUMNS).expect("in-memory write");
    for s in scores {
        let cats = s.phoneme_categories.iter().cloned().collect::<Vec<_>>().join(";");
        let label = u8::from(s.label).to_string();
        let phones = s.phone_count.map(|c| c.to_string()).unwrap_or_default();
        w.write_record([
            s.stimulus_id.as_str(),
            s.learner_id.as_str(),
            &s.score.to_string(),
            &label,
            &cats,
            &phones,
        ])
        .expect("in-memory write");
    }
    out.push_str(std::str::from_utf8(&w.into_inner().expect("flush")).expect("utf8"));
    out
}

pub fn write_scores(path: impl AsRef<Path>, header: &ScoresHeader, scores: &[PairScore]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render_scores(header, scores)).map_err(|e| Error::io(path, e))
}

pub fn parse_scores(text: &str) -> Result<(ScoresHeader, Vec<PairScore>)> {
    let bad = |m: String| Error::format("scores file", m);
    let first = text.lines().next().unwrap_or_default();
    let meta = first
        .strip_prefix(SCORES_PREAMBLE)
        .ok_or_else(|| bad(format!("missing {SCORES_PREAMBLE:?} preamble")))?;
    let mut corpus_hash = None;
    let mut distance = None;
    let mut normalization = None;
    for kv in meta.split_whitespace() {
        match kv.split_once('=') {
            Some(("corpus_hash", v)) => corpus_hash = Some(v.to_string()),
            Some(("distance", v)) => distance = Some(v.parse()?),
            Some(("normalization", v)) => normalization = Some(v.parse()?),
            _ => return Err(bad(format!("unexpected header field {kv:?}"))),
        }
    }
    let header = ScoresHeader {
        corpus_hash: corpus_hash.ok_or_else(|| bad("missing corpus_hash".into()))?,
        distance: distance.ok_or_else(|| bad("missing distance".into()))?,
        normalization: normalization.ok_or_else(|| bad("missing normalization".into()))?,
    };

    let body = &text[first.len()..];
    let mut reader = csv::Reader::from_reader(body.trim_start_matches(['\r', '\n']).as_bytes());
    let cols = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if cols.iter().ne(SCORES_COLUMNS) {
        return Err(bad(format!(
            "unexpected columns {:?}",
            cols.iter().collect::<Vec<_>>()
        )));
    }
    let mut scores = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        let at = |m: String| bad(format!("row {}: {m}", i + 1));
        let score: f64 = row[2].parse().map_err(|e| at(format!("score: {e}")))?;
        let label_num: u8 = row[3].parse().map_err(|e| at(format!("label: {e}")))?;
        let label = Label::try_from(label_num).map_err(at)?;
        let phone_count = if row[5].is_empty() {
            None
        } else {
            Some(row[5].parse().map_err(|e| at(format!("phone_count: {e}")))?)
        };
        let s = PairScore {
            stimulus_id: row[0].to_string(),
            learner_id: row[1].to_string(),
            score,
            label,
            phoneme_categories: row[4]
                .split(';')
                .filter(|c| !c.is_empty())
                .map(String::from)
                .collect(),
            phone_count,
        };
        s.validate()?;
        scores.push(s);
    }
    Ok((header, scores))
}

pub fn read_scores(path: impl AsRef<Path>) -> Result<(ScoresHeader, Vec<PairScore>)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scores(&text)
}
