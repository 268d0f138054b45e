//! Plot-ready diagnostics: per-class score histograms, score against phone
//! count, and phone-boundary intersections against a DTW path.
//!
//! Every table renders as CSV with a one-line header.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::calibration::PairScore;
use crate::dtw::AlignmentResult;
use crate::error::{Error, Result};
use crate::feature_io::{validate_boundaries, Label, PhoneBoundary};

pub const DEFAULT_BINS: usize = 50;

/// Two class histograms over one shared bin grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreHistogram {
    /// `bins + 1` edges; bin `k` is `[edges[k], edges[k+1])`, the last bin closed.
    pub edges: Vec<f64>,
    pub intelligible: Vec<usize>,
    pub non_intelligible: Vec<usize>,
}

impl ScoreHistogram {
    /// Σ_k min(p_k, q_k) over the two normalized histograms; 0 for disjoint
    /// classes, 1 for identical ones. A class with no members contributes 0.
    pub fn overlap_coefficient(&self) -> f64 {
        let (ni, nn) = (
            self.intelligible.iter().sum::<usize>(),
            self.non_intelligible.iter().sum::<usize>(),
        );
        if ni == 0 || nn == 0 {
            return 0.0;
        }
        self.intelligible
            .iter()
            .zip(&self.non_intelligible)
            .map(|(&a, &b)| (a as f64 / ni as f64).min(b as f64 / nn as f64))
            .sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_low,bin_high,intelligible,non_intelligible\n");
        for k in 0..self.intelligible.len() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                self.edges[k],
                self.edges[k + 1],
                self.intelligible[k],
                self.non_intelligible[k]
            );
        }
        out
    }
}

/// Histograms of both classes over `[min score, max score]` split into `bins`.
pub fn score_distributions(scores: &[PairScore], bins: usize) -> Result<ScoreHistogram> {
    if scores.is_empty() {
        return Err(Error::EmptyInput);
    }
    if bins < 2 {
        return Err(Error::InvalidArgument(format!("bins must be >= 2, got {bins}")));
    }
    let lo = scores.iter().map(|s| s.score).fold(f64::INFINITY, f64::min);
    let hi = scores.iter().map(|s| s.score).fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let edges: Vec<f64> = (0..=bins)
        .map(|k| {
            if k == bins && hi > lo {
                hi
            } else {
                lo + k as f64 * width
            }
        })
        .collect();
    let mut hist = ScoreHistogram {
        edges,
        intelligible: vec![0; bins],
        non_intelligible: vec![0; bins],
    };
    for s in scores {
        let k = (((s.score - lo) / width) as usize).min(bins - 1);
        match s.label {
            Label::Intelligible => hist.intelligible[k] += 1,
            Label::NonIntelligible => hist.non_intelligible[k] += 1,
        }
    }
    Ok(hist)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterRow {
    pub phone_count: usize,
    pub score: f64,
    pub label: Label,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PhoneLengthScatter {
    pub rows: Vec<ScatterRow>,
    /// Pairs without a phone count.
    pub skipped: usize,
}

impl PhoneLengthScatter {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("phone_count,score,label\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{}", r.phone_count, r.score, u8::from(r.label));
        }
        out
    }

    /// Per phone count: `(mean intelligible score, mean non-intelligible score)`.
    pub fn class_means_by_length(&self) -> BTreeMap<usize, (Option<f64>, Option<f64>)> {
        let mut acc: BTreeMap<usize, [(f64, usize); 2]> = BTreeMap::new();
        for r in &self.rows {
            let e = acc.entry(r.phone_count).or_default();
            let slot = &mut e[usize::from(!r.label.is_intelligible())];
            slot.0 += r.score;
            slot.1 += 1;
        }
        let mean = |(sum, n): (f64, usize)| (n > 0).then(|| sum / n as f64);
        acc.into_iter()
            .map(|(k, [i, n])| (k, (mean(i), mean(n))))
            .collect()
    }
}

pub fn phone_length_scatter(scores: &[PairScore]) -> PhoneLengthScatter {
    let mut out = PhoneLengthScatter::default();
    for s in scores {
        match s.phone_count {
            Some(phone_count) => out.rows.push(ScatterRow {
                phone_count,
                score: s.score,
                label: s.label,
            }),
            None => out.skipped += 1,
        }
    }
    out
}

/// Where the k-th teacher and learner phone ends meet in the alignment grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryIntersection {
    pub teacher_boundary_frame: usize,
    pub learner_boundary_frame: usize,
    pub phone_label: String,
    pub on_path: bool,
    /// Chebyshev distance, in frames, to the nearest path cell.
    pub min_path_distance: f64,
}

/// Checks each `(teacher end_k, learner end_k)` cell against the path.
///
/// Boundary end frames are exclusive counts, which coincide with the 1-based
/// index of the phone's last frame, the same indexing as the path.
pub fn boundary_intersections(
    alignment: &AlignmentResult,
    teacher_boundaries: &[PhoneBoundary],
    learner_boundaries: &[PhoneBoundary],
) -> Result<Vec<BoundaryIntersection>> {
    if teacher_boundaries.len() != learner_boundaries.len() {
        return Err(Error::InvalidArgument(format!(
            "teacher has {} phone boundaries, learner has {}",
            teacher_boundaries.len(),
            learner_boundaries.len()
        )));
    }
    for b in [teacher_boundaries, learner_boundaries] {
        if !b.is_empty() {
            validate_boundaries(b).map_err(Error::InvalidArgument)?;
        }
    }
    let cells: HashSet<(usize, usize)> = alignment.path.iter().copied().collect();
    Ok(teacher_boundaries
        .iter()
        .zip(learner_boundaries)
        .map(|(t, l)| {
            let point = (t.end_frame, l.end_frame);
            let on_path = cells.contains(&point);
            let min_path_distance = if on_path {
                0.0
            } else {
                alignment
                    .path
                    .iter()
                    .map(|&(x, y)| x.abs_diff(point.0).max(y.abs_diff(point.1)))
                    .min()
                    .unwrap_or(usize::MAX) as f64
            };
            BoundaryIntersection {
                teacher_boundary_frame: t.end_frame,
                learner_boundary_frame: l.end_frame,
                phone_label: t.label.clone(),
                on_path,
                min_path_distance,
            }
        })
        .collect())
}

/// Fraction of intersections lying on the path (1.0 for an empty list).
pub fn on_path_fraction(intersections: &[BoundaryIntersection]) -> f64 {
    if intersections.is_empty() {
        return 1.0;
    }
    intersections.iter().filter(|i| i.on_path).count() as f64 / intersections.len() as f64
}

pub fn intersections_csv(intersections: &[BoundaryIntersection]) -> String {
    let mut out =
        String::from("phone_label,teacher_boundary_frame,learner_boundary_frame,on_path,min_path_distance\n");
    for i in intersections {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            i.phone_label, i.teacher_boundary_frame, i.learner_boundary_frame, i.on_path, i.min_path_distance
        );
    }
    out
}
