//! Dynamic time warping between a teacher and a learner feature sequence.
//!
//! The accumulated cost obeys
//!
//! ```text
//! C(x, y) = c(t_x, l_y) + min[ C(x−1, y), C(x, y−1), C(x−1, y−1) ]
//! C(1, 1) = c(t_1, l_1)
//! ```
//!
//! with no band or slope constraint. Ties in the minimum are broken in the
//! order diagonal, teacher step `(x−1, y)`, learner step `(x, y−1)`. Path
//! indices are 1-based.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distance::DistanceKind;
use crate::error::{Error, Result};
use crate::feature_io::FeatureSequence;

/// How an alignment is reduced to one utterance-level score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// Accumulated cost divided by the number of cells on the optimal path.
    #[default]
    #[serde(alias = "path_length")]
    Path,
    /// Accumulated cost `C(X, Y)`.
    Raw,
}

impl Normalization {
    pub fn as_str(self) -> &'static str {
        match self {
            Normalization::Path => "path",
            Normalization::Raw => "raw",
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "path" | "path_length" => Ok(Normalization::Path),
            "raw" => Ok(Normalization::Raw),
            other => Err(Error::InvalidArgument(format!(
                "unknown normalization {other:?} (expected path or raw)"
            ))),
        }
    }
}

/// Output of [`dtw`].
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentResult {
    pub accumulated_cost: f64,
    /// 1-based `(teacher frame, learner frame)` cells from `(1, 1)` to `(X, Y)`.
    pub path: Vec<(usize, usize)>,
    pub normalized_distance: f64,
    pub cost_kind: DistanceKind,
}

impl AlignmentResult {
    pub fn score(&self, normalization: Normalization) -> f64 {
        match normalization {
            Normalization::Path => self.normalized_distance,
            Normalization::Raw => self.accumulated_cost,
        }
    }

    /// Checks the path shape: starts at (1,1), ends at `(frames_t, frames_l)`
    /// when given, and moves by one of (1,0), (0,1), (1,1) each step.
    pub fn validate_path(&self, end: Option<(usize, usize)>) -> Result<()> {
        let bad = |m: String| Err(Error::format("alignment path", m));
        let (first, last) = match (self.path.first(), self.path.last()) {
            (Some(f), Some(l)) => (*f, *l),
            _ => return bad("empty path".into()),
        };
        if first != (1, 1) {
            return bad(format!("path starts at {first:?}"));
        }
        if let Some(end) = end {
            if last != end {
                return bad(format!("path ends at {last:?}, expected {end:?}"));
            }
        }
        for w in self.path.windows(2) {
            let step = (w[1].0.wrapping_sub(w[0].0), w[1].1.wrapping_sub(w[0].1));
            if !matches!(step, (1, 0) | (0, 1) | (1, 1)) {
                return bad(format!("illegal step {:?} -> {:?}", w[0], w[1]));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
#[repr(u8)]
enum Step {
    Start,
    Diag,
    Row,
    Col,
}

/// Picks the predecessor among the three candidates. `Row` is `(x−1, y)` in
/// the sweep's own orientation.
#[inline]
fn choose(diag: f64, row: f64, col: f64, prefer_row: bool) -> (Step, f64) {
    if diag <= row && diag <= col {
        (Step::Diag, diag)
    } else if prefer_row {
        if row <= col {
            (Step::Row, row)
        } else {
            (Step::Col, col)
        }
    } else if col <= row {
        (Step::Col, col)
    } else {
        (Step::Row, row)
    }
}

fn check_dims(a: &FeatureSequence, b: &FeatureSequence) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(())
}

/// Rolling-row sweep returning `(C(X, Y), optimal path length)` with storage
/// linear in `cols.frames()`.
fn sweep_rolling(
    rows: &FeatureSequence,
    cols: &FeatureSequence,
    kind: DistanceKind,
    prefer_row: bool,
) -> (f64, usize) {
    let m = cols.frames();
    let mut prev_cost = vec![0.0f64; m];
    let mut prev_len = vec![0usize; m];
    let mut cur_cost = vec![0.0f64; m];
    let mut cur_len = vec![0usize; m];

    let t0 = rows.frame(0);
    prev_cost[0] = kind.eval_unchecked(t0, cols.frame(0));
    prev_len[0] = 1;
    for y in 1..m {
        prev_cost[y] = kind.eval_unchecked(t0, cols.frame(y)) + prev_cost[y - 1];
        prev_len[y] = prev_len[y - 1] + 1;
    }
    for x in 1..rows.frames() {
        let tx = rows.frame(x);
        cur_cost[0] = kind.eval_unchecked(tx, cols.frame(0)) + prev_cost[0];
        cur_len[0] = prev_len[0] + 1;
        for y in 1..m {
            let (step, best) = choose(prev_cost[y - 1], prev_cost[y], cur_cost[y - 1], prefer_row);
            cur_cost[y] = kind.eval_unchecked(tx, cols.frame(y)) + best;
            cur_len[y] = 1 + match step {
                Step::Diag => prev_len[y - 1],
                Step::Row => prev_len[y],
                _ => cur_len[y - 1],
            };
        }
        std::mem::swap(&mut prev_cost, &mut cur_cost);
        std::mem::swap(&mut prev_len, &mut cur_len);
    }
    (prev_cost[m - 1], prev_len[m - 1])
}

/// Full sweep with `X·Y` backpointers; `rows` is the teacher axis of the
/// returned path.
fn sweep_with_path(
    rows: &FeatureSequence,
    cols: &FeatureSequence,
    kind: DistanceKind,
    prefer_row: bool,
) -> (f64, Vec<(usize, usize)>) {
    let (n, m) = (rows.frames(), cols.frames());
    let mut back = vec![Step::Start; n * m];
    let mut prev = vec![0.0f64; m];
    let mut cur = vec![0.0f64; m];

    let t0 = rows.frame(0);
    prev[0] = kind.eval_unchecked(t0, cols.frame(0));
    for y in 1..m {
        prev[y] = kind.eval_unchecked(t0, cols.frame(y)) + prev[y - 1];
        back[y] = Step::Col;
    }
    for x in 1..n {
        let tx = rows.frame(x);
        cur[0] = kind.eval_unchecked(tx, cols.frame(0)) + prev[0];
        back[x * m] = Step::Row;
        for y in 1..m {
            let (step, best) = choose(prev[y - 1], prev[y], cur[y - 1], prefer_row);
            cur[y] = kind.eval_unchecked(tx, cols.frame(y)) + best;
            back[x * m + y] = step;
        }
        std::mem::swap(&mut prev, &mut cur);
    }

    let mut path = Vec::with_capacity(n + m);
    let (mut x, mut y) = (n - 1, m - 1);
    loop {
        path.push((x + 1, y + 1));
        match back[x * m + y] {
            Step::Start => break,
            Step::Diag => {
                x -= 1;
                y -= 1;
            }
            Step::Row => x -= 1,
            Step::Col => y -= 1,
        }
    }
    path.reverse();
    (prev[m - 1], path)
}

/// Optimal alignment of `learner` onto `teacher` under the local cost `kind`.
pub fn dtw(
    teacher: &FeatureSequence,
    learner: &FeatureSequence,
    kind: DistanceKind,
) -> Result<AlignmentResult> {
    check_dims(teacher, learner)?;
    let (cost, path) = sweep_with_path(teacher, learner, kind, true);
    Ok(AlignmentResult {
        accumulated_cost: cost,
        normalized_distance: cost / path.len() as f64,
        path,
        cost_kind: kind,
    })
}

/// Same as [`dtw`] but breaking non-diagonal ties toward the learner step.
/// `dtw_learner_first(L, T)` is the transpose of `dtw(T, L)`.
pub fn dtw_learner_first(
    teacher: &FeatureSequence,
    learner: &FeatureSequence,
    kind: DistanceKind,
) -> Result<AlignmentResult> {
    check_dims(teacher, learner)?;
    let (cost, path) = sweep_with_path(teacher, learner, kind, false);
    Ok(AlignmentResult {
        accumulated_cost: cost,
        normalized_distance: cost / path.len() as f64,
        path,
        cost_kind: kind,
    })
}

/// Accumulated cost and optimal path length without materializing the path.
///
/// Uses `O(min(X, Y))` storage. The path length matches `dtw(..).path.len()`
/// because the sweep applies the same tie-break in either orientation.
pub fn dtw_cost(
    teacher: &FeatureSequence,
    learner: &FeatureSequence,
    kind: DistanceKind,
) -> Result<(f64, usize)> {
    check_dims(teacher, learner)?;
    if learner.frames() <= teacher.frames() {
        Ok(sweep_rolling(teacher, learner, kind, true))
    } else {
        Ok(sweep_rolling(learner, teacher, kind, false))
    }
}

/// Utterance-level alignment distance between a teacher and a learner.
pub fn score_pair(
    teacher: &FeatureSequence,
    learner: &FeatureSequence,
    kind: DistanceKind,
    normalization: Normalization,
) -> Result<f64> {
    let (cost, len) = dtw_cost(teacher, learner, kind)?;
    Ok(match normalization {
        Normalization::Path => cost / len as f64,
        Normalization::Raw => cost,
    })
}

/// Serialized form of an alignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathTrace {
    pub index_base: u8,
    pub pairs: Vec<[usize; 2]>,
    pub accumulated_cost: f64,
    pub normalized_distance: f64,
    pub cost_kind: DistanceKind,
}

impl From<&AlignmentResult> for PathTrace {
    fn from(r: &AlignmentResult) -> Self {
        Self {
            index_base: 1,
            pairs: r.path.iter().map(|&(x, y)| [x, y]).collect(),
            accumulated_cost: r.accumulated_cost,
            normalized_distance: r.normalized_distance,
            cost_kind: r.cost_kind,
        }
    }
}

impl TryFrom<PathTrace> for AlignmentResult {
    type Error = Error;

    fn try_from(t: PathTrace) -> Result<Self> {
        if t.index_base != 1 {
            return Err(Error::format(
                "path trace",
                format!("index_base must be 1, got {}", t.index_base),
            ));
        }
        let r = AlignmentResult {
            accumulated_cost: t.accumulated_cost,
            path: t.pairs.iter().map(|p| (p[0], p[1])).collect(),
            normalized_distance: t.normalized_distance,
            cost_kind: t.cost_kind,
        };
        r.validate_path(None)?;
        Ok(r)
    }
}
