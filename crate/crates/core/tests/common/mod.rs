//! Reference implementations used as test oracles. Deliberately naive.
#![allow(dead_code)]

use std::path::Path;

use intel_align::{DistanceKind, FeatureSequence, Label, PairScore, RateMode};

/// Minimum path cost over every monotone path from (1,1) to (X,Y), found by
/// depth-first enumeration of all paths.
pub fn brute_force_dtw(t: &FeatureSequence, l: &FeatureSequence, kind: DistanceKind) -> f64 {
    let (nx, ny) = (t.frames(), l.frames());
    let cost: Vec<Vec<f64>> = (0..nx)
        .map(|x| {
            (0..ny)
                .map(|y| kind.eval(t.frame(x), l.frame(y)).unwrap())
                .collect()
        })
        .collect();
    fn walk(cost: &[Vec<f64>], x: usize, y: usize, acc: f64, best: &mut f64) {
        let acc = acc + cost[x][y];
        let (nx, ny) = (cost.len(), cost[0].len());
        if x + 1 == nx && y + 1 == ny {
            *best = best.min(acc);
            return;
        }
        if x + 1 < nx {
            walk(cost, x + 1, y, acc, best);
        }
        if y + 1 < ny {
            walk(cost, x, y + 1, acc, best);
        }
        if x + 1 < nx && y + 1 < ny {
            walk(cost, x + 1, y + 1, acc, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(&cost, 0, 0, 0.0, &mut best);
    best
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// Exhaustive EER sweep: for every candidate threshold, classify every item
/// from scratch and count errors. Returns `(τ, FAR, FRR)`.
pub fn eer_sweep(scores: &[PairScore], mode: RateMode) -> (f64, f64, f64) {
    let mut values: Vec<f64> = scores.iter().map(|s| s.score).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let mut candidates = vec![f64::NEG_INFINITY, f64::INFINITY];
    for w in values.windows(2) {
        candidates.push((w[0] + w[1]) / 2.0);
    }
    let n = scores.len() as u128;
    let pos = scores.iter().filter(|s| s.label == Label::Intelligible).count() as u128;
    let neg = n - pos;
    let (da, dr) = match mode {
        RateMode::Paper => (n, n),
        RateMode::ClassConditional => (neg, pos),
    };
    // (|FAR − FRR|, FAR + FRR, τ) as exact fractions over da·dr
    let mut best: Option<(u128, u128, f64, u128, u128)> = None;
    for &tau in &candidates {
        let fa = scores
            .iter()
            .filter(|s| s.label == Label::NonIntelligible && s.score < tau)
            .count() as u128;
        let fr = scores
            .iter()
            .filter(|s| s.label == Label::Intelligible && s.score >= tau)
            .count() as u128;
        let (a, r) = (fa * dr, fr * da);
        let gap = a.max(r) - a.min(r);
        let cand = (gap, a + r, tau, fa, fr);
        let better = match best {
            None => true,
            Some(b) => (cand.0, cand.1) < (b.0, b.1) || ((cand.0, cand.1) == (b.0, b.1) && tau < b.2),
        };
        if better {
            best = Some(cand);
        }
    }
    let (_, _, tau, fa, fr) = best.unwrap();
    (tau, fa as f64 / da as f64, fr as f64 / dr as f64)
}

/// Byte contents of every file under `dir`, keyed by relative path.
pub fn snapshot(dir: &Path) -> std::collections::BTreeMap<String, Vec<u8>> {
    let mut out = std::collections::BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

pub fn random_sequence<R: rand::Rng>(rng: &mut R, frames: usize, dim: usize) -> FeatureSequence {
    let data = (0..frames * dim)
        .map(|_| rng.random_range(-1.0f32..1.0))
        .collect();
    FeatureSequence::new(frames, dim, data).unwrap()
}
