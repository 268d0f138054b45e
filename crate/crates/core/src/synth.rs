//! Labeled synthetic teacher/learner corpora.
//!
//! Each teacher utterance is a smooth piecewise-linear trajectory: one random
//! anchor per phone boundary, frames interpolated between consecutive
//! anchors, so every phone is one linear segment. Intelligible learners
//! replay their own teacher under a random monotone time warp plus Gaussian
//! noise. Non-intelligible learners either replay a different stimulus
//! (preferring one with the same phone count) or their own stimulus under
//! heavy noise.
//!
//! Every teacher, learner and the label assignment draw from separate
//! seeded sub-streams, so output depends only on the spec.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng as _;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feature_io::{
    write_feature_file, write_manifest, FeatureSequence, Label, Manifest, PhoneBoundary, Role,
    UtteranceRecord, PHONEME_CATEGORIES,
};
use crate::rng::{self, Rng};

const PHONE_INVENTORY: [&str; 39] = [
    "aa", "ae", "ah", "ao", "aw", "ay", "b", "ch", "d", "dh", "eh", "er", "ey", "f", "g", "hh", "ih", "iy",
    "jh", "k", "l", "m", "n", "ng", "ow", "oy", "p", "r", "s", "sh", "t", "th", "uh", "uw", "v", "w", "y",
    "z", "zh",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfusionMode {
    /// Non-intelligible learners speak a different stimulus.
    #[default]
    CrossStimulus,
    /// Non-intelligible learners speak the right stimulus under heavy noise.
    HeavyNoise,
}

/// Generator parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub corpus_name: String,
    pub n_stimuli: usize,
    pub learners_per_stimulus: usize,
    pub dim: usize,
    /// Inclusive teacher frame-count range.
    pub frames_range: (usize, usize),
    /// Inclusive phone-count range; capped at `frames / 2` per utterance.
    pub phones_range: (usize, usize),
    pub intelligible_fraction: f64,
    /// Per-frame probability of a tempo change (frame repeated or dropped).
    pub warp_strength: f64,
    /// Gaussian noise added to every learner frame.
    pub noise_sigma: f64,
    /// Noise used for non-intelligible learners in heavy-noise mode.
    pub heavy_noise_sigma: f64,
    pub confusion_mode: ConfusionMode,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            corpus_name: "synthetic".into(),
            n_stimuli: 100,
            learners_per_stimulus: 8,
            dim: 64,
            frames_range: (30, 90),
            phones_range: (3, 10),
            intelligible_fraction: 0.88,
            warp_strength: 0.2,
            noise_sigma: 0.3,
            heavy_noise_sigma: 3.0,
            confusion_mode: ConfusionMode::CrossStimulus,
            seed: 7,
        }
    }
}

impl SynthSpec {
    /// Checks every field and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if self.n_stimuli < 1 {
            bad.push("n_stimuli must be >= 1".to_string());
        }
        if self.learners_per_stimulus < 1 {
            bad.push("learners_per_stimulus must be >= 1".into());
        }
        if self.dim < 1 {
            bad.push("dim must be >= 1".into());
        }
        let (fmin, fmax) = self.frames_range;
        if fmin < 2 || fmax < fmin {
            bad.push(format!(
                "frames_range must satisfy 2 <= min <= max, got ({fmin}, {fmax})"
            ));
        }
        let (pmin, pmax) = self.phones_range;
        if pmin < 1 || pmax < pmin {
            bad.push(format!(
                "phones_range must satisfy 1 <= min <= max, got ({pmin}, {pmax})"
            ));
        }
        if !(0.0..=1.0).contains(&self.intelligible_fraction) {
            bad.push(format!(
                "intelligible_fraction must be in [0, 1], got {}",
                self.intelligible_fraction
            ));
        }
        for (name, v) in [
            ("warp_strength", self.warp_strength),
            ("noise_sigma", self.noise_sigma),
            ("heavy_noise_sigma", self.heavy_noise_sigma),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                bad.push(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(bad.join("; ")))
        }
    }
}

/// One generated stimulus with its teacher rendition.
#[derive(Debug, Clone)]
pub struct SynthStimulus {
    pub stimulus_id: String,
    pub teacher: FeatureSequence,
    pub boundaries: Vec<PhoneBoundary>,
    pub categories: BTreeSet<String>,
}

#[derive(Debug, Clone)]
pub struct SynthLearner {
    pub stimulus_id: String,
    pub learner_id: String,
    pub label: Label,
    pub sequence: FeatureSequence,
    pub boundaries: Vec<PhoneBoundary>,
    /// Stimulus whose teacher the learner actually replays.
    pub spoken_stimulus: String,
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub spec: SynthSpec,
    pub stimuli: Vec<SynthStimulus>,
    pub learners: Vec<SynthLearner>,
}

/// Builds a smooth trajectory with `phone_lengths.len()` linear segments
/// between random anchors.
pub fn piecewise_linear_trajectory(phone_lengths: &[usize], dim: usize, rng: &mut Rng) -> FeatureSequence {
    let anchors: Vec<Vec<f32>> = (0..=phone_lengths.len())
        .map(|_| (0..dim).map(|_| StandardNormal.sample(rng)).collect())
        .collect();
    let frames: usize = phone_lengths.iter().sum();
    let mut data = Vec::with_capacity(frames * dim);
    for (k, &n) in phone_lengths.iter().enumerate() {
        let (from, to) = (&anchors[k], &anchors[k + 1]);
        for j in 0..n {
            let w = (j + 1) as f32 / n as f32;
            data.extend(from.iter().zip(to).map(|(a, b)| a + w * (b - a)));
        }
    }
    FeatureSequence::new(frames, dim, data).expect("finite trajectory")
}

/// Random monotone warp of a teacher with the given phone end frames.
///
/// Returns, for every learner frame, the 0-based teacher frame it copies.
/// Each teacher frame is repeated with probability `strength / 2` and, when
/// `allow_skip`, dropped with probability `strength / 2`. Phone-final frames
/// and frames right after a dropped one are never dropped, so every phone
/// keeps at least one frame.
pub fn monotone_warp(phone_ends: &[usize], strength: f64, allow_skip: bool, rng: &mut Rng) -> Vec<usize> {
    let p = strength.min(1.0);
    let frames = phone_ends.last().copied().unwrap_or(0);
    let finals: BTreeSet<usize> = phone_ends.iter().map(|e| e - 1).collect();
    let mut map = Vec::with_capacity(frames + frames / 2);
    let mut skipped_prev = false;
    for i in 0..frames {
        let u: f64 = rng.random();
        if u < p / 2.0 {
            map.extend([i, i]);
            skipped_prev = false;
        } else if u < p && allow_skip && !finals.contains(&i) && !skipped_prev {
            skipped_prev = true;
        } else {
            map.push(i);
            skipped_prev = false;
        }
    }
    map
}

/// Learner frames copied from the teacher through `map`.
pub fn apply_warp(teacher: &FeatureSequence, map: &[usize]) -> FeatureSequence {
    let mut data = Vec::with_capacity(map.len() * teacher.dim());
    for &i in map {
        data.extend_from_slice(teacher.frame(i));
    }
    FeatureSequence::new(map.len(), teacher.dim(), data).expect("warp of a valid sequence")
}

/// Phone boundaries of the warped sequence.
pub fn warp_boundaries(boundaries: &[PhoneBoundary], map: &[usize]) -> Vec<PhoneBoundary> {
    boundaries
        .iter()
        .map(|b| PhoneBoundary::new(b.label.clone(), map.iter().filter(|&&i| i < b.end_frame).count()))
        .collect()
}

fn add_noise(seq: FeatureSequence, sigma: f64, rng: &mut Rng) -> FeatureSequence {
    if sigma == 0.0 {
        return seq;
    }
    let normal = Normal::new(0.0f64, sigma).expect("valid sigma");
    let data = seq
        .data()
        .iter()
        .map(|&v| (v as f64 + normal.sample(rng)) as f32)
        .collect();
    FeatureSequence::new(seq.frames(), seq.dim(), data).expect("finite noise")
}

fn make_stimulus(spec: &SynthSpec, index: usize) -> SynthStimulus {
    let mut rng = rng::substream(spec.seed, index as u64);
    let frames = rng.random_range(spec.frames_range.0..=spec.frames_range.1);
    let max_phones = frames / 2;
    let phones = rng
        .random_range(spec.phones_range.0..=spec.phones_range.1)
        .min(max_phones);
    // frames >= 2, so phones <= frames / 2 and every phone gets >= 2 frames.
    let mut lengths = vec![2usize; phones];
    for _ in 0..frames - 2 * phones {
        lengths[rng.random_range(0..phones)] += 1;
    }
    let teacher = piecewise_linear_trajectory(&lengths, spec.dim, &mut rng);
    let mut end = 0;
    let boundaries = lengths
        .iter()
        .map(|&n| {
            end += n;
            PhoneBoundary::new(*PHONE_INVENTORY.choose(&mut rng).unwrap(), end)
        })
        .collect();
    let n_cats = rng.random_range(1..=2);
    let categories = PHONEME_CATEGORIES
        .choose_multiple(&mut rng, n_cats)
        .map(|c| c.to_string())
        .collect();
    let stimulus_id = format!("S{:04}", index + 1);
    SynthStimulus {
        teacher: teacher.with_source_id(format!("{stimulus_id}_teacher")),
        stimulus_id,
        boundaries,
        categories,
    }
}

/// Generates the corpus in memory.
pub fn generate_corpus(spec: &SynthSpec) -> Result<SynthCorpus> {
    spec.validate()?;
    let stimuli: Vec<SynthStimulus> = (0..spec.n_stimuli)
        .into_par_iter()
        .map(|i| make_stimulus(spec, i))
        .collect();

    let total = spec.n_stimuli * spec.learners_per_stimulus;
    let n_pos = (spec.intelligible_fraction * total as f64).round() as usize;
    let mut labels: Vec<Label> = (0..total)
        .map(|i| {
            if i < n_pos {
                Label::Intelligible
            } else {
                Label::NonIntelligible
            }
        })
        .collect();
    labels.shuffle(&mut rng::substream(spec.seed, u64::MAX));

    let stream_base = spec.n_stimuli as u64;
    let learners: Vec<SynthLearner> = (0..total)
        .into_par_iter()
        .map(|k| {
            let s = k / spec.learners_per_stimulus;
            let j = k % spec.learners_per_stimulus;
            let mut rng = rng::substream(spec.seed, stream_base + k as u64);
            let own = &stimuli[s];
            let label = labels[k];
            let (source, sigma) = match (label, spec.confusion_mode) {
                (Label::Intelligible, _) => (s, spec.noise_sigma),
                (Label::NonIntelligible, ConfusionMode::CrossStimulus) if stimuli.len() > 1 => {
                    let same: Vec<usize> = (0..stimuli.len())
                        .filter(|&o| o != s && stimuli[o].boundaries.len() == own.boundaries.len())
                        .collect();
                    let other = match same.choose(&mut rng) {
                        Some(&o) => o,
                        None => {
                            let o = rng.random_range(0..stimuli.len() - 1);
                            if o >= s {
                                o + 1
                            } else {
                                o
                            }
                        }
                    };
                    (other, spec.noise_sigma)
                }
                (Label::NonIntelligible, _) => (s, spec.heavy_noise_sigma),
            };
            let src = &stimuli[source];
            let ends: Vec<usize> = src.boundaries.iter().map(|b| b.end_frame).collect();
            let map = monotone_warp(&ends, spec.warp_strength, true, &mut rng);
            let sequence = add_noise(apply_warp(&src.teacher, &map), sigma, &mut rng);
            let learner_id = format!("L{:02}", j + 1);
            SynthLearner {
                sequence: sequence.with_source_id(format!("{}_{learner_id}", own.stimulus_id)),
                boundaries: warp_boundaries(&src.boundaries, &map),
                stimulus_id: own.stimulus_id.clone(),
                learner_id,
                label,
                spoken_stimulus: src.stimulus_id.clone(),
            }
        })
        .collect();

    Ok(SynthCorpus {
        spec: spec.clone(),
        stimuli,
        learners,
    })
}

impl SynthCorpus {
    /// Manifest records in output order: each teacher followed by its learners.
    pub fn records(&self) -> Vec<UtteranceRecord> {
        let lps = self.spec.learners_per_stimulus;
        let mut out = Vec::with_capacity(self.stimuli.len() * (lps + 1));
        for (s, stim) in self.stimuli.iter().enumerate() {
            out.push(UtteranceRecord {
                stimulus_id: stim.stimulus_id.clone(),
                role: Role::Teacher,
                learner_id: None,
                feature_path: feature_file(&stim.stimulus_id, "teacher"),
                label: None,
                phoneme_categories: stim.categories.clone(),
                phone_boundaries: Some(stim.boundaries.clone()),
            });
            for l in &self.learners[s * lps..(s + 1) * lps] {
                out.push(UtteranceRecord {
                    stimulus_id: l.stimulus_id.clone(),
                    role: Role::Learner,
                    learner_id: Some(l.learner_id.clone()),
                    feature_path: feature_file(&l.stimulus_id, &l.learner_id),
                    label: Some(l.label),
                    phoneme_categories: stim.categories.clone(),
                    phone_boundaries: Some(l.boundaries.clone()),
                });
            }
        }
        out
    }

    /// Writes `manifest.jsonl` and `features/*.fseq` under `out_dir`.
    pub fn write(&self, out_dir: impl AsRef<Path>) -> Result<PathBuf> {
        let out_dir = out_dir.as_ref();
        let features = out_dir.join("features");
        fs::create_dir_all(&features).map_err(|e| Error::io(&features, e))?;
        let lps = self.spec.learners_per_stimulus;
        let mut jobs: Vec<(PathBuf, &FeatureSequence)> = Vec::new();
        for (s, stim) in self.stimuli.iter().enumerate() {
            jobs.push((
                out_dir.join(feature_file(&stim.stimulus_id, "teacher")),
                &stim.teacher,
            ));
            for l in &self.learners[s * lps..(s + 1) * lps] {
                jobs.push((
                    out_dir.join(feature_file(&l.stimulus_id, &l.learner_id)),
                    &l.sequence,
                ));
            }
        }
        jobs.par_iter()
            .try_for_each(|(path, seq)| write_feature_file(seq, path))?;
        let manifest = out_dir.join("manifest.jsonl");
        write_manifest(&manifest, &self.records())?;
        Ok(manifest)
    }

    pub fn summary(&self) -> String {
        let pos = self.learners.iter().filter(|l| l.label.is_intelligible()).count();
        format!(
            "{}: {} stimuli, {} learner utterances ({} intelligible, {} non-intelligible, {:.2}% intelligible), dim {}",
            self.spec.corpus_name,
            self.stimuli.len(),
            self.learners.len(),
            pos,
            self.learners.len() - pos,
            100.0 * pos as f64 / self.learners.len().max(1) as f64,
            self.spec.dim
        )
    }
}

fn feature_file(stimulus_id: &str, who: &str) -> PathBuf {
    PathBuf::from("features").join(format!("{stimulus_id}_{who}.fseq"))
}

/// Generates a corpus on disk and reloads its manifest.
pub fn generate(spec: &SynthSpec, out_dir: impl AsRef<Path>) -> Result<(Manifest, SynthCorpus)> {
    let corpus = generate_corpus(spec)?;
    let path = corpus.write(out_dir)?;
    let manifest = crate::feature_io::load_manifest(path)?;
    Ok((manifest, corpus))
}
