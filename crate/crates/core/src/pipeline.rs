//! File-based pipeline stages: synth → score → calibrate → classify, plus
//! trace and distributions.
//!
//! Each stage reads the previous stage's files from `output_dir` and writes
//! its own. Every derived file records the SHA-256 of the manifest bytes so
//! artifacts from different corpora are never mixed.
//!
//! Files written under `output_dir`:
//!
//! - `scores_<kind>.csv`, `score_errors.csv` (score)
//! - `split.csv`, `calibration_<kind>.json` (calibrate)
//! - `report.json`, `report.txt` (classify)
//! - `trace_<stimulus>_<learner>_<kind>.json` and `.csv` (trace)
//! - `distribution_<kind>.csv`, `phone_length_<kind>.csv` (distributions)
//! - `effective_config.toml` (every stage)

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{self, BoundaryIntersection, DEFAULT_BINS};
use crate::calibration::{
    calibrate_threshold, read_scores, split_mask, write_scores, CalibrationResult, PairScore, RateMode,
    ScoresHeader,
};
use crate::classifier::{build_report, render_tables, ClassificationReport};
use crate::distance::DistanceKind;
use crate::dtw::{dtw, dtw_cost, Normalization, PathTrace};
use crate::error::{Error, Result};
use crate::feature_io::{load_manifest, FeatureSequence, Manifest, UtteranceRecord};
use crate::synth::{generate, SynthCorpus, SynthSpec};

/// Environment variable supplying the default worker count.
pub const WORKERS_ENV: &str = "INTEL_ALIGN_WORKERS";

/// Effective configuration of a run. Defaults follow the 5 % calibration
/// protocol with class-conditional rates and path-length normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub manifest: Option<PathBuf>,
    pub distances: Vec<DistanceKind>,
    pub normalization: Normalization,
    pub calibration_fraction: f64,
    pub stratified: bool,
    pub seed: u64,
    pub rate_mode: RateMode,
    pub output_dir: PathBuf,
    pub workers: usize,
    pub bins: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            manifest: None,
            distances: DistanceKind::ALL.to_vec(),
            normalization: Normalization::Path,
            calibration_fraction: 0.05,
            stratified: false,
            seed: 0,
            rate_mode: RateMode::ClassConditional,
            output_dir: PathBuf::from("out"),
            workers: 1,
            bins: DEFAULT_BINS,
        }
    }
}

impl RunConfig {
    pub fn from_toml_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::format("config file", e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.calibration_fraction > 0.0 && self.calibration_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "calibration fraction must be in (0, 1), got {}",
                self.calibration_fraction
            )));
        }
        if self.workers < 1 {
            return Err(Error::InvalidArgument("workers must be >= 1".into()));
        }
        if self.distances.is_empty() {
            return Err(Error::InvalidArgument("at least one distance is required".into()));
        }
        Ok(())
    }

    fn manifest_path(&self) -> Result<&Path> {
        self.manifest
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument("a manifest path is required".into()))
    }

    fn out(&self, name: impl AsRef<Path>) -> PathBuf {
        self.output_dir.join(name)
    }

    fn prepare_output(&self) -> Result<()> {
        self.validate()?;
        fs::create_dir_all(&self.output_dir).map_err(|e| Error::io(&self.output_dir, e))?;
        let text = toml::to_string(self).map_err(|e| Error::format("config", e.to_string()))?;
        write_text(self.out("effective_config.toml"), &text)
    }
}

fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_text(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Hex SHA-256 of the manifest file's bytes.
pub fn corpus_hash(manifest_path: impl AsRef<Path>) -> Result<String> {
    let path = manifest_path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn check_hash(expected: &str, found: &str) -> Result<()> {
    if expected != found {
        return Err(Error::CorpusMismatch {
            left: expected.to_string(),
            right: found.to_string(),
        });
    }
    Ok(())
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {workers} workers: {e}")))
}

/// A learner utterance that could not be scored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairFailure {
    pub stimulus_id: String,
    pub learner_id: String,
    pub message: String,
}

fn pair_template(manifest: &Manifest, learner: &UtteranceRecord) -> PairScore {
    let teacher = manifest.teacher(&learner.stimulus_id);
    let categories = if learner.phoneme_categories.is_empty() {
        teacher.map(|t| t.phoneme_categories.clone()).unwrap_or_default()
    } else {
        learner.phoneme_categories.clone()
    };
    let phone_count = teacher
        .and_then(|t| t.phone_boundaries.as_ref())
        .or(learner.phone_boundaries.as_ref())
        .map(Vec::len);
    PairScore {
        stimulus_id: learner.stimulus_id.clone(),
        learner_id: learner.learner_id.clone().unwrap_or_default(),
        score: 0.0,
        label: learner.label.expect("validated learner label"),
        phoneme_categories: categories,
        phone_count,
    }
}

/// Scores every learner against its own stimulus's teacher under each kind.
///
/// Results come back in manifest order whatever the worker count. Each entry
/// holds one score per requested kind, in the order given.
pub fn score_manifest(
    manifest: &Manifest,
    kinds: &[DistanceKind],
    normalization: Normalization,
    workers: usize,
) -> Result<Vec<std::result::Result<Vec<PairScore>, PairFailure>>> {
    let pool = thread_pool(workers)?;
    let learners: Vec<&UtteranceRecord> = manifest.learners().collect();
    let mut stimuli: Vec<&str> = learners.iter().map(|r| r.stimulus_id.as_str()).collect();
    stimuli.sort_unstable();
    stimuli.dedup();

    Ok(pool.install(|| {
        let teachers: HashMap<&str, std::result::Result<FeatureSequence, String>> = stimuli
            .par_iter()
            .map(|&s| {
                let t = manifest.teacher(s).expect("validated teacher");
                (s, manifest.read_features(t).map_err(|e| format!("teacher: {e}")))
            })
            .collect();
        learners
            .par_iter()
            .map(|&learner| {
                let template = pair_template(manifest, learner);
                let fail = |message: String| PairFailure {
                    stimulus_id: template.stimulus_id.clone(),
                    learner_id: template.learner_id.clone(),
                    message,
                };
                let teacher = teachers[learner.stimulus_id.as_str()]
                    .as_ref()
                    .map_err(|e| fail(e.clone()))?;
                let seq = manifest
                    .read_features(learner)
                    .map_err(|e| fail(format!("learner: {e}")))?;
                kinds
                    .iter()
                    .map(|&kind| {
                        let (cost, len) = dtw_cost(teacher, &seq, kind).map_err(|e| fail(e.to_string()))?;
                        let score = match normalization {
                            Normalization::Path => cost / len as f64,
                            Normalization::Raw => cost,
                        };
                        Ok(PairScore {
                            score,
                            ..template.clone()
                        })
                    })
                    .collect()
            })
            .collect()
    }))
}

pub fn scores_path(output_dir: &Path, kind: DistanceKind) -> PathBuf {
    output_dir.join(format!("scores_{kind}.csv"))
}

fn calibration_path(output_dir: &Path, kind: DistanceKind) -> PathBuf {
    output_dir.join(format!("calibration_{kind}.json"))
}

#[derive(Debug, Clone)]
pub struct ScoreOutcome {
    pub scored: usize,
    pub failures: Vec<PairFailure>,
    pub files: Vec<PathBuf>,
}

/// Scores the manifest and writes one scores file per distance plus the
/// `score_errors.csv` sidecar. Failed pairs are listed, not fatal.
pub fn cmd_score(config: &RunConfig) -> Result<ScoreOutcome> {
    config.prepare_output()?;
    let manifest_path = config.manifest_path()?;
    let hash = corpus_hash(manifest_path)?;
    let manifest = Manifest::parse(manifest_path)?;
    let results = score_manifest(&manifest, &config.distances, config.normalization, config.workers)?;

    let mut per_kind: Vec<Vec<PairScore>> = vec![Vec::new(); config.distances.len()];
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(scores) => {
                for (k, s) in scores.into_iter().enumerate() {
                    per_kind[k].push(s);
                }
            }
            Err(f) => failures.push(f),
        }
    }

    let mut files = Vec::new();
    for (kind, scores) in config.distances.iter().zip(&per_kind) {
        let header = ScoresHeader {
            corpus_hash: hash.clone(),
            distance: *kind,
            normalization: config.normalization,
        };
        let path = scores_path(&config.output_dir, *kind);
        write_scores(&path, &header, scores)?;
        files.push(path);
    }

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["stimulus_id", "learner_id", "error"])
        .expect("in-memory write");
    for f in &failures {
        w.write_record([&f.stimulus_id, &f.learner_id, &f.message])
            .expect("in-memory write");
    }
    let sidecar = String::from_utf8(w.into_inner().expect("flush")).expect("utf8");
    write_text(config.out("score_errors.csv"), &sidecar)?;

    Ok(ScoreOutcome {
        scored: per_kind.first().map_or(0, Vec::len),
        failures,
        files,
    })
}

/// Calibration output for one distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationFile {
    pub corpus_hash: String,
    pub distance: DistanceKind,
    pub normalization: Normalization,
    pub calibration_fraction: f64,
    pub stratified: bool,
    #[serde(flatten)]
    pub result: CalibrationResult,
}

type PairKey = (String, String);

fn key(s: &PairScore) -> PairKey {
    (s.stimulus_id.clone(), s.learner_id.clone())
}

const SPLIT_PREAMBLE: &str = "# intel-align split v1";

fn render_split(hash: &str, seed: u64, scores: &[PairScore], mask: &[bool]) -> String {
    let mut out = format!("{SPLIT_PREAMBLE} corpus_hash={hash} seed={seed}\n");
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["stimulus_id", "learner_id", "subset"])
        .expect("in-memory write");
    for (s, &m) in scores.iter().zip(mask) {
        w.write_record([
            s.stimulus_id.as_str(),
            s.learner_id.as_str(),
            if m { "calibration" } else { "test" },
        ])
        .expect("in-memory write");
    }
    out.push_str(std::str::from_utf8(&w.into_inner().expect("flush")).expect("utf8"));
    out
}

/// Reads `split.csv` into `(corpus hash, calibration membership by pair)`.
pub fn read_split(path: impl AsRef<Path>) -> Result<(String, BTreeMap<PairKey, bool>)> {
    let text = read_text(path)?;
    let bad = |m: String| Error::format("split file", m);
    let first = text.lines().next().unwrap_or_default();
    let meta = first
        .strip_prefix(SPLIT_PREAMBLE)
        .ok_or_else(|| bad("missing preamble".into()))?;
    let hash = meta
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix("corpus_hash="))
        .ok_or_else(|| bad("missing corpus_hash".into()))?
        .to_string();
    let mut reader = csv::Reader::from_reader(text[first.len()..].trim_start().as_bytes());
    let mut map = BTreeMap::new();
    for row in reader.records() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        let cal = match &row[2] {
            "calibration" => true,
            "test" => false,
            other => return Err(bad(format!("unknown subset {other:?}"))),
        };
        map.insert((row[0].to_string(), row[1].to_string()), cal);
    }
    Ok((hash, map))
}

fn partition(
    scores: &[PairScore],
    membership: &BTreeMap<PairKey, bool>,
) -> Result<(Vec<PairScore>, Vec<PairScore>)> {
    let (mut cal, mut test) = (Vec::new(), Vec::new());
    for s in scores {
        match membership.get(&key(s)) {
            Some(true) => cal.push(s.clone()),
            Some(false) => test.push(s.clone()),
            None => {
                return Err(Error::format(
                    "split file",
                    format!("pair ({}, {}) missing from split", s.stimulus_id, s.learner_id),
                ))
            }
        }
    }
    Ok((cal, test))
}

/// Draws one calibration split (shared by all distances) and picks τ for
/// each distance on it.
pub fn cmd_calibrate(config: &RunConfig) -> Result<Vec<CalibrationFile>> {
    config.prepare_output()?;
    let mut loaded = Vec::new();
    for &kind in &config.distances {
        loaded.push(read_scores(scores_path(&config.output_dir, kind))?);
    }
    let (first_header, first_scores) = &loaded[0];
    for (h, s) in &loaded[1..] {
        check_hash(&first_header.corpus_hash, &h.corpus_hash)?;
        if s.iter().map(key).ne(first_scores.iter().map(key)) {
            return Err(Error::format(
                "scores file",
                format!(
                    "{} scores cover different pairs than {}",
                    h.distance, first_header.distance
                ),
            ));
        }
    }

    let labels: Vec<_> = first_scores.iter().map(|s| s.label).collect();
    let mask = split_mask(
        &labels,
        config.calibration_fraction,
        config.seed,
        config.stratified,
    )?;
    write_text(
        config.out("split.csv"),
        &render_split(&first_header.corpus_hash, config.seed, first_scores, &mask),
    )?;

    let mut out = Vec::new();
    for (header, scores) in &loaded {
        let calibration: Vec<PairScore> = scores
            .iter()
            .zip(&mask)
            .filter(|(_, &m)| m)
            .map(|(s, _)| s.clone())
            .collect();
        let mut result = calibrate_threshold(&calibration, config.rate_mode)?;
        result.seed = config.seed;
        let file = CalibrationFile {
            corpus_hash: header.corpus_hash.clone(),
            distance: header.distance,
            normalization: header.normalization,
            calibration_fraction: config.calibration_fraction,
            stratified: config.stratified,
            result,
        };
        let json = serde_json::to_string_pretty(&file).expect("serializable");
        write_text(
            calibration_path(&config.output_dir, header.distance),
            &(json + "\n"),
        )?;
        out.push(file);
    }
    Ok(out)
}

/// Combined classification output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub corpus_hash: String,
    pub rate_mode: RateMode,
    pub normalization: Normalization,
    pub reports: Vec<ClassificationReport>,
}

/// Applies each calibrated τ to the test complement and writes
/// `report.json` and `report.txt`.
pub fn cmd_classify(config: &RunConfig) -> Result<ReportFile> {
    config.prepare_output()?;
    let (split_hash, membership) = read_split(config.out("split.csv"))?;
    let mut reports = Vec::new();
    let mut rate_mode = config.rate_mode;
    let mut normalization = config.normalization;
    for &kind in &config.distances {
        let (header, scores) = read_scores(scores_path(&config.output_dir, kind))?;
        check_hash(&split_hash, &header.corpus_hash)?;
        let cal: CalibrationFile =
            serde_json::from_str(&read_text(calibration_path(&config.output_dir, kind))?)
                .map_err(|e| Error::format("calibration file", e.to_string()))?;
        check_hash(&split_hash, &cal.corpus_hash)?;
        rate_mode = cal.result.rate_mode;
        normalization = header.normalization;
        let (calibration, test) = partition(&scores, &membership)?;
        reports.push(build_report(
            kind,
            cal.result.threshold,
            &calibration,
            &test,
            cal.result.seed,
        )?);
    }
    let file = ReportFile {
        corpus_hash: split_hash,
        rate_mode,
        normalization,
        reports,
    };
    let json = serde_json::to_string_pretty(&file).expect("serializable");
    write_text(config.out("report.json"), &(json + "\n"))?;
    let mut text = render_tables(&file.reports);
    let _ = writeln!(
        text,
        "\nrate mode: {}; normalization: {}; thresholds: {}",
        file.rate_mode,
        file.normalization,
        file.reports
            .iter()
            .map(|r| format!("{}={}", r.distance, r.threshold))
            .collect::<Vec<_>>()
            .join(", ")
    );
    write_text(config.out("report.txt"), &text)?;
    Ok(file)
}

/// Trace output for one pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFile {
    pub stimulus_id: String,
    pub learner_id: String,
    #[serde(flatten)]
    pub trace: PathTrace,
    pub boundaries_available: bool,
    pub intersections: Vec<BoundaryIntersection>,
}

/// DTW path for one pair, with phone-boundary intersections when both
/// utterances carry boundaries. Uses the first configured distance.
pub fn cmd_trace(config: &RunConfig, stimulus_id: &str, learner_id: &str) -> Result<TraceFile> {
    config.prepare_output()?;
    let manifest = Manifest::parse(config.manifest_path()?)?;
    let learner = manifest
        .learner(stimulus_id, learner_id)
        .ok_or_else(|| Error::UnknownPair {
            stimulus_id: stimulus_id.into(),
            learner_id: learner_id.into(),
        })?;
    let teacher = manifest.teacher(stimulus_id).expect("validated teacher");
    let kind = config.distances[0];
    let alignment = dtw(
        &manifest.read_features(teacher)?,
        &manifest.read_features(learner)?,
        kind,
    )?;
    let (boundaries_available, intersections) = match (&teacher.phone_boundaries, &learner.phone_boundaries) {
        (Some(t), Some(l)) => (true, analysis::boundary_intersections(&alignment, t, l)?),
        _ => (false, Vec::new()),
    };
    let file = TraceFile {
        stimulus_id: stimulus_id.into(),
        learner_id: learner_id.into(),
        trace: PathTrace::from(&alignment),
        boundaries_available,
        intersections,
    };
    let stem = format!("trace_{stimulus_id}_{learner_id}_{kind}");
    let json = serde_json::to_string(&file).expect("serializable");
    write_text(config.out(format!("{stem}.json")), &(json + "\n"))?;
    let csv = if boundaries_available {
        analysis::intersections_csv(&file.intersections)
    } else {
        "# no phone boundaries for this pair\n".to_string()
    };
    write_text(config.out(format!("{stem}.csv")), &csv)?;
    Ok(file)
}

/// Writes per-class histograms and the phone-length scatter for each
/// scored distance.
pub fn cmd_distributions(config: &RunConfig) -> Result<Vec<PathBuf>> {
    config.prepare_output()?;
    let mut written = Vec::new();
    for &kind in &config.distances {
        let (_, scores) = read_scores(scores_path(&config.output_dir, kind))?;
        let hist = analysis::score_distributions(&scores, config.bins)?;
        let path = config.out(format!("distribution_{kind}.csv"));
        write_text(&path, &hist.to_csv())?;
        written.push(path);
        let scatter = analysis::phone_length_scatter(&scores);
        let path = config.out(format!("phone_length_{kind}.csv"));
        write_text(&path, &scatter.to_csv())?;
        written.push(path);
    }
    Ok(written)
}

/// Generates a synthetic corpus into `out_dir` and reloads it.
pub fn cmd_synth(spec: &SynthSpec, out_dir: impl AsRef<Path>) -> Result<(Manifest, SynthCorpus)> {
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let (manifest, corpus) = generate(spec, out_dir)?;
    let text = toml::to_string(spec).map_err(|e| Error::format("spec", e.to_string()))?;
    write_text(out_dir.join("synth_spec.toml"), &text)?;
    Ok((manifest, corpus))
}

pub fn read_synth_spec(path: impl AsRef<Path>) -> Result<SynthSpec> {
    let text = read_text(&path)?;
    let spec: SynthSpec = toml::from_str(&text).map_err(|e| Error::format("synth spec", e.to_string()))?;
    spec.validate()?;
    Ok(spec)
}

/// Strict manifest load, for callers that need every feature file present.
pub fn load_checked(config: &RunConfig) -> Result<Manifest> {
    load_manifest(config.manifest_path()?)
}
