//! Feature-sequence files (FSEQ) and the line-delimited corpus manifest.
//!
//! FSEQ layout, little-endian, no padding and no trailing data:
//!
//! | offset | size | field                         |
//! |--------|------|-------------------------------|
//! | 0      | 4    | magic `FSEQ`                  |
//! | 4      | 4    | format version, u32 = 1       |
//! | 8      | 4    | frames, u32                   |
//! | 12     | 4    | dim, u32                      |
//! | 16     | 4·n  | frames × dim binary32, row-major |
//!
//! The manifest is UTF-8 with one JSON object per line. Feature paths are
//! resolved relative to the directory holding the manifest.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, ManifestIssue, Result};

pub const FSEQ_MAGIC: [u8; 4] = *b"FSEQ";
pub const FSEQ_VERSION: u32 = 1;
pub const FSEQ_HEADER_LEN: usize = 16;

/// Phoneme categories a stimulus may be tagged with.
pub const PHONEME_CATEGORIES: [&str; 8] = [
    "Fricatives",
    "Stops",
    "Nasals",
    "Semi-Vowels",
    "Glides",
    "Vowels",
    "Diphthongs",
    "Consonant Clusters",
];

/// A `frames × dim` matrix of embedding vectors for one utterance.
///
/// Construction validates shape and finiteness, so every value handed out by
/// this type is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSequence {
    frames: usize,
    dim: usize,
    data: Vec<f32>,
    source_id: String,
}

impl FeatureSequence {
    pub fn new(frames: usize, dim: usize, data: Vec<f32>) -> Result<Self> {
        if frames == 0 || dim == 0 {
            return Err(Error::InvalidSequence(format!(
                "frames and dim must be at least 1 (got {frames}×{dim})"
            )));
        }
        if data.len() != frames * dim {
            return Err(Error::InvalidSequence(format!(
                "data length {} does not equal {frames}×{dim}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSequence(format!(
                "non-finite value {} at frame {}, column {}",
                data[i],
                i / dim,
                i % dim
            )));
        }
        Ok(Self {
            frames,
            dim,
            data,
            source_id: String::new(),
        })
    }

    /// Builds a sequence from equal-length rows.
    pub fn from_rows<R: AsRef<[f32]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::InvalidSequence(format!(
                    "row {i} has {} columns, expected {dim}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), dim, data)
    }

    pub fn with_source_id(mut self, source_id: impl Into<String>) -> Self {
        self.source_id = source_id.into();
        self
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    /// Frame `index` (0-based).
    pub fn frame(&self, index: usize) -> &[f32] {
        &self.data[index * self.dim..(index + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f32]> {
        self.data.chunks_exact(self.dim)
    }
}

/// Serializes a sequence into FSEQ bytes.
pub fn encode_fseq(seq: &FeatureSequence) -> Vec<u8> {
    let mut out = Vec::with_capacity(FSEQ_HEADER_LEN + seq.data.len() * 4);
    out.extend_from_slice(&FSEQ_MAGIC);
    out.extend_from_slice(&FSEQ_VERSION.to_le_bytes());
    out.extend_from_slice(&(seq.frames as u32).to_le_bytes());
    out.extend_from_slice(&(seq.dim as u32).to_le_bytes());
    for v in &seq.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn decode_header(bytes: &[u8]) -> Result<(usize, usize)> {
    if bytes.len() < 4 {
        return Err(Error::Truncated {
            offset: bytes.len() as u64,
            expected: FSEQ_HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
    if magic != FSEQ_MAGIC {
        return Err(Error::BadMagic { found: magic });
    }
    if bytes.len() < FSEQ_HEADER_LEN {
        return Err(Error::Truncated {
            offset: bytes.len() as u64,
            expected: FSEQ_HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    let version = word(4);
    if version != FSEQ_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            offset: 4,
        });
    }
    let frames = word(8) as usize;
    let dim = word(12) as usize;
    if frames == 0 {
        return Err(Error::InvalidSequence(
            "header at byte 8 declares 0 frames".into(),
        ));
    }
    if dim == 0 {
        return Err(Error::InvalidSequence("header at byte 12 declares dim 0".into()));
    }
    Ok((frames, dim))
}

/// Parses FSEQ bytes. Errors carry the byte offset of the offending field.
pub fn decode_fseq(bytes: &[u8]) -> Result<FeatureSequence> {
    let (frames, dim) = decode_header(bytes)?;
    let expected = (frames as u64) * (dim as u64) * 4;
    let payload = &bytes[FSEQ_HEADER_LEN..];
    let found = payload.len() as u64;
    if found < expected {
        return Err(Error::Truncated {
            offset: bytes.len() as u64,
            expected,
            found,
        });
    }
    if found > expected {
        return Err(Error::TrailingData {
            offset: FSEQ_HEADER_LEN as u64 + expected,
            count: found - expected,
        });
    }
    let mut data = Vec::with_capacity(frames * dim);
    for (i, chunk) in payload.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(Error::NonFiniteValue {
                value: v,
                offset: (FSEQ_HEADER_LEN + 4 * i) as u64,
            });
        }
        data.push(v);
    }
    FeatureSequence::new(frames, dim, data)
}

pub fn read_feature_file(path: impl AsRef<Path>) -> Result<FeatureSequence> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(decode_fseq(&bytes)?.with_source_id(path.display().to_string()))
}

/// Reads only the header and returns `(frames, dim)`.
pub fn read_feature_header(path: impl AsRef<Path>) -> Result<(usize, usize)> {
    let path = path.as_ref();
    let mut file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut header = Vec::with_capacity(FSEQ_HEADER_LEN);
    file.by_ref()
        .take(FSEQ_HEADER_LEN as u64)
        .read_to_end(&mut header)
        .map_err(|e| Error::io(path, e))?;
    decode_header(&header)
}

pub fn write_feature_file(seq: &FeatureSequence, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_fseq(seq)).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Teacher,
    Learner,
}

/// Binary intelligibility label; serialized as `1` (intelligible) or `0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Label {
    NonIntelligible,
    Intelligible,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Intelligible => "intelligible",
            Label::NonIntelligible => "non_intelligible",
        }
    }

    pub fn is_intelligible(self) -> bool {
        self == Label::Intelligible
    }
}

impl From<Label> for u8 {
    fn from(label: Label) -> u8 {
        match label {
            Label::Intelligible => 1,
            Label::NonIntelligible => 0,
        }
    }
}

impl TryFrom<u8> for Label {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Label::Intelligible),
            0 => Ok(Label::NonIntelligible),
            other => Err(format!("label must be 0 or 1, got {other}")),
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// End of one phone, as an exclusive frame count from utterance start.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "(String, usize)", into = "(String, usize)")]
pub struct PhoneBoundary {
    pub label: String,
    pub end_frame: usize,
}

impl PhoneBoundary {
    pub fn new(label: impl Into<String>, end_frame: usize) -> Self {
        Self {
            label: label.into(),
            end_frame,
        }
    }
}

impl From<(String, usize)> for PhoneBoundary {
    fn from((label, end_frame): (String, usize)) -> Self {
        Self { label, end_frame }
    }
}

impl From<PhoneBoundary> for (String, usize) {
    fn from(b: PhoneBoundary) -> Self {
        (b.label, b.end_frame)
    }
}

/// Checks that boundaries are non-empty and strictly increasing from ≥ 1.
pub fn validate_boundaries(boundaries: &[PhoneBoundary]) -> std::result::Result<(), String> {
    if boundaries.is_empty() {
        return Err("phone_boundaries is present but empty".into());
    }
    let mut prev = 0;
    for b in boundaries {
        if b.end_frame <= prev {
            return Err(format!(
                "phone_boundaries not strictly increasing at {:?} ({} after {prev})",
                b.label, b.end_frame
            ));
        }
        prev = b.end_frame;
    }
    Ok(())
}

/// One manifest row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UtteranceRecord {
    pub stimulus_id: String,
    pub role: Role,
    #[serde(default)]
    pub learner_id: Option<String>,
    pub feature_path: PathBuf,
    #[serde(default)]
    pub label: Option<Label>,
    #[serde(default)]
    pub phoneme_categories: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phone_boundaries: Option<Vec<PhoneBoundary>>,
}

impl UtteranceRecord {
    fn key(&self) -> (String, Role, Option<String>) {
        (self.stimulus_id.clone(), self.role, self.learner_id.clone())
    }

    fn check(&self) -> std::result::Result<(), String> {
        if self.stimulus_id.is_empty() {
            return Err("empty stimulus_id".into());
        }
        match self.role {
            Role::Learner => {
                if self.learner_id.as_deref().is_none_or(str::is_empty) {
                    return Err("learner record without learner_id".into());
                }
                if self.label.is_none() {
                    return Err(format!(
                        "learner {} on stimulus {} has no label",
                        self.learner_id.as_deref().unwrap_or_default(),
                        self.stimulus_id
                    ));
                }
            }
            Role::Teacher => {
                if self.label.is_some() {
                    return Err(format!("teacher record for {} carries a label", self.stimulus_id));
                }
            }
        }
        if let Some(bad) = self
            .phoneme_categories
            .iter()
            .find(|c| !PHONEME_CATEGORIES.contains(&c.as_str()))
        {
            return Err(format!("unknown phoneme category {bad:?}"));
        }
        if let Some(b) = &self.phone_boundaries {
            validate_boundaries(b)?;
        }
        Ok(())
    }
}

/// Outcome of parsing manifest text: every non-blank line ends up either in
/// `records` or in `rejected`, never both.
#[derive(Debug, Clone, Default)]
pub struct ManifestParse {
    pub records: Vec<(usize, UtteranceRecord)>,
    pub rejected: Vec<ManifestIssue>,
}

/// Parses manifest text and applies every record-level and cross-record check.
pub fn parse_manifest_str(text: &str) -> ManifestParse {
    let mut out = ManifestParse::default();
    let mut seen: HashSet<(String, Role, Option<String>)> = HashSet::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: UtteranceRecord = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => {
                out.rejected.push(ManifestIssue {
                    line: line_no,
                    message: format!("invalid record: {e}"),
                });
                continue;
            }
        };
        if let Err(message) = record.check() {
            out.rejected.push(ManifestIssue {
                line: line_no,
                message,
            });
            continue;
        }
        if !seen.insert(record.key()) {
            out.rejected.push(ManifestIssue {
                line: line_no,
                message: format!(
                    "duplicate ({}, {:?}, {:?})",
                    record.stimulus_id, record.role, record.learner_id
                ),
            });
            continue;
        }
        out.records.push((line_no, record));
    }

    let teachers: HashSet<String> = out
        .records
        .iter()
        .filter(|(_, r)| r.role == Role::Teacher)
        .map(|(_, r)| r.stimulus_id.clone())
        .collect();
    let mut kept = Vec::with_capacity(out.records.len());
    for (line, r) in out.records.drain(..) {
        if r.role == Role::Learner && !teachers.contains(&r.stimulus_id) {
            out.rejected.push(ManifestIssue {
                line,
                message: format!("no teacher record for stimulus {}", r.stimulus_id),
            });
        } else {
            kept.push((line, r));
        }
    }
    out.records = kept;
    out.rejected.sort_by_key(|i| i.line);
    out
}

/// A validated corpus manifest.
#[derive(Debug, Clone)]
pub struct Manifest {
    pub corpus_name: String,
    pub records: Vec<UtteranceRecord>,
    base_dir: PathBuf,
    teacher_index: HashMap<String, usize>,
}

impl Manifest {
    pub fn new(
        corpus_name: impl Into<String>,
        base_dir: impl Into<PathBuf>,
        records: Vec<UtteranceRecord>,
    ) -> Result<Self> {
        let text = records
            .iter()
            .map(|r| serde_json::to_string(r).expect("record serializes"))
            .collect::<Vec<_>>()
            .join("\n");
        let parsed = parse_manifest_str(&text);
        if !parsed.rejected.is_empty() {
            return Err(Error::Manifest(parsed.rejected));
        }
        Ok(Self::from_parts(corpus_name.into(), base_dir.into(), records))
    }

    fn from_parts(corpus_name: String, base_dir: PathBuf, records: Vec<UtteranceRecord>) -> Self {
        let teacher_index = records
            .iter()
            .enumerate()
            .filter(|(_, r)| r.role == Role::Teacher)
            .map(|(i, r)| (r.stimulus_id.clone(), i))
            .collect();
        Self {
            corpus_name,
            records,
            base_dir,
            teacher_index,
        }
    }

    /// Structural load: parses and cross-checks records without touching
    /// feature files.
    pub fn parse(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let parsed = parse_manifest_str(&text);
        if !parsed.rejected.is_empty() {
            return Err(Error::Manifest(parsed.rejected));
        }
        let corpus_name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self::from_parts(
            corpus_name,
            base_dir,
            parsed.records.into_iter().map(|(_, r)| r).collect(),
        ))
    }

    pub fn base_dir(&self) -> &Path {
        &self.base_dir
    }

    /// Absolute or manifest-relative location of a record's feature file.
    pub fn resolve(&self, record: &UtteranceRecord) -> PathBuf {
        if record.feature_path.is_absolute() {
            record.feature_path.clone()
        } else {
            self.base_dir.join(&record.feature_path)
        }
    }

    pub fn teacher(&self, stimulus_id: &str) -> Option<&UtteranceRecord> {
        self.teacher_index.get(stimulus_id).map(|&i| &self.records[i])
    }

    pub fn learners(&self) -> impl Iterator<Item = &UtteranceRecord> {
        self.records.iter().filter(|r| r.role == Role::Learner)
    }

    pub fn learner(&self, stimulus_id: &str, learner_id: &str) -> Option<&UtteranceRecord> {
        self.learners()
            .find(|r| r.stimulus_id == stimulus_id && r.learner_id.as_deref() == Some(learner_id))
    }

    /// Reads a record's features and checks its phone boundaries against the
    /// frame count.
    pub fn read_features(&self, record: &UtteranceRecord) -> Result<FeatureSequence> {
        let seq = read_feature_file(self.resolve(record))?;
        check_boundary_end(record, seq.frames())?;
        Ok(seq)
    }
}

fn check_boundary_end(record: &UtteranceRecord, frames: usize) -> Result<()> {
    if let Some(last) = record.phone_boundaries.as_ref().and_then(|b| b.last()) {
        if last.end_frame != frames {
            return Err(Error::InvalidSequence(format!(
                "final phone boundary {} does not equal frame count {frames} for {}",
                last.end_frame,
                record.feature_path.display()
            )));
        }
    }
    Ok(())
}

/// Full load: structural checks plus existence of every feature file and
/// agreement of phone boundaries with each file's frame count.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parsed = parse_manifest_str(&text);
    let mut issues = parsed.rejected;
    let manifest = Manifest::from_parts(
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
        path.parent().map(Path::to_path_buf).unwrap_or_default(),
        Vec::new(),
    );
    let mut records = Vec::with_capacity(parsed.records.len());
    for (line, record) in parsed.records {
        let feature = manifest.resolve(&record);
        let problem = match read_feature_header(&feature) {
            Err(Error::Io { .. }) => Some(format!("dangling feature path {}", feature.display())),
            Err(e) => Some(format!("{}: {e}", feature.display())),
            Ok((frames, _)) => check_boundary_end(&record, frames).err().map(|e| e.to_string()),
        };
        match problem {
            Some(message) => issues.push(ManifestIssue { line, message }),
            None => records.push(record),
        }
    }
    if !issues.is_empty() {
        issues.sort_by_key(|i| i.line);
        return Err(Error::Manifest(issues));
    }
    Ok(Manifest::from_parts(
        manifest.corpus_name,
        manifest.base_dir,
        records,
    ))
}

/// Writes records as JSON lines, one per record, newline-terminated.
pub fn write_manifest(path: impl AsRef<Path>, records: &[UtteranceRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::new();
    for r in records {
        text.push_str(&serde_json::to_string(r).expect("record serializes"));
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(frames: u32, dim: u32) -> Vec<u8> {
        let mut b = b"FSEQ".to_vec();
        b.extend_from_slice(&1u32.to_le_bytes());
        b.extend_from_slice(&frames.to_le_bytes());
        b.extend_from_slice(&dim.to_le_bytes());
        b
    }

    #[test]
    fn decodes_two_by_three() {
        let mut bytes = header(2, 3);
        for v in 1..=6 {
            bytes.extend_from_slice(&(v as f32).to_le_bytes());
        }
        let seq = decode_fseq(&bytes).unwrap();
        assert_eq!((seq.frames(), seq.dim()), (2, 3));
        assert_eq!(seq.data(), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(seq.frame(1), &[4.0, 5.0, 6.0]);
        assert_eq!(encode_fseq(&seq), bytes);
    }

    #[test]
    fn decodes_minimal() {
        let mut bytes = header(1, 1);
        bytes.extend_from_slice(&0f32.to_le_bytes());
        let seq = decode_fseq(&bytes).unwrap();
        assert_eq!(seq.data(), &[0.0]);
    }

    #[test]
    fn truncated_payload_reports_offset() {
        let mut bytes = header(2, 3);
        for v in 1..=5 {
            bytes.extend_from_slice(&(v as f32).to_le_bytes());
        }
        match decode_fseq(&bytes) {
            Err(Error::Truncated {
                offset,
                expected,
                found,
            }) => {
                assert_eq!((offset, expected, found), (36, 24, 20));
            }
            other => panic!("expected truncation, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_magic_version_trailing_and_nan() {
        let mut bytes = header(1, 1);
        bytes.extend_from_slice(&1f32.to_le_bytes());

        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode_fseq(&bad), Err(Error::BadMagic { .. })));

        let mut bad = bytes.clone();
        bad[4] = 2;
        assert!(matches!(
            decode_fseq(&bad),
            Err(Error::VersionMismatch { found: 2, offset: 4 })
        ));

        let mut bad = bytes.clone();
        bad.push(0);
        assert!(matches!(
            decode_fseq(&bad),
            Err(Error::TrailingData { offset: 20, count: 1 })
        ));

        let mut bad = header(1, 2);
        bad.extend_from_slice(&1f32.to_le_bytes());
        bad.extend_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(
            decode_fseq(&bad),
            Err(Error::NonFiniteValue { offset: 20, .. })
        ));

        assert!(matches!(decode_fseq(b"FS"), Err(Error::Truncated { .. })));
    }

    #[test]
    fn constructor_rejects_nan_and_bad_shapes() {
        assert!(FeatureSequence::new(1, 2, vec![0.0, f32::NAN]).is_err());
        assert!(FeatureSequence::new(1, 2, vec![0.0, f32::INFINITY]).is_err());
        assert!(FeatureSequence::new(0, 2, vec![]).is_err());
        assert!(FeatureSequence::new(2, 2, vec![0.0; 3]).is_err());
        assert!(FeatureSequence::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    fn line(stim: &str, role: &str, learner: Option<&str>, label: Option<u8>) -> String {
        serde_json::json!({
            "stimulus_id": stim,
            "role": role,
            "learner_id": learner,
            "feature_path": format!("{stim}_{}.fseq", learner.unwrap_or("teacher")),
            "label": label,
            "phoneme_categories": ["Vowels"],
        })
        .to_string()
    }

    #[test]
    fn parses_teacher_and_two_learners() {
        let text = [
            line("s1", "teacher", None, None),
            line("s1", "learner", Some("a"), Some(1)),
            line("s1", "learner", Some("b"), Some(0)),
        ]
        .join("\n");
        let parsed = parse_manifest_str(&text);
        assert!(parsed.rejected.is_empty(), "{:?}", parsed.rejected);
        assert_eq!(parsed.records.len(), 3);
        assert_eq!(parsed.records[2].1.label, Some(Label::NonIntelligible));
    }

    #[test]
    fn rejects_missing_teacher_duplicates_and_unlabeled() {
        let text = [
            line("s1", "teacher", None, None),
            line("s1", "learner", Some("a"), Some(1)),
            line("s1", "learner", Some("a"), Some(1)),
            line("s2", "learner", Some("a"), Some(1)),
            line("s1", "learner", Some("c"), None),
            "{not json".to_string(),
        ]
        .join("\n");
        let parsed = parse_manifest_str(&text);
        assert_eq!(parsed.records.len(), 2);
        let lines: Vec<usize> = parsed.rejected.iter().map(|i| i.line).collect();
        assert_eq!(lines, vec![3, 4, 5, 6]);
        assert!(parsed.rejected[0].message.contains("duplicate"));
        assert!(parsed.rejected[1].message.contains("no teacher"));
        assert!(parsed.rejected[2].message.contains("no label"));
    }

    #[test]
    fn rejects_teacher_label_and_unknown_category() {
        let text = [
            line("s1", "teacher", None, Some(1)),
            serde_json::json!({
                "stimulus_id": "s2", "role": "teacher", "learner_id": null,
                "feature_path": "x.fseq", "label": null,
                "phoneme_categories": ["Clicks"],
            })
            .to_string(),
        ]
        .join("\n");
        let parsed = parse_manifest_str(&text);
        assert_eq!(parsed.rejected.len(), 2);
    }

    #[test]
    fn boundaries_must_increase() {
        assert!(validate_boundaries(&[PhoneBoundary::new("a", 2), PhoneBoundary::new("b", 5)]).is_ok());
        assert!(validate_boundaries(&[PhoneBoundary::new("a", 2), PhoneBoundary::new("b", 2)]).is_err());
        assert!(validate_boundaries(&[PhoneBoundary::new("a", 0)]).is_err());
        assert!(validate_boundaries(&[]).is_err());
    }

    #[test]
    fn phone_boundaries_serialize_as_pairs() {
        let b = vec![PhoneBoundary::new("aa", 3)];
        assert_eq!(serde_json::to_string(&b).unwrap(), r#"[["aa",3]]"#);
    }
}
