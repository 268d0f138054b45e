use intel_align::feature_io::{decode_fseq, encode_fseq, parse_manifest_str, write_manifest};
use intel_align::{
    load_manifest, read_feature_file, write_feature_file, Error, FeatureSequence, Label, Role,
};
use proptest::prelude::*;

fn header(frames: u32, dim: u32) -> Vec<u8> {
    let mut b = b"FSEQ".to_vec();
    for w in [1u32, frames, dim] {
        b.extend_from_slice(&w.to_le_bytes());
    }
    b
}

fn with_payload(mut b: Vec<u8>, values: &[f32]) -> Vec<u8> {
    for v in values {
        b.extend_from_slice(&v.to_le_bytes());
    }
    b
}

#[test]
fn decodes_handwritten_files() {
    let s = decode_fseq(&with_payload(header(2, 3), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0])).unwrap();
    assert_eq!((s.frames(), s.dim()), (2, 3));
    assert_eq!(s.data(), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    assert_eq!(s.frame(1), &[4.0, 5.0, 6.0]);
    let s = decode_fseq(&with_payload(header(1, 1), &[0.0])).unwrap();
    assert_eq!(s.data(), &[0.0]);
}

#[test]
fn malformed_files_report_offsets() {
    let short = with_payload(header(2, 3), &[1.0; 5]);
    assert!(matches!(
        decode_fseq(&short),
        Err(Error::Truncated {
            expected: 24,
            found: 20,
            ..
        })
    ));

    let mut magic = with_payload(header(1, 1), &[0.0]);
    magic[0] = b'X';
    assert!(matches!(decode_fseq(&magic), Err(Error::BadMagic { .. })));

    let mut version = with_payload(header(1, 1), &[0.0]);
    version[4] = 2;
    assert!(matches!(
        decode_fseq(&version),
        Err(Error::VersionMismatch { found: 2, offset: 4 })
    ));

    let nan = with_payload(header(1, 3), &[0.0, f32::NAN, 1.0]);
    assert!(matches!(
        decode_fseq(&nan),
        Err(Error::NonFiniteValue { offset: 20, .. })
    ));

    let extra = with_payload(header(1, 1), &[0.0, 1.0]);
    assert!(matches!(
        decode_fseq(&extra),
        Err(Error::TrailingData { offset: 20, count: 4 })
    ));

    assert!(decode_fseq(b"FS").is_err());
    assert!(decode_fseq(&header(0, 4)).is_err());
}

#[test]
fn large_random_round_trip() {
    use rand::Rng;
    let mut rng = intel_align::rng::seeded(300);
    let data: Vec<f32> = (0..300 * 768).map(|_| rng.random_range(-50.0f32..50.0)).collect();
    let seq = FeatureSequence::new(300, 768, data).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.fseq");
    write_feature_file(&seq, &path).unwrap();
    let back = read_feature_file(&path).unwrap();
    assert_eq!(back.data(), seq.data());
    assert_eq!(std::fs::read(&path).unwrap(), encode_fseq(&seq));
}

#[test]
fn non_finite_sequences_cannot_be_built() {
    assert!(FeatureSequence::new(1, 2, vec![0.0, f32::NAN]).is_err());
    assert!(FeatureSequence::new(1, 2, vec![0.0, f32::INFINITY]).is_err());
    assert!(FeatureSequence::new(2, 2, vec![0.0; 3]).is_err());
}

proptest! {
    #[test]
    fn bytes_round_trip(frames in 1usize..20, dim in 1usize..20, seed: u64) {
        use rand::Rng;
        let mut rng = intel_align::rng::seeded(seed);
        let data: Vec<f32> = (0..frames * dim).map(|_| rng.random_range(-1e6f32..1e6)).collect();
        let seq = FeatureSequence::new(frames, dim, data).unwrap();
        let bytes = encode_fseq(&seq);
        prop_assert_eq!(bytes.len(), 16 + 4 * frames * dim);
        let back = decode_fseq(&bytes).unwrap();
        prop_assert_eq!(encode_fseq(&back), bytes);
    }
}

fn tiny_corpus(dir: &std::path::Path) -> std::path::PathBuf {
    let seq = FeatureSequence::from_rows(&[[0.0f32, 1.0], [1.0, 0.0]]).unwrap();
    std::fs::create_dir_all(dir.join("f")).unwrap();
    for name in ["t", "a", "b"] {
        write_feature_file(&seq, dir.join(format!("f/{name}.fseq"))).unwrap();
    }
    let path = dir.join("m.jsonl");
    std::fs::write(
        &path,
        concat!(
            r#"{"stimulus_id":"S1","role":"teacher","feature_path":"f/t.fseq","phoneme_categories":["Vowels"],"phone_boundaries":[["a",1],["b",2]]}"#, "\n",
            r#"{"stimulus_id":"S1","role":"learner","learner_id":"A","feature_path":"f/a.fseq","label":1,"phoneme_categories":["Vowels"]}"#, "\n",
            r#"{"stimulus_id":"S1","role":"learner","learner_id":"B","feature_path":"f/b.fseq","label":0,"phoneme_categories":["Vowels","Stops"]}"#, "\n",
        ),
    )
    .unwrap();
    path
}

#[test]
fn manifest_loads_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = tiny_corpus(dir.path());
    let m = load_manifest(&path).unwrap();
    assert_eq!(m.records.len(), 3);
    assert_eq!(m.learners().count(), 2);
    assert_eq!(m.learner("S1", "B").unwrap().label, Some(Label::NonIntelligible));
    assert_eq!(m.teacher("S1").unwrap().role, Role::Teacher);

    let copy = dir.path().join("copy.jsonl");
    write_manifest(&copy, &m.records).unwrap();
    assert_eq!(load_manifest(&copy).unwrap().records, m.records);
}

#[test]
fn manifest_problems_are_all_reported() {
    let text = concat!(
        r#"{"stimulus_id":"S1","role":"teacher","feature_path":"t.fseq","phoneme_categories":[]}"#,
        "\n",
        r#"{"stimulus_id":"S1","role":"learner","learner_id":"A","feature_path":"a.fseq","label":1,"phoneme_categories":[]}"#,
        "\n",
        r#"{"stimulus_id":"S1","role":"learner","learner_id":"A","feature_path":"a.fseq","label":1,"phoneme_categories":[]}"#,
        "\n",
        r#"{"stimulus_id":"S2","role":"learner","learner_id":"A","feature_path":"x.fseq","label":0,"phoneme_categories":[]}"#,
        "\n",
        r#"{"stimulus_id":"S1","role":"learner","learner_id":"C","feature_path":"c.fseq","phoneme_categories":[]}"#,
        "\n",
        "not json\n",
    );
    let parsed = parse_manifest_str(text);
    assert_eq!(parsed.records.len() + parsed.rejected.len(), 6);
    let bad_lines: Vec<usize> = parsed.rejected.iter().map(|i| i.line).collect();
    assert_eq!(bad_lines, vec![3, 4, 5, 6]);
    assert!(parsed.rejected[0].message.contains("duplicate"));
    assert!(parsed.rejected[1].message.contains("teacher"));
}

#[test]
fn dangling_feature_path_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = tiny_corpus(dir.path());
    std::fs::remove_file(dir.path().join("f/b.fseq")).unwrap();
    match load_manifest(&path) {
        Err(Error::Manifest(issues)) => {
            assert_eq!(issues.len(), 1);
            assert_eq!(issues[0].line, 3);
        }
        other => panic!("expected manifest error, got {other:?}"),
    }
}
