//! Writing and reading FSEQ feature files and a JSON-lines manifest.

use intel_align::feature_io::{decode_fseq, encode_fseq, read_feature_header, write_manifest};
use intel_align::{
    load_manifest, write_feature_file, FeatureSequence, Label, PhoneBoundary, Role, UtteranceRecord,
};

fn main() -> intel_align::Result<()> {
    let dir = std::env::temp_dir().join("intel_align_feature_files");
    std::fs::create_dir_all(dir.join("features")).unwrap();

    let teacher = FeatureSequence::from_rows(&[[0.0, 1.0], [0.5, 0.5], [1.0, 0.0], [1.0, 1.0]])?;
    let learner = FeatureSequence::from_rows(&[[0.0, 1.0], [0.0, 1.0], [0.5, 0.5], [1.0, 0.0], [1.0, 1.0]])?;

    let bytes = encode_fseq(&teacher);
    println!(
        "teacher encodes to {} bytes (16 header + 4·frames·dim)",
        bytes.len()
    );
    assert_eq!(decode_fseq(&bytes)?, teacher);

    write_feature_file(&teacher, dir.join("features/S1_teacher.fseq"))?;
    write_feature_file(&learner, dir.join("features/S1_L01.fseq"))?;
    let (frames, dim) = read_feature_header(dir.join("features/S1_L01.fseq"))?;
    println!("learner header: {frames} frames × {dim} dims");

    let records = vec![
        UtteranceRecord {
            stimulus_id: "S1".into(),
            role: Role::Teacher,
            learner_id: None,
            feature_path: "features/S1_teacher.fseq".into(),
            label: None,
            phoneme_categories: ["Vowels".to_string()].into(),
            phone_boundaries: Some(vec![PhoneBoundary::new("ah", 2), PhoneBoundary::new("t", 4)]),
        },
        UtteranceRecord {
            stimulus_id: "S1".into(),
            role: Role::Learner,
            learner_id: Some("L01".into()),
            feature_path: "features/S1_L01.fseq".into(),
            label: Some(Label::Intelligible),
            phoneme_categories: ["Vowels".to_string()].into(),
            phone_boundaries: Some(vec![PhoneBoundary::new("ah", 3), PhoneBoundary::new("t", 5)]),
        },
    ];
    let path = dir.join("manifest.jsonl");
    write_manifest(&path, &records)?;
    print!("{}", std::fs::read_to_string(&path).unwrap());

    let manifest = load_manifest(&path)?;
    let l = manifest.learner("S1", "L01").expect("present");
    println!(
        "loaded {} records; L01 has {} frames",
        manifest.records.len(),
        manifest.read_features(l)?.frames()
    );

    let learner_bytes = encode_fseq(&learner);
    std::fs::write(
        dir.join("features/S1_L01.fseq"),
        &learner_bytes[..learner_bytes.len() - 3],
    )
    .unwrap();
    match load_manifest(&path).and_then(|m| m.read_features(m.learner("S1", "L01").unwrap())) {
        Err(e) => println!("truncated file rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
