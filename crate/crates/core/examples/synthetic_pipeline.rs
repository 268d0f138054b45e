//! Full batch run on a generated corpus: synth, score, calibrate, classify.
//!
//! cargo run --release --example synthetic_pipeline -- [out_dir] [workers]

use std::path::PathBuf;

use intel_align::pipeline::{self, RunConfig};
use intel_align::SynthSpec;

fn main() -> intel_align::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "target/synthetic_pipeline".into()));
    let workers = args.next().and_then(|w| w.parse().ok()).unwrap_or(4);

    let spec = SynthSpec::default();
    let (_, corpus) = pipeline::cmd_synth(&spec, out.join("corpus"))?;
    println!("{}", corpus.summary());

    let config = RunConfig {
        manifest: Some(out.join("corpus/manifest.jsonl")),
        output_dir: out.join("run"),
        seed: 11,
        workers,
        ..RunConfig::default()
    };
    let scored = pipeline::cmd_score(&config)?;
    println!(
        "scored {} pairs ({} failures)",
        scored.scored,
        scored.failures.len()
    );

    for c in pipeline::cmd_calibrate(&config)? {
        println!(
            "{:>3}: tau = {:.5}  EER = {:.3}  on {} calibration pairs",
            c.distance, c.result.threshold, c.result.eer, c.result.calibration_size
        );
    }
    pipeline::cmd_classify(&config)?;
    println!();
    print!(
        "{}",
        std::fs::read_to_string(config.output_dir.join("report.txt")).unwrap()
    );
    Ok(())
}
