use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use intel_align::pipeline::{self, RunConfig, WORKERS_ENV};
use intel_align::{DistanceKind, Normalization, RateMode, SynthSpec};

#[derive(Parser)]
#[command(name = "intel-align", version, about = "DTW-based intelligibility scoring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus.
    Synth {
        /// TOML generator spec; defaults apply to missing fields.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score every learner against its teacher.
    Score(Common),
    /// Pick the EER threshold on a calibration subset.
    Calibrate(Common),
    /// Classify the test subset and write reports.
    Classify(Common),
    /// Dump the alignment path of one pair.
    Trace {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        stimulus: String,
        #[arg(long)]
        learner: String,
    },
    /// Write score histograms and phone-length scatter tables.
    Distributions(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Repeatable; defaults to all three.
    #[arg(long, value_parser = parse::<DistanceKind>)]
    distance: Vec<DistanceKind>,
    #[arg(long, value_parser = parse::<Normalization>)]
    normalization: Option<Normalization>,
    #[arg(long)]
    calib_frac: Option<f64>,
    #[arg(long)]
    stratified: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse::<RateMode>)]
    rate_mode: Option<RateMode>,
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn parse<T: std::str::FromStr<Err = intel_align::Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: intel_align::Error| e.to_string())
}

impl Common {
    fn resolve(self) -> intel_align::Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::from_toml_file(p)?,
            None => RunConfig::default(),
        };
        if self.manifest.is_some() {
            c.manifest = self.manifest;
        }
        if !self.distance.is_empty() {
            c.distances = self.distance;
        }
        if let Some(v) = self.normalization {
            c.normalization = v;
        }
        if let Some(v) = self.calib_frac {
            c.calibration_fraction = v;
        }
        if self.stratified {
            c.stratified = true;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.rate_mode {
            c.rate_mode = v;
        }
        if let Some(v) = self.workers {
            c.workers = v;
        }
        if let Some(v) = self.bins {
            c.bins = v;
        }
        if let Some(v) = self.out {
            c.output_dir = v;
        }
        Ok(c)
    }
}

fn run(cli: Cli) -> intel_align::Result<bool> {
    match cli.command {
        Command::Synth { spec, seed, out } => {
            let mut spec = match spec {
                Some(p) => pipeline::read_synth_spec(p)?,
                None => SynthSpec::default(),
            };
            if let Some(s) = seed {
                spec.seed = s;
            }
            let (_, corpus) = pipeline::cmd_synth(&spec, &out)?;
            println!("{}", corpus.summary());
            println!("manifest: {}", out.join("manifest.jsonl").display());
        }
        Command::Score(common) => {
            let o = pipeline::cmd_score(&common.resolve()?)?;
            println!("scored {} pairs, {} failed", o.scored, o.failures.len());
            for f in &o.failures {
                eprintln!("{} {}: {}", f.stimulus_id, f.learner_id, f.message);
            }
            return Ok(o.failures.is_empty());
        }
        Command::Calibrate(common) => {
            for f in pipeline::cmd_calibrate(&common.resolve()?)? {
                let r = &f.result;
                println!(
                    "{}: tau={} far={:.4} frr={:.4} eer={:.4} n={}",
                    f.distance, r.threshold, r.far, r.frr, r.eer, r.calibration_size
                );
            }
        }
        Command::Classify(common) => {
            let c = common.resolve()?;
            pipeline::cmd_classify(&c)?;
            print!(
                "{}",
                std::fs::read_to_string(c.output_dir.join("report.txt")).unwrap_or_default()
            );
        }
        Command::Trace {
            common,
            stimulus,
            learner,
        } => {
            let t = pipeline::cmd_trace(&common.resolve()?, &stimulus, &learner)?;
            println!(
                "{} {}: cost={} normalized={} path_len={} boundaries={}",
                t.stimulus_id,
                t.learner_id,
                t.trace.accumulated_cost,
                t.trace.normalized_distance,
                t.trace.pairs.len(),
                t.boundaries_available
            );
        }
        Command::Distributions(common) => {
            for p in pipeline::cmd_distributions(&common.resolve()?)? {
                println!("{}", p.display());
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
