//! Unsupervised intelligibility detection for learner speech.
//!
//! A learner's repetition of a stimulus is compared with a reference
//! (teacher) utterance by aligning their frame-level embedding sequences with
//! dynamic time warping. The path-normalized alignment cost is the score; a
//! single threshold τ, chosen at the equal error rate on a small labeled
//! calibration subset, separates intelligible (score < τ) from
//! non-intelligible speech.
//!
//! ```
//! use intel_align::{dtw, DistanceKind, FeatureSequence};
//!
//! let teacher = FeatureSequence::from_rows(&[vec![0.0], vec![2.0], vec![4.0]]).unwrap();
//! let learner = FeatureSequence::from_rows(&[vec![0.0], vec![2.0], vec![2.0], vec![4.0]]).unwrap();
//! let r = dtw(&teacher, &learner, DistanceKind::Mae).unwrap();
//! assert_eq!(r.accumulated_cost, 0.0);
//! assert_eq!(r.path, vec![(1, 1), (2, 2), (2, 3), (3, 4)]);
//! ```

pub mod analysis;
pub mod calibration;
pub mod classifier;
pub mod distance;
pub mod dtw;
pub mod error;
pub mod feature_io;
pub mod pipeline;
pub mod rng;
pub mod synth;

pub use calibration::{calibrate_threshold, CalibrationResult, PairScore, RateMode};
pub use classifier::{build_report, classify, ClassificationReport};
pub use distance::DistanceKind;
pub use dtw::{dtw, dtw_cost, score_pair, AlignmentResult, Normalization, PathTrace};
pub use error::{Error, Result};
pub use feature_io::{
    load_manifest, read_feature_file, write_feature_file, FeatureSequence, Label, Manifest, PhoneBoundary,
    Role, UtteranceRecord,
};
pub use synth::{generate, generate_corpus, ConfusionMode, SynthCorpus, SynthSpec};
