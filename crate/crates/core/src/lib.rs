//! Hierarchical propagation network features (HPNF) for fake news detection.
//!
//! The pipeline reconstructs, for every news item in an engagement corpus, a
//! macro-level retweet tree and a micro-level reply forest, extracts a fixed
//! 32-dimensional structural/temporal/linguistic feature vector, compares the
//! fake and real populations statistically and evaluates classifiers on the
//! vectors.
//!
//! ```no_run
//! use hpnf::{ingestion, features, sentiment::Lexicon};
//!
//! let corpus = ingestion::load_corpus("data/".as_ref()).unwrap();
//! let lexicon = Lexicon::builtin();
//! let vectors = features::extract_all(&corpus, &lexicon, 0.5);
//! println!("{} feature vectors", vectors.len());
//! ```

pub mod classify;
pub mod cli;
pub mod features;
pub mod format;
pub mod ingestion;
pub mod network;
pub mod report;
pub mod rng;
pub mod sentiment;
pub mod stats;
pub mod synth;

pub use features::{FeatureVector, FEATURE_COUNT, FEATURE_NAMES};
pub use ingestion::{EngagementCorpus, Label};
pub use network::PropagationNetwork;
