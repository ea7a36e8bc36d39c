//! Batch analytics over tweet corpora.
//!
//! The crate is organised as a pipeline: [`ingest`] parses and cleans raw CSV
//! exports, [`text`] and [`porter`] turn text into tokens and stems,
//! [`lexicon`] scores sentiment and emotions, [`nb`] and [`lr`] are the two
//! binary sentiment classifiers, [`eval`] builds length-bucketed splits and
//! confusion-matrix metrics, and [`reports`] emits the descriptive tables.
//! [`pipeline`] wires the stages together for the `tweetscope` binary.

pub mod error;
pub mod eval;
pub mod ingest;
pub mod lexicon;
pub mod lowess;
pub mod lr;
pub mod nb;
pub mod pipeline;
pub mod porter;
pub mod reports;
pub mod rng;
pub mod text;

pub use error::{Error, Result};
pub use eval::{ConfusionMatrix, EvaluationReport, LengthBucket, Metrics};
pub use ingest::{EntitySet, MaskedText, TweetRecord};
pub use lexicon::{Emotion, EmotionProfile, SentimentLexicon, SentimentScore};
pub use lr::{FeatureVector, LrModel, TrainTrace};
pub use nb::NbModel;
pub use text::{Document, NGramTable, Vocabulary};

/// Binary sentiment class: `0` is negative, `1` is positive.
pub type ClassLabel = u8;

pub const NEGATIVE: ClassLabel = 0;
pub const POSITIVE: ClassLabel = 1;
