//! Twitter sentiment analysis toolkit.
//!
//! The pipeline: ingest and harmonize labelled tweet datasets
//! ([`corpus`]), normalize raw text with rewrite rules ([`normalize`]),
//! embed tokens with pre-trained word vectors ([`embeddings`]), train a
//! single-layer LSTM classifier from scratch ([`lstm`]), score the same
//! tweets with a lexicon-and-rules baseline ([`vader`]) and compare both
//! with per-class metrics ([`eval`]).

pub mod corpus;
pub mod embeddings;
pub mod eval;
pub mod lstm;
pub mod normalize;
pub mod parallel;
pub mod rng;
pub mod vader;

pub use corpus::{LabeledTweet, SentimentLabel, Source};
pub use parallel::Execution;
