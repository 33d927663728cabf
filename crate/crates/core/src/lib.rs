//! Attention-weighted sentence embeddings.
//!
//! A sentence vector is a softmax-weighted sum of its word vectors, where the
//! per-word scores come from one of several sources:
//!
//! - surprisal under an n-gram Kneser-Ney language model ([`lm`]),
//! - dot products between word vectors and trained POS or CCG tag vectors,
//! - tf-idf, treating every sentence as a document,
//! - or nothing at all (plain averaging).
//!
//! [`training`] fits word and tag vectors under two host objectives: an
//! adjacent-sentence cosine softmax and a paraphrase max-margin loss with
//! in-batch hard negatives. [`eval`] scores the result on semantic textual
//! similarity data and against eye-tracking reading times.

pub mod attention;
pub mod bundle;
pub mod error;
pub mod eval;
pub mod io;
pub mod lm;
pub mod sentence;
pub mod synthetic;
pub mod tables;
pub mod training;
pub mod vector;
pub mod vocab;

pub use attention::{AttentionWeights, SentenceEncoder, TfIdfIndex};
pub use bundle::{AttentionKind, ModelBundle};
pub use error::{Error, Result};
pub use lm::{clip_surprisal, KnModel};
pub use sentence::{TagKind, TaggedSentence, TaggedToken};
pub use tables::{init_tag_table, EmbeddingTable, TagTable};
pub use vector::cosine;
pub use vocab::Vocabulary;
