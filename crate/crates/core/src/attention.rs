//! Per-token attention weights and weighted composition of word vectors.
//!
//! Every scheme produces a softmax over per-position scores:
//!
//! | scheme    | score of token `t`                                  |
//! |-----------|-----------------------------------------------------|
//! | `uniform` | constant (weights are exactly `1/n`)                |
//! | `sur`     | surprisal clipped to `[0, 10]`                       |
//! | `pos/ccg` | `word_vec(x_t) · tag_vec(tag(x_t))`                  |
//! | `tfidf`   | `tf(x_t) · ln(N / df(x_t))`, each sentence a document |
//!
//! The composed vector is `(1/n) Σ_t w_t · word_vec(x_t)`. The `1/n` factor
//! is optional; it rescales every sentence vector and so cannot change any
//! cosine.

use std::collections::{HashMap, HashSet};

use crate::bundle::{AttentionKind, ModelBundle};
use crate::error::{Error, Result};
use crate::lm::{clip_surprisal, KnModel};
use crate::sentence::TaggedSentence;
use crate::tables::{EmbeddingTable, TagTable};
use crate::vector::{axpy, dot_unchecked, softmax};

/// Strictly positive weights over a sentence's positions, summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionWeights(Vec<f64>);

impl AttentionWeights {
    /// Softmax over `scores`.
    pub fn from_scores(scores: &[f64]) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::Domain("attention over an empty sequence".into()));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::Domain("attention scores must be finite".into()));
        }
        Ok(AttentionWeights(softmax(scores)))
    }

    pub fn uniform(n: usize) -> Self {
        AttentionWeights(vec![1.0 / n as f64; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

pub fn att_uniform(sentence: &TaggedSentence) -> AttentionWeights {
    AttentionWeights::uniform(sentence.len())
}

/// Softmax over surprisal values. Callers clip beforehand.
pub fn att_sur(surprisals: &[f64]) -> Result<AttentionWeights> {
    AttentionWeights::from_scores(surprisals)
}

/// Dot product of each token's word vector with its tag vector. Tags the
/// table does not know (or a missing CCG tag) use the `<unk>` tag row.
pub fn tag_logits(sentence: &TaggedSentence, embeddings: &EmbeddingTable, tags: &TagTable) -> Result<Vec<f64>> {
    if embeddings.dim() != tags.dim() {
        return Err(Error::Dimension {
            expected: embeddings.dim(),
            got: tags.dim(),
        });
    }
    let kind = tags.kind();
    Ok(sentence
        .tokens()
        .iter()
        .map(|t| {
            let w = embeddings.vector(&t.word);
            let c = tags.row(tags.id_or_unk(t.tag(kind)));
            dot_unchecked(w, c)
        })
        .collect())
}

pub fn att_tag(sentence: &TaggedSentence, embeddings: &EmbeddingTable, tags: &TagTable) -> Result<AttentionWeights> {
    AttentionWeights::from_scores(&tag_logits(sentence, embeddings, tags)?)
}

/// Sentence-level document frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct TfIdfIndex {
    doc_count: usize,
    df: HashMap<String, usize>,
}

impl TfIdfIndex {
    pub fn build<'a, I>(sentences: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a TaggedSentence>,
    {
        let mut doc_count = 0;
        let mut df: HashMap<String, usize> = HashMap::new();
        for s in sentences {
            doc_count += 1;
            let unique: HashSet<&str> = s.words().collect();
            for w in unique {
                *df.entry(w.to_owned()).or_default() += 1;
            }
        }
        if doc_count == 0 {
            return Err(Error::Domain("tf-idf index needs at least one sentence".into()));
        }
        Ok(TfIdfIndex { doc_count, df })
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    /// Document frequency; unindexed words count as 1.
    pub fn df(&self, word: &str) -> usize {
        self.df.get(word).copied().unwrap_or(1)
    }

    pub fn idf(&self, word: &str) -> f64 {
        (self.doc_count as f64 / self.df(word) as f64).ln()
    }

    pub fn scores(&self, sentence: &TaggedSentence) -> Vec<f64> {
        let mut tf: HashMap<&str, usize> = HashMap::new();
        for w in sentence.words() {
            *tf.entry(w).or_default() += 1;
        }
        sentence.words().map(|w| tf[w] as f64 * self.idf(w)).collect()
    }
}

pub fn att_tfidf(sentence: &TaggedSentence, index: &TfIdfIndex) -> AttentionWeights {
    AttentionWeights::from_scores(&index.scores(sentence)).expect("sentence is non-empty and scores finite")
}

/// Weighted sum of word vectors, divided by the sentence length when
/// `length_factor` is set.
pub fn compose(
    sentence: &TaggedSentence,
    weights: &AttentionWeights,
    embeddings: &EmbeddingTable,
    length_factor: bool,
) -> Result<Vec<f64>> {
    if weights.len() != sentence.len() {
        return Err(Error::Dimension {
            expected: sentence.len(),
            got: weights.len(),
        });
    }
    let scale = if length_factor { 1.0 / sentence.len() as f64 } else { 1.0 };
    let mut out = vec![0.0; embeddings.dim()];
    for (tok, &w) in sentence.tokens().iter().zip(weights.values()) {
        axpy(scale * w, embeddings.vector(&tok.word), &mut out);
    }
    Ok(out)
}

/// Computes attention weights and sentence vectors for one configured scheme.
#[derive(Debug, Clone, Copy)]
pub struct SentenceEncoder<'a> {
    embeddings: &'a EmbeddingTable,
    tags: Option<&'a TagTable>,
    kind: AttentionKind,
    lm: Option<&'a KnModel>,
    tfidf: Option<&'a TfIdfIndex>,
    length_factor: bool,
}

impl<'a> SentenceEncoder<'a> {
    pub fn new(embeddings: &'a EmbeddingTable, kind: AttentionKind) -> Self {
        SentenceEncoder {
            embeddings,
            tags: None,
            kind,
            lm: None,
            tfidf: None,
            length_factor: true,
        }
    }

    /// Encoder over a bundle's tables. Fails if `kind` needs a tag table the
    /// bundle lacks.
    pub fn from_bundle(bundle: &'a ModelBundle, kind: AttentionKind) -> Result<Self> {
        bundle.check_attention(kind)?;
        let mut enc = Self::new(&bundle.embeddings, kind);
        if let Some(tk) = kind.tag_kind() {
            enc.tags = bundle.tags(tk);
        }
        Ok(enc)
    }

    pub fn with_tags(mut self, tags: &'a TagTable) -> Self {
        self.tags = Some(tags);
        self
    }

    pub fn with_lm(mut self, lm: &'a KnModel) -> Self {
        self.lm = Some(lm);
        self
    }

    pub fn with_tfidf(mut self, index: &'a TfIdfIndex) -> Self {
        self.tfidf = Some(index);
        self
    }

    pub fn with_length_factor(mut self, on: bool) -> Self {
        self.length_factor = on;
        self
    }

    pub fn kind(&self) -> AttentionKind {
        self.kind
    }

    pub fn embeddings(&self) -> &'a EmbeddingTable {
        self.embeddings
    }

    /// Raw pre-softmax scores; `None` for uniform attention.
    pub fn scores(&self, sentence: &TaggedSentence) -> Result<Option<Vec<f64>>> {
        match self.kind {
            AttentionKind::Uniform => Ok(None),
            AttentionKind::Sur => {
                let raw = match self.lm {
                    Some(lm) => lm.surprisal(sentence),
                    None => sentence.surprisals().ok_or_else(|| {
                        Error::Config("surprisal attention needs a language model or pre-attached surprisals".into())
                    })?,
                };
                Ok(Some(raw.into_iter().map(clip_surprisal).collect()))
            }
            AttentionKind::Pos | AttentionKind::Ccg => {
                let tags = self
                    .tags
                    .ok_or_else(|| Error::Config(format!("attention `{}` requires a tag table", self.kind)))?;
                Ok(Some(tag_logits(sentence, self.embeddings, tags)?))
            }
            AttentionKind::TfIdf => {
                let index = self
                    .tfidf
                    .ok_or_else(|| Error::Config("tf-idf attention requires a tf-idf index".into()))?;
                Ok(Some(index.scores(sentence)))
            }
        }
    }

    pub fn weights(&self, sentence: &TaggedSentence) -> Result<AttentionWeights> {
        match self.scores(sentence)? {
            None => Ok(att_uniform(sentence)),
            Some(s) => AttentionWeights::from_scores(&s),
        }
    }

    pub fn encode(&self, sentence: &TaggedSentence) -> Result<Vec<f64>> {
        let w = self.weights(sentence)?;
        compose(sentence, &w, self.embeddings, self.length_factor)
    }
}
