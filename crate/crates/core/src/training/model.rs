//! Trainable parameters and backpropagation through attention + composition.

use std::collections::BTreeMap;

use crate::attention::{SentenceEncoder, TfIdfIndex};
use crate::bundle::{AttentionKind, ModelBundle};
use crate::error::{Error, Result};
use crate::lm::clip_surprisal;
use crate::sentence::TaggedSentence;
use crate::tables::{EmbeddingTable, TagTable};
use crate::vector::{axpy, dot_unchecked, softmax};

/// Word vectors plus the tag table used by tag-based attention.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub words: EmbeddingTable,
    pub tags: Option<TagTable>,
    pub kind: AttentionKind,
    pub length_factor: bool,
    pub tfidf: Option<TfIdfIndex>,
}

impl Model {
    pub fn new(words: EmbeddingTable, kind: AttentionKind) -> Self {
        Model {
            words,
            tags: None,
            kind,
            length_factor: true,
            tfidf: None,
        }
    }

    pub fn with_tags(mut self, tags: TagTable) -> Self {
        self.tags = Some(tags);
        self
    }

    pub fn with_tfidf(mut self, index: TfIdfIndex) -> Self {
        self.tfidf = Some(index);
        self
    }

    pub fn with_length_factor(mut self, on: bool) -> Self {
        self.length_factor = on;
        self
    }

    pub fn from_bundle(bundle: &ModelBundle, kind: AttentionKind) -> Result<Self> {
        bundle.check_attention(kind)?;
        let mut m = Model::new(bundle.embeddings.clone(), kind);
        m.tags = kind.tag_kind().and_then(|k| bundle.tags(k).cloned());
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.words.dim()
    }

    /// Encoder view for inference; surprisal must be pre-attached for
    /// surprisal attention.
    pub fn encoder(&self) -> SentenceEncoder<'_> {
        let mut enc = SentenceEncoder::new(&self.words, self.kind).with_length_factor(self.length_factor);
        if let Some(t) = &self.tags {
            enc = enc.with_tags(t);
        }
        if let Some(i) = &self.tfidf {
            enc = enc.with_tfidf(i);
        }
        enc
    }

    pub fn forward(&self, sentence: &TaggedSentence) -> Result<SentenceForward> {
        let n = sentence.len();
        let ids: Vec<usize> = sentence.words().map(|w| self.words.id(w)).collect();
        let mut tag_ids = None;
        let weights = match self.kind {
            AttentionKind::Uniform => vec![1.0 / n as f64; n],
            AttentionKind::Sur => {
                let s = sentence.surprisals().ok_or_else(|| {
                    Error::Config("surprisal attention needs surprisal attached to every token".into())
                })?;
                softmax(&s.into_iter().map(clip_surprisal).collect::<Vec<_>>())
            }
            AttentionKind::TfIdf => {
                let index = self
                    .tfidf
                    .as_ref()
                    .ok_or_else(|| Error::Config("tf-idf attention requires a tf-idf index".into()))?;
                softmax(&index.scores(sentence))
            }
            AttentionKind::Pos | AttentionKind::Ccg => {
                let tags = self
                    .tags
                    .as_ref()
                    .ok_or_else(|| Error::Config(format!("attention `{}` requires a tag table", self.kind)))?;
                if tags.dim() != self.dim() {
                    return Err(Error::Dimension {
                        expected: self.dim(),
                        got: tags.dim(),
                    });
                }
                let kind = tags.kind();
                let t: Vec<usize> = sentence.tokens().iter().map(|tok| tags.id_or_unk(tok.tag(kind))).collect();
                let logits: Vec<f64> = ids
                    .iter()
                    .zip(&t)
                    .map(|(&w, &c)| dot_unchecked(self.words.row(w), tags.row(c)))
                    .collect();
                tag_ids = Some(t);
                softmax(&logits)
            }
        };
        let scale = if self.length_factor { 1.0 / n as f64 } else { 1.0 };
        let mut vector = vec![0.0; self.dim()];
        for (&id, &a) in ids.iter().zip(&weights) {
            axpy(scale * a, self.words.row(id), &mut vector);
        }
        Ok(SentenceForward {
            ids,
            tag_ids,
            weights,
            scale,
            vector,
        })
    }

    /// Accumulates parameter gradients given `d_vector = ∂L/∂g` for a
    /// sentence vector `g` produced by [`Model::forward`].
    pub fn backward(&self, fwd: &SentenceForward, d_vector: &[f64], grads: &mut Gradients) {
        for (&id, &a) in fwd.ids.iter().zip(&fwd.weights) {
            grads.words.add(id, fwd.scale * a, d_vector);
        }
        let (Some(tag_ids), Some(tags)) = (&fwd.tag_ids, &self.tags) else {
            return;
        };
        // ∂L/∂a_t = scale · e_t·dg ; softmax: ∂L/∂z_t = a_t (∂L/∂a_t − Σ_s a_s ∂L/∂a_s)
        let d_weight: Vec<f64> = fwd
            .ids
            .iter()
            .map(|&id| fwd.scale * dot_unchecked(self.words.row(id), d_vector))
            .collect();
        let mean: f64 = d_weight.iter().zip(&fwd.weights).map(|(d, a)| d * a).sum();
        for t in 0..fwd.ids.len() {
            let d_logit = fwd.weights[t] * (d_weight[t] - mean);
            if d_logit == 0.0 {
                continue;
            }
            let (w, c) = (fwd.ids[t], tag_ids[t]);
            grads.words.add(w, d_logit, tags.row(c));
            grads.tags.add(c, d_logit, self.words.row(w));
        }
    }
}

/// Cached forward pass of one sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceForward {
    pub ids: Vec<usize>,
    pub tag_ids: Option<Vec<usize>>,
    pub weights: Vec<f64>,
    pub scale: f64,
    pub vector: Vec<f64>,
}

/// Sparse per-row gradient of a table. Rows are kept ordered so that
/// accumulation and application are deterministic.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RowGrads {
    dim: usize,
    rows: BTreeMap<usize, Vec<f64>>,
}

impl RowGrads {
    pub fn new(dim: usize) -> Self {
        RowGrads {
            dim,
            rows: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, row: usize, alpha: f64, v: &[f64]) {
        let dim = self.dim;
        let entry = self.rows.entry(row).or_insert_with(|| vec![0.0; dim]);
        axpy(alpha, v, entry);
    }

    pub fn get(&self, row: usize) -> Option<&[f64]> {
        self.rows.get(&row).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.rows.iter().map(|(&r, v)| (r, v.as_slice()))
    }

    pub fn scale(&mut self, f: f64) {
        for v in self.rows.values_mut().flatten() {
            *v *= f;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Dense gradient over `rows` rows.
    pub fn to_dense(&self, rows: usize) -> Vec<f64> {
        let mut out = vec![0.0; rows * self.dim];
        for (&r, v) in &self.rows {
            out[r * self.dim..(r + 1) * self.dim].copy_from_slice(v);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Gradients {
    pub words: RowGrads,
    pub tags: RowGrads,
}

impl Gradients {
    pub fn new(dim: usize) -> Self {
        Gradients {
            words: RowGrads::new(dim),
            tags: RowGrads::new(dim),
        }
    }

    pub fn scale(&mut self, f: f64) {
        self.words.scale(f);
        self.tags.scale(f);
    }
}
