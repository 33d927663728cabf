//! Paraphrase max-margin objective with in-batch hard negatives and an L2
//! anchor to the initial word vectors.
//!
//! Phrases of a batch are indexed `2i` (first phrase of pair `i`) and
//! `2i + 1` (second phrase).

use crate::error::{Error, Result};
use crate::sentence::TaggedSentence;
use crate::tables::EmbeddingTable;
use crate::vector::{axpy, dot_unchecked};

use super::model::{Gradients, Model};

/// Hard negatives for one pair, as batch phrase indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MinedNegatives {
    /// Negative for the first phrase.
    pub t1: usize,
    /// Negative for the second phrase.
    pub t2: usize,
}

/// A mini-batch with its mined negatives.
#[derive(Debug, Clone)]
pub struct PpBatch<'a> {
    pub pairs: &'a [(TaggedSentence, TaggedSentence)],
    pub negatives: Vec<MinedNegatives>,
    pub lambda: f64,
    /// Word vectors at the start of training.
    pub initial: &'a EmbeddingTable,
}

impl<'a> PpBatch<'a> {
    /// Mines negatives under the current `model` and packages the batch.
    pub fn mine(
        pairs: &'a [(TaggedSentence, TaggedSentence)],
        model: &Model,
        lambda: f64,
        initial: &'a EmbeddingTable,
    ) -> Result<Self> {
        let negatives = mine_negatives(pairs, model)?;
        Ok(PpBatch {
            pairs,
            negatives,
            lambda,
            initial,
        })
    }

    fn phrase(&self, idx: usize) -> &TaggedSentence {
        let (a, b) = &self.pairs[idx / 2];
        if idx.is_multiple_of(2) {
            a
        } else {
            b
        }
    }
}

fn argmax_excluding(vectors: &[Vec<f64>], query: usize, exclude: [usize; 2]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (p, v) in vectors.iter().enumerate() {
        if exclude.contains(&p) {
            continue;
        }
        let score = dot_unchecked(&vectors[query], v);
        // strict comparison keeps the lowest index on ties
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((p, score));
        }
    }
    best.map(|(p, _)| p)
}

/// Hard-negative selection over phrase vectors laid out as
/// `[x1_0, x2_0, x1_1, x2_1, ...]`: for each pair, the phrase from another
/// pair with the largest dot product. Ties go to the lowest index.
pub fn mine_negatives_from_vectors(vectors: &[Vec<f64>]) -> Result<Vec<MinedNegatives>> {
    if !vectors.len().is_multiple_of(2) {
        return Err(Error::Mining("phrase vectors must come in pairs".into()));
    }
    if vectors.len() < 4 {
        return Err(Error::Mining("negative mining needs a batch of at least two pairs".into()));
    }
    Ok((0..vectors.len() / 2)
        .map(|i| {
            let own = [2 * i, 2 * i + 1];
            MinedNegatives {
                t1: argmax_excluding(vectors, 2 * i, own).expect("batch has other pairs"),
                t2: argmax_excluding(vectors, 2 * i + 1, own).expect("batch has other pairs"),
            }
        })
        .collect())
}

pub fn mine_negatives(pairs: &[(TaggedSentence, TaggedSentence)], model: &Model) -> Result<Vec<MinedNegatives>> {
    if pairs.len() < 2 {
        return Err(Error::Mining("negative mining needs a batch of at least two pairs".into()));
    }
    let mut vectors = Vec::with_capacity(pairs.len() * 2);
    for (a, b) in pairs {
        vectors.push(model.forward(a)?.vector);
        vectors.push(model.forward(b)?.vector);
    }
    mine_negatives_from_vectors(&vectors)
}

fn regularizer(model: &Model, initial: &EmbeddingTable) -> Result<f64> {
    if initial.as_slice().len() != model.words.as_slice().len() {
        return Err(Error::Dimension {
            expected: model.words.as_slice().len(),
            got: initial.as_slice().len(),
        });
    }
    Ok(model
        .words
        .as_slice()
        .iter()
        .zip(initial.as_slice())
        .map(|(w, w0)| (w - w0) * (w - w0))
        .sum())
}

fn hinge(x: f64) -> f64 {
    x.max(0.0)
}

pub fn pp_loss(batch: &PpBatch<'_>, model: &Model) -> Result<f64> {
    Ok(pp_loss_and_grad_impl(batch, model, false)?.0)
}

/// Loss and gradient. A hinge contributes gradient only when its argument
/// is strictly positive.
pub fn pp_loss_and_grad(batch: &PpBatch<'_>, model: &Model) -> Result<(f64, Gradients)> {
    pp_loss_and_grad_impl(batch, model, true)
}

fn pp_loss_and_grad_impl(batch: &PpBatch<'_>, model: &Model, with_grad: bool) -> Result<(f64, Gradients)> {
    if batch.negatives.len() != batch.pairs.len() {
        return Err(Error::Mining("one set of negatives per pair is required".into()));
    }
    let fwd = (0..batch.pairs.len() * 2)
        .map(|i| model.forward(batch.phrase(i)))
        .collect::<Result<Vec<_>>>()?;
    let dim = model.dim();
    let inv = 1.0 / batch.pairs.len() as f64;
    let mut loss = 0.0;
    let mut d_vec = vec![vec![0.0; dim]; fwd.len()];

    for (i, neg) in batch.negatives.iter().enumerate() {
        let (x1, x2) = (2 * i, 2 * i + 1);
        let g1 = &fwd[x1].vector;
        let g2 = &fwd[x2].vector;
        let pos = dot_unchecked(g1, g2);
        let a1 = 1.0 - pos + dot_unchecked(g1, &fwd[neg.t1].vector);
        let a2 = 1.0 - pos + dot_unchecked(g2, &fwd[neg.t2].vector);
        loss += inv * (hinge(a1) + hinge(a2));
        if !with_grad {
            continue;
        }
        if a1 > 0.0 {
            // ∂/∂g1 = g_t1 − g2, ∂/∂g2 = −g1, ∂/∂g_t1 = g1
            axpy(inv, &fwd[neg.t1].vector, &mut d_vec[x1]);
            axpy(-inv, g2, &mut d_vec[x1]);
            axpy(-inv, g1, &mut d_vec[x2]);
            axpy(inv, g1, &mut d_vec[neg.t1]);
        }
        if a2 > 0.0 {
            axpy(inv, &fwd[neg.t2].vector, &mut d_vec[x2]);
            axpy(-inv, g1, &mut d_vec[x2]);
            axpy(-inv, g2, &mut d_vec[x1]);
            axpy(inv, g2, &mut d_vec[neg.t2]);
        }
    }

    let mut grads = Gradients::new(dim);
    if batch.lambda != 0.0 {
        loss += batch.lambda * regularizer(model, batch.initial)?;
    }
    if with_grad {
        for (f, d) in fwd.iter().zip(&d_vec) {
            if d.iter().any(|&v| v != 0.0) {
                model.backward(f, d, &mut grads);
            }
        }
        if batch.lambda != 0.0 {
            add_regularizer_grad(model, batch.initial, batch.lambda, &mut grads);
        }
    }
    Ok((loss, grads))
}

/// `∂/∂W λ‖W₀ − W‖² = 2λ(W − W₀)`, added for every row that has moved.
pub fn add_regularizer_grad(model: &Model, initial: &EmbeddingTable, lambda: f64, grads: &mut Gradients) {
    let mut diff = vec![0.0; model.dim()];
    for id in 0..model.words.len() {
        let w = model.words.row(id);
        let w0 = initial.row(id);
        if w == w0 {
            continue;
        }
        for ((d, a), b) in diff.iter_mut().zip(w).zip(w0) {
            *d = a - b;
        }
        grads.words.add(id, 2.0 * lambda, &diff);
    }
}
