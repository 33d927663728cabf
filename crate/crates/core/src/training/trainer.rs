//! Epoch loops for both objectives.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::attention::TfIdfIndex;
use crate::bundle::{AttentionKind, ModelBundle};
use crate::error::{Error, Result};
use crate::lm::KnModel;
use crate::sentence::{TagKind, TaggedSentence};
use crate::tables::{init_tag_table, EmbeddingTable, DEFAULT_DIM};
use crate::vocab::Vocabulary;

use super::model::{Gradients, Model};
use super::optim::{OptimizerConfig, OptimizerState};
use super::pp::{pp_loss_and_grad, PpBatch};
use super::scbow::{scbow_loss_and_grad, ScbowInstance};

pub const DEFAULT_SEED: u64 = 42;

// Distinct sub-streams derived from the user seed.
const STREAM_TAGS: u64 = 0x7461_6773;
const STREAM_WORDS: u64 = 0x776f_7264;

#[derive(Debug, Clone, PartialEq)]
pub struct ScbowConfig {
    pub attention: AttentionKind,
    pub epochs: usize,
    pub batch_size: usize,
    pub negatives: usize,
    pub optimizer: OptimizerConfig,
    pub seed: u64,
    pub length_factor: bool,
    /// Dimension for randomly initialized word vectors (no `--init`).
    pub dim: usize,
}

impl Default for ScbowConfig {
    fn default() -> Self {
        ScbowConfig {
            attention: AttentionKind::Uniform,
            epochs: 1,
            batch_size: 100,
            negatives: 2,
            optimizer: OptimizerConfig::adadelta(0.001),
            seed: DEFAULT_SEED,
            length_factor: true,
            dim: DEFAULT_DIM,
        }
    }
}

impl ScbowConfig {
    fn echo(&self) -> BTreeMap<String, String> {
        let mut c = BTreeMap::new();
        c.insert("objective".into(), "scbow".into());
        c.insert("attention".into(), self.attention.to_string());
        c.insert("epochs".into(), self.epochs.to_string());
        c.insert("batch".into(), self.batch_size.to_string());
        c.insert("neg".into(), self.negatives.to_string());
        c.insert("optimizer".into(), self.optimizer.kind.as_str().into());
        c.insert("lr".into(), self.optimizer.lr.to_string());
        c.insert("length_factor".into(), self.length_factor.to_string());
        c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PpConfig {
    pub attention: AttentionKind,
    pub epochs: usize,
    pub batch_size: usize,
    pub lambda: f64,
    pub optimizer: OptimizerConfig,
    /// Epochs of the second, attention-only phase (when attention pairs are given).
    pub attn_epochs: usize,
    pub attn_optimizer: OptimizerConfig,
    /// Keep word vectors fixed during the attention phase.
    pub freeze_words: bool,
    pub seed: u64,
    pub length_factor: bool,
    pub dim: usize,
}

impl Default for PpConfig {
    fn default() -> Self {
        PpConfig {
            attention: AttentionKind::Uniform,
            epochs: 10,
            batch_size: 100,
            lambda: 1e-5,
            optimizer: OptimizerConfig::adagrad(0.05),
            attn_epochs: 10,
            attn_optimizer: OptimizerConfig::adagrad(0.05),
            freeze_words: true,
            seed: DEFAULT_SEED,
            length_factor: true,
            dim: DEFAULT_DIM,
        }
    }
}

impl PpConfig {
    fn echo(&self) -> BTreeMap<String, String> {
        let mut c = BTreeMap::new();
        c.insert("objective".into(), "pp".into());
        c.insert("attention".into(), self.attention.to_string());
        c.insert("epochs".into(), self.epochs.to_string());
        c.insert("batch".into(), self.batch_size.to_string());
        c.insert("lambda".into(), self.lambda.to_string());
        c.insert("optimizer".into(), self.optimizer.kind.as_str().into());
        c.insert("lr".into(), self.optimizer.lr.to_string());
        c.insert("attn_epochs".into(), self.attn_epochs.to_string());
        c.insert("attn_lr".into(), self.attn_optimizer.lr.to_string());
        c.insert("freeze_words".into(), self.freeze_words.to_string());
        c.insert("length_factor".into(), self.length_factor.to_string());
        c
    }
}

/// Mean training loss of one epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLog {
    pub phase: &'static str,
    pub epoch: usize,
    pub mean_loss: f64,
}

/// Random word vectors for every word of `sentences`, drawn from
/// N(0, 1/dim) so rows are roughly unit length.
pub fn random_embeddings<'a, I>(sentences: I, dim: usize, seed: u64) -> Result<EmbeddingTable>
where
    I: IntoIterator<Item = &'a TaggedSentence>,
{
    if dim == 0 {
        return Err(Error::Config("dimension must be positive".into()));
    }
    let mut words: Vec<&str> = sentences.into_iter().flat_map(|s| s.words()).collect();
    words.sort_unstable();
    words.dedup();
    let vocab = Vocabulary::from_words(words);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ STREAM_WORDS);
    let normal = Normal::new(0.0, 1.0 / (dim as f64).sqrt()).expect("valid std");
    let data = (0..vocab.len() * dim).map(|_| normal.sample(&mut rng)).collect();
    let mut table = EmbeddingTable::new(vocab, dim, data)?;
    table.set_unk_to_mean();
    Ok(table)
}

fn tagset<'a, I>(sentences: I, kind: TagKind) -> Vec<String>
where
    I: IntoIterator<Item = &'a TaggedSentence>,
{
    let mut tags: Vec<&str> = sentences
        .into_iter()
        .flat_map(|s| s.tokens().iter().filter_map(move |t| t.tag(kind)))
        .collect();
    tags.sort_unstable();
    tags.dedup();
    tags.into_iter().map(str::to_owned).collect()
}

/// Optimizer state for both tables, updating only rows with a gradient.
struct Updater {
    words: OptimizerState,
    tags: Option<OptimizerState>,
    dim: usize,
}

impl Updater {
    fn new(config: OptimizerConfig, model: &Model) -> Self {
        Updater {
            words: OptimizerState::new(config, model.words.as_slice().len()),
            tags: model.tags.as_ref().map(|t| OptimizerState::new(config, t.as_slice().len())),
            dim: model.dim(),
        }
    }

    fn apply(&mut self, model: &mut Model, grads: &Gradients, train_words: bool, train_tags: bool) {
        let dim = self.dim;
        if train_words {
            for (row, g) in grads.words.iter() {
                self.words.step_range(row * dim, model.words.row_mut(row), g);
            }
        }
        if let (true, Some(state), Some(tags)) = (train_tags, self.tags.as_mut(), model.tags.as_mut()) {
            for (row, g) in grads.tags.iter() {
                state.step_range(row * dim, tags.row_mut(row), g);
            }
        }
    }
}

fn prepare_model(
    kind: AttentionKind,
    init: Option<EmbeddingTable>,
    sentences: &[&TaggedSentence],
    dim: usize,
    seed: u64,
    length_factor: bool,
) -> Result<Model> {
    let words = match init {
        Some(t) => t,
        None => random_embeddings(sentences.iter().copied(), dim, seed)?,
    };
    let mut model = Model::new(words, kind).with_length_factor(length_factor);
    if let Some(tk) = kind.tag_kind() {
        if tk == TagKind::Ccg && sentences.iter().any(|s| !s.has_ccg()) {
            return Err(Error::Config("ccg attention requires CCG tags on every training sentence".into()));
        }
        let tags = tagset(sentences.iter().copied(), tk);
        model.tags = Some(init_tag_table(tk, &tags, model.dim(), seed ^ STREAM_TAGS)?);
    }
    if kind == AttentionKind::TfIdf {
        model.tfidf = Some(TfIdfIndex::build(sentences.iter().copied())?);
    }
    Ok(model)
}

fn attach_surprisal(sentences: &mut [TaggedSentence], lm: Option<&KnModel>) -> Result<()> {
    match lm {
        Some(lm) => sentences.iter_mut().for_each(|s| lm.attach_surprisal(s)),
        None => {
            if sentences.iter().any(|s| s.surprisals().is_none()) {
                return Err(Error::Config(
                    "surprisal attention needs a language model or pre-attached surprisals".into(),
                ));
            }
        }
    }
    Ok(())
}

fn into_bundle(model: Model, seed: u64, config: BTreeMap<String, String>) -> ModelBundle {
    let kind = model.kind;
    let mut bundle = ModelBundle::new(model.words, kind, seed);
    if let Some(t) = model.tags {
        match t.kind() {
            TagKind::Pos => bundle.pos_tags = Some(t),
            TagKind::Ccg => bundle.ccg_tags = Some(t),
        }
    }
    bundle.config = config;
    bundle
}

/// Trains word vectors (and tag vectors for tag attention) on documents of
/// consecutive sentences. Each sentence with at least one neighbour in its
/// document is a center; its neighbours are the positives and
/// `config.negatives` sentences drawn without replacement from elsewhere in
/// the corpus are the negatives.
pub fn train_scbow(
    documents: &[Vec<TaggedSentence>],
    init: Option<EmbeddingTable>,
    lm: Option<&KnModel>,
    config: &ScbowConfig,
) -> Result<(ModelBundle, Vec<EpochLog>)> {
    if config.batch_size == 0 {
        return Err(Error::Config("batch size must be positive".into()));
    }
    if config.negatives == 0 {
        return Err(Error::Config("at least one negative example is required".into()));
    }
    let mut sentences: Vec<TaggedSentence> = documents.iter().flatten().cloned().collect();
    if config.attention == AttentionKind::Sur {
        attach_surprisal(&mut sentences, lm)?;
    }

    // (index of first sentence, length) of every document
    let mut centers: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut offset = 0;
    for doc in documents {
        for i in 0..doc.len() {
            let mut pos = Vec::with_capacity(2);
            if i > 0 {
                pos.push(offset + i - 1);
            }
            if i + 1 < doc.len() {
                pos.push(offset + i + 1);
            }
            if !pos.is_empty() {
                centers.push((offset + i, pos));
            }
        }
        offset += doc.len();
    }
    if centers.is_empty() {
        return Err(Error::Config("corpus has no sentence with an adjacent sentence".into()));
    }
    if sentences.len() < 3 + config.negatives {
        return Err(Error::Config(format!(
            "corpus of {} sentences is too small for {} negatives per instance",
            sentences.len(),
            config.negatives
        )));
    }

    let refs: Vec<&TaggedSentence> = sentences.iter().collect();
    let mut model = prepare_model(config.attention, init, &refs, config.dim, config.seed, config.length_factor)?;
    let train_tags = model.tags.is_some();
    let mut updater = Updater::new(config.optimizer, &model);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut log = Vec::with_capacity(config.epochs);
    let mut order: Vec<usize> = (0..centers.len()).collect();

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let mut batch_grads = Gradients::new(model.dim());
            for &ci in chunk {
                let (center, positives) = &centers[ci];
                let mut negatives: Vec<usize> = Vec::with_capacity(config.negatives);
                while negatives.len() < config.negatives {
                    let j = rng.random_range(0..sentences.len());
                    if j != *center && !positives.contains(&j) && !negatives.contains(&j) {
                        negatives.push(j);
                    }
                }
                let pos: Vec<&TaggedSentence> = positives.iter().map(|&j| &sentences[j]).collect();
                let neg: Vec<&TaggedSentence> = negatives.iter().map(|&j| &sentences[j]).collect();
                let instance = ScbowInstance {
                    center: &sentences[*center],
                    positives: &pos,
                    negatives: &neg,
                };
                let (loss, g) = scbow_loss_and_grad(&instance, &model)?;
                total += loss;
                merge(&mut batch_grads, &g);
            }
            batch_grads.scale(1.0 / chunk.len() as f64);
            updater.apply(&mut model, &batch_grads, true, train_tags);
        }
        log.push(EpochLog {
            phase: "scbow",
            epoch,
            mean_loss: total / centers.len() as f64,
        });
    }

    let mut echo = config.echo();
    echo.insert("dim".into(), model.dim().to_string());
    Ok((into_bundle(model, config.seed, echo), log))
}

fn merge(acc: &mut Gradients, g: &Gradients) {
    for (row, v) in g.words.iter() {
        acc.words.add(row, 1.0, v);
    }
    for (row, v) in g.tags.iter() {
        acc.tags.add(row, 1.0, v);
    }
}

/// Splits `n` shuffled items into batches of `size`, folding a trailing
/// single-pair batch into its predecessor (mining needs two pairs).
fn batches(order: &[usize], size: usize) -> Vec<&[usize]> {
    let size = size.max(2);
    let mut out: Vec<&[usize]> = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = (start + size).min(order.len());
        if order.len() - end == 1 {
            end = order.len();
        }
        out.push(&order[start..end]);
        start = end;
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn pp_phase(
    phase: &'static str,
    model: &mut Model,
    pairs: &[(TaggedSentence, TaggedSentence)],
    initial: &EmbeddingTable,
    epochs: usize,
    batch_size: usize,
    lambda: f64,
    optimizer: OptimizerConfig,
    train_words: bool,
    train_tags: bool,
    rng: &mut ChaCha8Rng,
    log: &mut Vec<EpochLog>,
) -> Result<()> {
    let mut updater = Updater::new(optimizer, model);
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    for epoch in 1..=epochs {
        order.shuffle(rng);
        let mut total = 0.0;
        let mut nbatches = 0usize;
        for chunk in batches(&order, batch_size) {
            let batch_pairs: Vec<(TaggedSentence, TaggedSentence)> = chunk.iter().map(|&i| pairs[i].clone()).collect();
            let batch = PpBatch::mine(&batch_pairs, model, lambda, initial)?;
            let (loss, grads) = pp_loss_and_grad(&batch, model)?;
            total += loss;
            nbatches += 1;
            updater.apply(model, &grads, train_words, train_tags);
        }
        log.push(EpochLog {
            phase,
            epoch,
            mean_loss: total / nbatches.max(1) as f64,
        });
    }
    Ok(())
}

/// Trains on paraphrase pairs, then optionally on a second set of sentence
/// pairs where only the attention parameters (and, unless frozen, the word
/// vectors) are updated.
///
/// Without `attn_pairs`, tag vectors for tag attention are trained jointly
/// with the words in the first phase.
pub fn train_pp(
    pairs: &[(TaggedSentence, TaggedSentence)],
    attn_pairs: Option<&[(TaggedSentence, TaggedSentence)]>,
    init: Option<EmbeddingTable>,
    lm: Option<&KnModel>,
    config: &PpConfig,
) -> Result<(ModelBundle, Vec<EpochLog>)> {
    if pairs.len() < 2 {
        return Err(Error::Config("paraphrase training needs at least two pairs".into()));
    }
    if attn_pairs.is_some_and(|p| p.len() < 2) {
        return Err(Error::Config("attention training needs at least two pairs".into()));
    }
    if config.batch_size < 2 {
        return Err(Error::Config("batch size must be at least 2 for negative mining".into()));
    }
    let mut pairs = pairs.to_vec();
    let mut attn_pairs = attn_pairs.map(<[_]>::to_vec);
    if config.attention == AttentionKind::Sur {
        for set in std::iter::once(&mut pairs).chain(attn_pairs.as_mut()) {
            let mut flat: Vec<TaggedSentence> = set.iter().flat_map(|(a, b)| [a.clone(), b.clone()]).collect();
            attach_surprisal(&mut flat, lm)?;
            for (i, p) in set.iter_mut().enumerate() {
                *p = (flat[2 * i].clone(), flat[2 * i + 1].clone());
            }
        }
    }

    let all: Vec<&TaggedSentence> = pairs
        .iter()
        .chain(attn_pairs.iter().flatten())
        .flat_map(|(a, b)| [a, b])
        .collect();
    let mut model = prepare_model(config.attention, init, &all, config.dim, config.seed, config.length_factor)?;
    let initial = model.words.clone();
    let has_tags = model.tags.is_some();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut log = Vec::new();

    pp_phase(
        "words",
        &mut model,
        &pairs,
        &initial,
        config.epochs,
        config.batch_size,
        config.lambda,
        config.optimizer,
        true,
        has_tags && attn_pairs.is_none(),
        &mut rng,
        &mut log,
    )?;
    if let Some(ap) = &attn_pairs {
        pp_phase(
            "attention",
            &mut model,
            ap,
            &initial,
            config.attn_epochs,
            config.batch_size,
            config.lambda,
            config.attn_optimizer,
            !config.freeze_words,
            has_tags,
            &mut rng,
            &mut log,
        )?;
    }

    let mut echo = config.echo();
    echo.insert("dim".into(), model.dim().to_string());
    echo.insert("attn_phase".into(), attn_pairs.is_some().to_string());
    Ok((into_bundle(model, config.seed, echo), log))
}
