//! Interpolated modified Kneser-Ney n-gram language model and per-token
//! surprisal.
//!
//! Sentences are padded with `order - 1` begin markers and one end marker.
//! The highest order uses raw counts; every lower order uses continuation
//! counts (the number of distinct left extensions of an n-gram type). The
//! unigram level interpolates with a uniform distribution over the
//! predictable vocabulary (everything except `<s>`), so every in-vocabulary
//! word has non-zero probability.

mod serialize;

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::sentence::TaggedSentence;
use crate::vocab::Vocabulary;

pub const DEFAULT_ORDER: usize = 5;
pub const SURPRISAL_FLOOR: f64 = 0.0;
pub const SURPRISAL_CEILING: f64 = 10.0;

/// Clamps a surprisal value into `[0, 10]`.
pub fn clip_surprisal(s: f64) -> f64 {
    s.clamp(SURPRISAL_FLOOR, SURPRISAL_CEILING)
}

type Gram = Vec<u32>;

/// Count-dependent discounts for one order: `d1` for n-grams seen once,
/// `d2` for twice, `d3` for three or more times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discounts {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl Discounts {
    pub fn uniform(d: f64) -> Self {
        Discounts { d1: d, d2: d, d3: d }
    }

    fn for_count(&self, c: u64) -> f64 {
        match c {
            0 => 0.0,
            1 => self.d1,
            2 => self.d2,
            _ => self.d3,
        }
    }

    /// Estimates discounts from the count-of-counts `n[k]` = number of
    /// n-grams seen exactly `k + 1` times.
    ///
    /// Falls back to a single discount `n1 / (n1 + 2 n2)` when the modified
    /// estimates are undefined or fall outside `[0, k]`, and to `0.5` when
    /// that too is undefined.
    pub fn estimate(n: [u64; 4]) -> Self {
        let [n1, n2, n3, n4] = n.map(|x| x as f64);
        if n.iter().all(|&x| x > 0) {
            let y = n1 / (n1 + 2.0 * n2);
            let d = Discounts {
                d1: 1.0 - 2.0 * y * n2 / n1,
                d2: 2.0 - 3.0 * y * n3 / n2,
                d3: 3.0 - 4.0 * y * n4 / n3,
            };
            let in_range = (0.0..=1.0).contains(&d.d1)
                && (0.0..=2.0).contains(&d.d2)
                && (0.0..=3.0).contains(&d.d3);
            if in_range {
                return d;
            }
        }
        if n[0] > 0 && n[1] > 0 {
            Discounts::uniform(n1 / (n1 + 2.0 * n2))
        } else {
            Discounts::uniform(0.5)
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct ContextStats {
    total: u64,
    n1: u64,
    n2: u64,
    n3p: u64,
}

impl ContextStats {
    fn add(&mut self, c: u64) {
        self.total += c;
        match c {
            1 => self.n1 += 1,
            2 => self.n2 += 1,
            _ => self.n3p += 1,
        }
    }

    fn backoff_weight(&self, d: &Discounts) -> f64 {
        (d.d1 * self.n1 as f64 + d.d2 * self.n2 as f64 + d.d3 * self.n3p as f64) / self.total as f64
    }
}

/// Order-n modified Kneser-Ney model over a fixed vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct KnModel {
    order: usize,
    min_count: u64,
    vocab: Vocabulary,
    /// `counts[k - 1]`: k-gram → count (raw at the top order, continuation below).
    counts: Vec<HashMap<Gram, u64>>,
    discounts: Vec<Discounts>,
    /// `contexts[k - 1]`: (k-1)-gram context → statistics over its k-gram extensions.
    contexts: Vec<HashMap<Gram, ContextStats>>,
}

impl KnModel {
    /// Builds a model from word sequences.
    pub fn build<S: AsRef<str>>(corpus: &[Vec<S>], order: usize, min_count: u64) -> Result<Self> {
        if order == 0 {
            return Err(Error::Config("language model order must be at least 1".into()));
        }
        if corpus.iter().all(|s| s.is_empty()) {
            return Err(Error::Build("cannot build a language model from an empty corpus".into()));
        }

        let mut freq: HashMap<&str, u64> = HashMap::new();
        for w in corpus.iter().flatten() {
            *freq.entry(w.as_ref()).or_default() += 1;
        }
        let mut kept: Vec<&str> = freq
            .iter()
            .filter(|(w, &c)| c >= min_count.max(1) && !Vocabulary::is_special_word(w))
            .map(|(w, _)| *w)
            .collect();
        kept.sort_unstable();
        let vocab = Vocabulary::from_words(kept);

        let mut top: HashMap<Gram, u64> = HashMap::new();
        let mut padded: Vec<u32> = Vec::new();
        for sentence in corpus.iter().filter(|s| !s.is_empty()) {
            padded.clear();
            padded.extend(std::iter::repeat_n(Vocabulary::BOS_ID as u32, order - 1));
            padded.extend(sentence.iter().map(|w| vocab.id_or_unk(w.as_ref()) as u32));
            padded.push(Vocabulary::EOS_ID as u32);
            for end in order..=padded.len() {
                *top.entry(padded[end - order..end].to_vec()).or_default() += 1;
            }
        }

        let mut counts = vec![HashMap::new(); order];
        counts[order - 1] = top;
        for k in (1..order).rev() {
            let mut lower: HashMap<Gram, u64> = HashMap::new();
            for gram in counts[k].keys() {
                *lower.entry(gram[1..].to_vec()).or_default() += 1;
            }
            counts[k - 1] = lower;
        }

        let discounts = counts
            .iter()
            .map(|table| {
                let mut n = [0u64; 4];
                for &c in table.values() {
                    if (1..=4).contains(&c) {
                        n[c as usize - 1] += 1;
                    }
                }
                Discounts::estimate(n)
            })
            .collect();

        Ok(Self::assemble(order, min_count, vocab, counts, discounts))
    }

    pub fn build_tagged(corpus: &[TaggedSentence], order: usize, min_count: u64) -> Result<Self> {
        let words: Vec<Vec<&str>> = corpus.iter().map(|s| s.words().collect()).collect();
        Self::build(&words, order, min_count)
    }

    fn assemble(
        order: usize,
        min_count: u64,
        vocab: Vocabulary,
        counts: Vec<HashMap<Gram, u64>>,
        discounts: Vec<Discounts>,
    ) -> Self {
        let contexts = counts
            .iter()
            .map(|table| {
                let mut ctx: HashMap<Gram, ContextStats> = HashMap::new();
                for (gram, &c) in table {
                    ctx.entry(gram[..gram.len() - 1].to_vec()).or_default().add(c);
                }
                ctx
            })
            .collect();
        KnModel {
            order,
            min_count,
            vocab,
            counts,
            discounts,
            contexts,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Discounts used at n-gram order `level` (1-based).
    pub fn discounts(&self, level: usize) -> Discounts {
        self.discounts[level - 1]
    }

    /// Size of the predictable vocabulary (everything except `<s>`).
    pub fn predictable_len(&self) -> usize {
        self.vocab.len() - 1
    }

    /// Words the model can assign probability to, i.e. all but `<s>`.
    pub fn predictable_words(&self) -> impl Iterator<Item = &str> {
        self.vocab
            .words()
            .iter()
            .enumerate()
            .filter(|(id, _)| *id != Vocabulary::BOS_ID)
            .map(|(_, w)| w.as_str())
    }

    fn ids<S: AsRef<str>>(&self, words: &[S]) -> Vec<u32> {
        words.iter().map(|w| self.word_id(w.as_ref())).collect()
    }

    fn word_id(&self, w: &str) -> u32 {
        self.vocab.id_or_unk(w) as u32
    }

    /// Stored count of an n-gram at order `gram.len()`: raw at the top order,
    /// continuation count below. `None` when unseen or longer than the order.
    pub fn ngram_count<S: AsRef<str>>(&self, gram: &[S]) -> Option<u64> {
        if gram.is_empty() || gram.len() > self.order {
            return None;
        }
        self.counts[gram.len() - 1].get(&self.ids(gram)).copied()
    }

    /// All n-grams stored at order `level` with their counts.
    pub fn ngrams(&self, level: usize) -> impl Iterator<Item = (Vec<&str>, u64)> {
        self.counts[level - 1].iter().map(|(g, &c)| {
            let words = g
                .iter()
                .map(|&id| self.vocab.word(id as usize).expect("id in vocab"))
                .collect();
            (words, c)
        })
    }

    /// Contexts observed at order `level`, as word sequences of length `level - 1`.
    pub fn observed_contexts(&self, level: usize) -> Vec<Vec<&str>> {
        let mut out: Vec<Vec<&str>> = self.contexts[level - 1]
            .keys()
            .map(|g| {
                g.iter()
                    .map(|&id| self.vocab.word(id as usize).expect("id in vocab"))
                    .collect()
            })
            .collect();
        out.sort();
        out
    }

    /// `P(word | context)`. Only the rightmost `order - 1` context words are
    /// used; a shorter context selects the correspondingly lower order.
    /// Out-of-vocabulary words map to `<unk>`.
    pub fn prob<S: AsRef<str>>(&self, word: &str, context: &[S]) -> f64 {
        let keep = context.len().min(self.order - 1);
        let ctx = self.ids(&context[context.len() - keep..]);
        self.prob_ids(self.word_id(word), &ctx)
    }

    fn prob_ids(&self, w: u32, ctx: &[u32]) -> f64 {
        let level = ctx.len() + 1;
        let d = &self.discounts[level - 1];
        let lower = if level == 1 {
            1.0 / self.predictable_len() as f64
        } else {
            self.prob_ids(w, &ctx[1..])
        };
        let Some(stats) = self.contexts[level - 1].get(ctx) else {
            return lower;
        };
        let mut gram = Vec::with_capacity(level);
        gram.extend_from_slice(ctx);
        gram.push(w);
        let c = self.counts[level - 1].get(&gram).copied().unwrap_or(0);
        let direct = (c as f64 - d.for_count(c)).max(0.0) / stats.total as f64;
        direct + stats.backoff_weight(d) * lower
    }

    /// Unclipped surprisal `-ln P(x_t | x_<t)` of every token, with begin-marker
    /// padding. The end marker is not scored.
    pub fn surprisal_words<S: AsRef<str>>(&self, words: &[S]) -> Vec<f64> {
        let mut history: Vec<u32> = vec![Vocabulary::BOS_ID as u32; self.order - 1];
        let mut out = Vec::with_capacity(words.len());
        for w in words {
            let id = self.word_id(w.as_ref());
            let ctx = &history[history.len() - (self.order - 1)..];
            out.push(-self.prob_ids(id, ctx).ln());
            history.push(id);
        }
        out
    }

    pub fn surprisal(&self, sentence: &TaggedSentence) -> Vec<f64> {
        let words: Vec<&str> = sentence.words().collect();
        self.surprisal_words(&words)
    }

    /// Stores clipped surprisal on every token of `sentence`.
    pub fn attach_surprisal(&self, sentence: &mut TaggedSentence) {
        let s = self.surprisal(sentence);
        for (tok, v) in sentence.tokens_mut().iter_mut().zip(s) {
            tok.surprisal = Some(clip_surprisal(v));
        }
    }
}
