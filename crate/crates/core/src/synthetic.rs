//! Seeded topic corpora for experiments without licensed data.
//!
//! Content words (NN, VB, JJ) of a topic share a topic direction in the
//! initial embeddings; function words (DT, IN) are drawn independently of
//! any topic. Sentences in one document all come from the same topic.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::eval::StsExample;
use crate::sentence::{TaggedSentence, TaggedToken};
use crate::tables::EmbeddingTable;

pub const CONTENT_TAGS: [&str; 3] = ["NN", "VB", "JJ"];
pub const FUNCTION_TAGS: [&str; 2] = ["DT", "IN"];

const DETERMINERS: [&str; 4] = ["a", "the", "an", "this"];
const PREPOSITIONS: [&str; 4] = ["with", "of", "in", "on"];

struct Lexicon {
    nouns: &'static [&'static str],
    verbs: &'static [&'static str],
    adjectives: &'static [&'static str],
}

const LEXICONS: [Lexicon; 5] = [
    Lexicon {
        nouns: &["man", "woman", "hat", "child", "dancer", "shirt"],
        verbs: &["is", "dancing", "wearing", "smiling"],
        adjectives: &["hard", "young", "tall", "red"],
    },
    Lexicon {
        nouns: &["dog", "cat", "bird", "horse", "tail", "fur"],
        verbs: &["running", "barking", "eating", "sleeping"],
        adjectives: &["small", "brown", "furry", "wild"],
    },
    Lexicon {
        nouns: &["bread", "soup", "apple", "cheese", "plate", "cook"],
        verbs: &["cooking", "slicing", "baking", "serving"],
        adjectives: &["hot", "fresh", "sweet", "salty"],
    },
    Lexicon {
        nouns: &["ball", "team", "goal", "player", "field", "coach"],
        verbs: &["kicking", "throwing", "scoring", "winning"],
        adjectives: &["fast", "strong", "quick", "tired"],
    },
    Lexicon {
        nouns: &["guitar", "song", "drum", "singer", "band", "piano"],
        verbs: &["playing", "singing", "strumming", "practicing"],
        adjectives: &["loud", "soft", "slow", "happy"],
    },
];

const TEMPLATES: [&[&str]; 5] = [
    &["DT", "JJ", "NN", "VB", "IN", "DT", "NN"],
    &["DT", "NN", "IN", "DT", "NN", "VB"],
    &["DT", "NN", "VB", "DT", "JJ", "NN"],
    &["DT", "JJ", "NN", "IN", "DT", "JJ", "NN", "VB"],
    &["DT", "NN", "VB", "IN", "DT", "NN", "IN", "DT", "NN"],
];

/// Collapses fine-grained Penn tags onto the synthetic tagset.
pub fn coarse_tag(tag: &str) -> &str {
    match tag {
        t if t.starts_with("NN") => "NN",
        t if t.starts_with("VB") => "VB",
        t if t.starts_with("JJ") => "JJ",
        "IN" | "TO" => "IN",
        "DT" | "PDT" | "WDT" => "DT",
        t => t,
    }
}

pub fn is_content_tag(tag: &str) -> bool {
    CONTENT_TAGS.contains(&tag)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub topics: usize,
    pub dim: usize,
    pub documents: usize,
    pub sentences_per_document: usize,
    /// Standard deviation of per-word noise added to content vectors.
    pub content_noise: f64,
    /// Expected length of a function-word vector.
    pub function_scale: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            topics: LEXICONS.len(),
            dim: 25,
            documents: 400,
            sentences_per_document: 5,
            content_noise: 0.5,
            function_scale: 5.0,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub documents: Vec<Vec<TaggedSentence>>,
    pub init: EmbeddingTable,
    topics: usize,
}

fn draw<'a>(rng: &mut ChaCha8Rng, words: &[&'a str]) -> &'a str {
    words.choose(rng).copied().unwrap_or("")
}

impl SyntheticCorpus {
    pub fn generate(config: &SyntheticConfig) -> Result<Self> {
        if config.topics == 0 || config.topics > LEXICONS.len() {
            return Err(Error::Config(format!("topics must be in 1..={}", LEXICONS.len())));
        }
        if config.dim < config.topics {
            return Err(Error::Config("dimension must be at least the number of topics".into()));
        }
        if config.documents == 0 || config.sentences_per_document == 0 {
            return Err(Error::Config("corpus must contain at least one sentence".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let init = Self::embeddings(config, &mut rng)?;
        let mut corpus = SyntheticCorpus {
            documents: Vec::with_capacity(config.documents),
            init,
            topics: config.topics,
        };
        for d in 0..config.documents {
            let topic = d % config.topics;
            let doc = (0..config.sentences_per_document)
                .map(|_| corpus.sentence(topic, &mut rng))
                .collect();
            corpus.documents.push(doc);
        }
        Ok(corpus)
    }

    fn embeddings(config: &SyntheticConfig, rng: &mut ChaCha8Rng) -> Result<EmbeddingTable> {
        let dim = config.dim;
        let content = Normal::new(0.0, config.content_noise / (dim as f64).sqrt())
            .map_err(|e| Error::Config(e.to_string()))?;
        let function = Normal::new(0.0, config.function_scale / (dim as f64).sqrt())
            .map_err(|e| Error::Config(e.to_string()))?;
        let mut entries = Vec::new();
        for (t, lex) in LEXICONS.iter().take(config.topics).enumerate() {
            for w in lex.nouns.iter().chain(lex.verbs).chain(lex.adjectives) {
                let mut v: Vec<f64> = (0..dim).map(|_| content.sample(rng)).collect();
                v[t] += 1.0;
                entries.push((*w, v));
            }
        }
        for w in DETERMINERS.iter().chain(&PREPOSITIONS) {
            entries.push((*w, (0..dim).map(|_| function.sample(rng)).collect()));
        }
        EmbeddingTable::from_entries(dim, entries)
    }

    pub fn topics(&self) -> usize {
        self.topics
    }

    pub fn sentences(&self) -> impl Iterator<Item = &TaggedSentence> {
        self.documents.iter().flatten()
    }

    /// One sentence whose content words come from `topic`.
    pub fn sentence(&self, topic: usize, rng: &mut ChaCha8Rng) -> TaggedSentence {
        self.mixed_sentence(topic, topic, 1.0, rng)
    }

    /// A sentence whose content words come from `primary` with probability
    /// `share` and from `secondary` otherwise.
    fn mixed_sentence(&self, primary: usize, secondary: usize, share: f64, rng: &mut ChaCha8Rng) -> TaggedSentence {
        let template = *TEMPLATES.choose(rng).unwrap_or(&TEMPLATES[0]);
        self.fill(template, |rng| if rng.random::<f64>() < share { primary } else { secondary }, rng)
    }

    fn fill(&self, template: &[&str], mut topic: impl FnMut(&mut ChaCha8Rng) -> usize, rng: &mut ChaCha8Rng) -> TaggedSentence {
        let tokens = template
            .iter()
            .map(|tag| {
                let word = match *tag {
                    "DT" => draw(rng, &DETERMINERS),
                    "IN" => draw(rng, &PREPOSITIONS),
                    t => {
                        let lex = &LEXICONS[topic(rng)];
                        match t {
                            "NN" => draw(rng, lex.nouns),
                            "VB" => draw(rng, lex.verbs),
                            _ => draw(rng, lex.adjectives),
                        }
                    }
                };
                TaggedToken::new(word, *tag)
            })
            .collect();
        TaggedSentence::new(tokens).expect("templates are non-empty")
    }

    /// Graded similarity pairs. The first sentence is on one topic; each
    /// content word of the second is on the same topic with a probability
    /// drawn per pair. Gold is 5 times the realised share of matching
    /// content words.
    pub fn sts_pairs(&self, n: usize, seed: u64) -> Vec<StsExample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let a = rng.random_range(0..self.topics);
                let b = if self.topics > 1 {
                    (a + rng.random_range(1..self.topics)) % self.topics
                } else {
                    a
                };
                let share: f64 = rng.random();
                let s1 = self.sentence(a, &mut rng);
                let template = *TEMPLATES.choose(&mut rng).unwrap_or(&TEMPLATES[0]);
                let mut hits = 0usize;
                let mut content = 0usize;
                let s2 = self.fill(
                    template,
                    |rng| {
                        content += 1;
                        if rng.random::<f64>() < share {
                            hits += 1;
                            a
                        } else {
                            b
                        }
                    },
                    &mut rng,
                );
                StsExample {
                    gold: 5.0 * hits as f64 / content.max(1) as f64,
                    s1,
                    s2,
                }
            })
            .collect()
    }
}
