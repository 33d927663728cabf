//! Browser bindings. Every export returns a JSON string; the pure functions
//! behind them are native so they can be tested without a JS host.

use attnsent::eval::{eval_sts, tag_attention_profile, StsDataset};
use attnsent::synthetic::{coarse_tag, SyntheticConfig, SyntheticCorpus};
use attnsent::training::{train_scbow, OptimizerConfig, ScbowConfig};
use attnsent::{AttentionKind, KnModel, SentenceEncoder, TagKind, TaggedSentence, TaggedToken, TfIdfIndex};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const EXAMPLE: &str = "a#DT man#NN with#IN a#DT hard#JJ hat#NN is#VBZ dancing#VBG";

#[derive(Debug, Serialize)]
pub struct TokenWeight {
    pub word: String,
    pub tag: String,
    /// Pre-softmax score: clipped surprisal, tf-idf, or word·tag.
    pub score: f64,
    pub weight: f64,
}

#[derive(Debug, Serialize)]
pub struct SentenceWeights {
    pub sentences: usize,
    pub tokens: Vec<TokenWeight>,
}

#[derive(Debug, Serialize)]
pub struct TagBar {
    pub tag: String,
    pub count: usize,
    pub mean_attention: f64,
}

#[derive(Debug, Serialize)]
pub struct TrainingSummary {
    pub sentences: usize,
    pub losses: Vec<f64>,
    pub pearson_uniform: f64,
    pub pearson_pos: f64,
    pub profile: Vec<TagBar>,
    pub example: Vec<TokenWeight>,
}

/// Accepts `word#TAG` or bare words; bare words get the tag `X`.
fn parse_loose(line: &str) -> Result<TaggedSentence, String> {
    let tokens = line
        .split_whitespace()
        .map(|t| {
            if t.contains('#') {
                TaggedToken::parse(t)
            } else {
                Ok(TaggedToken::new(t.to_lowercase(), "X"))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    TaggedSentence::new(tokens).map_err(|e| e.to_string())
}

fn parse_corpus(text: &str) -> Result<Vec<TaggedSentence>, String> {
    let lines: Vec<_> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| parse_loose(l).map_err(|e| format!("corpus line {}: {e}", i + 1)))
        .collect::<Result<_, _>>()?;
    if lines.is_empty() {
        return Err("corpus is empty".into());
    }
    Ok(lines)
}

fn weigh(sentence: &TaggedSentence, enc: &SentenceEncoder<'_>) -> Result<Vec<TokenWeight>, String> {
    let scores = enc.scores(sentence).map_err(|e| e.to_string())?;
    let weights = enc.weights(sentence).map_err(|e| e.to_string())?;
    Ok(sentence
        .tokens()
        .iter()
        .enumerate()
        .map(|(i, tok)| TokenWeight {
            word: tok.word.clone(),
            tag: tok.pos.clone(),
            score: scores.as_ref().map_or(0.0, |s| s[i]),
            weight: weights.values()[i],
        })
        .collect())
}

pub fn surprisal_weights(corpus: &str, sentence: &str, order: usize) -> Result<SentenceWeights, String> {
    let corpus = parse_corpus(corpus)?;
    let sentence = parse_loose(sentence)?;
    let lm = KnModel::build_tagged(&corpus, order, 1).map_err(|e| e.to_string())?;
    let empty = attnsent::EmbeddingTable::from_entries(1, std::iter::empty::<(&str, Vec<f64>)>())
        .map_err(|e| e.to_string())?;
    let enc = SentenceEncoder::new(&empty, AttentionKind::Sur).with_lm(&lm);
    Ok(SentenceWeights {
        sentences: corpus.len(),
        tokens: weigh(&sentence, &enc)?,
    })
}

pub fn tfidf_weights(corpus: &str, sentence: &str) -> Result<SentenceWeights, String> {
    let corpus = parse_corpus(corpus)?;
    let sentence = parse_loose(sentence)?;
    let index = TfIdfIndex::build(&corpus).map_err(|e| e.to_string())?;
    let empty = attnsent::EmbeddingTable::from_entries(1, std::iter::empty::<(&str, Vec<f64>)>())
        .map_err(|e| e.to_string())?;
    let enc = SentenceEncoder::new(&empty, AttentionKind::TfIdf).with_tfidf(&index);
    Ok(SentenceWeights {
        sentences: corpus.len(),
        tokens: weigh(&sentence, &enc)?,
    })
}

/// Trains uniform and POS-attention models on a synthetic topical corpus and
/// reports held-out similarity plus what the tag vectors learned.
pub fn train_synthetic(documents: usize, epochs: usize, seed: u64) -> Result<TrainingSummary, String> {
    let corpus = SyntheticCorpus::generate(&SyntheticConfig {
        documents,
        seed,
        ..SyntheticConfig::default()
    })
    .map_err(|e| e.to_string())?;
    let held_out = [StsDataset {
        name: "held-out".into(),
        group: None,
        examples: corpus.sts_pairs(200, seed ^ 0x5eed),
    }];
    let config = |kind| ScbowConfig {
        attention: kind,
        epochs,
        dim: corpus.init.dim(),
        seed,
        optimizer: OptimizerConfig::adagrad(0.03),
        ..ScbowConfig::default()
    };
    let train = |kind| train_scbow(&corpus.documents, Some(corpus.init.clone()), None, &config(kind));

    let (uniform, _) = train(AttentionKind::Uniform).map_err(|e| e.to_string())?;
    let (pos, log) = train(AttentionKind::Pos).map_err(|e| e.to_string())?;
    let pearson = |bundle, kind| -> Result<f64, String> {
        let enc = SentenceEncoder::from_bundle(bundle, kind).map_err(|e| e.to_string())?;
        Ok(eval_sts(&held_out, &enc).map_err(|e| e.to_string())?.average)
    };
    let enc = SentenceEncoder::from_bundle(&pos, AttentionKind::Pos).map_err(|e| e.to_string())?;
    let sentences: Vec<TaggedSentence> = corpus.sentences().cloned().collect();
    let profile = tag_attention_profile(&sentences, &enc, TagKind::Pos, 10)
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|r| TagBar {
            tag: r.tag,
            count: r.token_count,
            mean_attention: r.mean_attention,
        })
        .collect();
    let example = TaggedSentence::new(
        EXAMPLE
            .split(' ')
            .map(|t| {
                let tok = TaggedToken::parse(t).expect("example is well formed");
                TaggedToken::new(tok.word, coarse_tag(&tok.pos))
            })
            .collect(),
    )
    .map_err(|e| e.to_string())?;

    Ok(TrainingSummary {
        sentences: sentences.len(),
        losses: log.iter().map(|l| l.mean_loss).collect(),
        pearson_uniform: pearson(&uniform, AttentionKind::Uniform)?,
        pearson_pos: pearson(&pos, AttentionKind::Pos)?,
        profile,
        example: weigh(&example, &enc)?,
    })
}

fn to_json<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = surprisalAttention)]
pub fn surprisal_attention(corpus: &str, sentence: &str, order: usize) -> Result<String, JsError> {
    to_json(surprisal_weights(corpus, sentence, order))
}

#[wasm_bindgen(js_name = tfidfAttention)]
pub fn tfidf_attention(corpus: &str, sentence: &str) -> Result<String, JsError> {
    to_json(tfidf_weights(corpus, sentence))
}

#[wasm_bindgen(js_name = trainTagAttention)]
pub fn train_tag_attention(documents: usize, epochs: usize, seed: u32) -> Result<String, JsError> {
    to_json(train_synthetic(documents, epochs, u64::from(seed)))
}
